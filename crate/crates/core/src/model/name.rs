use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Reserved name of the synthetic component that owns the dynamic entry point.
pub const SYNTHETIC_COMPONENT: &str = "++ unknown component ++";

/// Last segment of the synthetic entry operation.
pub const SYNTHETIC_ENTRY: &str = "entry";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("qualified name is empty")]
    Empty,
    #[error("empty segment at index {index}")]
    EmptySegment { index: usize },
    #[error("illegal character in segment {index} ({segment:?})")]
    IllegalSegment { index: usize, segment: String },
}

/// Dotted hierarchical identifier of a package, module, class or function.
///
/// Segments are Python identifiers. The only exception is the reserved synthetic
/// component name, which may appear as the first segment.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QualifiedName {
    text: String,
}

fn is_identifier(segment: &str) -> bool {
    let mut chars = segment.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl QualifiedName {
    pub fn parse(text: &str) -> Result<Self, NameError> {
        if text.is_empty() {
            return Err(NameError::Empty);
        }
        for (index, segment) in text.split('.').enumerate() {
            if segment.is_empty() {
                return Err(NameError::EmptySegment { index });
            }
            let reserved = index == 0 && segment == SYNTHETIC_COMPONENT;
            if !reserved && !is_identifier(segment) {
                return Err(NameError::IllegalSegment {
                    index,
                    segment: segment.to_string(),
                });
            }
        }
        Ok(Self {
            text: text.to_string(),
        })
    }

    pub fn from_segments<S: AsRef<str>>(segments: &[S]) -> Result<Self, NameError> {
        let joined = segments
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(".");
        Self::parse(&joined)
    }

    /// The synthetic component `++ unknown component ++`.
    pub fn synthetic_component() -> Self {
        Self {
            text: SYNTHETIC_COMPONENT.to_string(),
        }
    }

    /// The synthetic entry operation owned by the synthetic component.
    pub fn synthetic_entry() -> Self {
        Self {
            text: format!("{SYNTHETIC_COMPONENT}.{SYNTHETIC_ENTRY}"),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn segments(&self) -> impl DoubleEndedIterator<Item = &str> + Clone {
        self.text.split('.')
    }

    pub fn len(&self) -> usize {
        self.segments().count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> &str {
        self.segments().next().unwrap_or_default()
    }

    pub fn last(&self) -> &str {
        self.segments().next_back().unwrap_or_default()
    }

    pub fn is_synthetic(&self) -> bool {
        self.first() == SYNTHETIC_COMPONENT
    }

    /// Name with the last segment removed; `None` for single-segment names.
    pub fn parent(&self) -> Option<QualifiedName> {
        self.text.rfind('.').map(|idx| Self {
            text: self.text[..idx].to_string(),
        })
    }

    /// All proper prefixes, shortest first.
    pub fn ancestors(&self) -> Vec<QualifiedName> {
        let mut out = Vec::new();
        for (idx, ch) in self.text.char_indices() {
            if ch == '.' {
                out.push(Self {
                    text: self.text[..idx].to_string(),
                });
            }
        }
        out
    }

    pub fn child(&self, segment: &str) -> Result<QualifiedName, NameError> {
        Self::parse(&format!("{}.{}", self.text, segment))
    }

    pub fn join(&self, other: &QualifiedName) -> QualifiedName {
        Self {
            text: format!("{}.{}", self.text, other.text),
        }
    }

    /// True when `self` equals `prefix` or extends it by whole segments.
    pub fn starts_with(&self, prefix: &QualifiedName) -> bool {
        self.text == prefix.text
            || (self.text.len() > prefix.text.len()
                && self.text.starts_with(&prefix.text)
                && self.text.as_bytes()[prefix.text.len()] == b'.')
    }

    pub fn is_strict_prefix_of(&self, other: &QualifiedName) -> bool {
        other.text.len() > self.text.len() && other.starts_with(self)
    }

    /// Removes `prefix` when it is a strict prefix.
    pub fn strip_prefix(&self, prefix: &QualifiedName) -> Option<QualifiedName> {
        if prefix.is_strict_prefix_of(self) {
            Some(Self {
                text: self.text[prefix.text.len() + 1..].to_string(),
            })
        } else {
            None
        }
    }
}

impl Ord for QualifiedName {
    fn cmp(&self, other: &Self) -> Ordering {
        self.text.cmp(&other.text)
    }
}

impl PartialOrd for QualifiedName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl fmt::Debug for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.text)
    }
}

impl FromStr for QualifiedName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for QualifiedName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for QualifiedName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Self::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_dotted_names() {
        let name = QualifiedName::parse("pkg.mod.Cls.run").unwrap();
        assert_eq!(name.segments().collect::<Vec<_>>(), ["pkg", "mod", "Cls", "run"]);
        assert_eq!(name.to_string(), "pkg.mod.Cls.run");

        let single = QualifiedName::parse("main").unwrap();
        assert_eq!(single.segments().collect::<Vec<_>>(), ["main"]);
        assert_eq!(single.parent(), None);
    }

    #[test]
    fn rejects_empty_segment() {
        assert_eq!(
            QualifiedName::parse("a..b"),
            Err(NameError::EmptySegment { index: 1 })
        );
        assert_eq!(QualifiedName::parse(""), Err(NameError::Empty));
        assert_eq!(
            QualifiedName::parse("a."),
            Err(NameError::EmptySegment { index: 1 })
        );
    }

    #[test]
    fn rejects_illegal_characters() {
        let err = QualifiedName::parse("pkg.my-mod").unwrap_err();
        assert_eq!(
            err,
            NameError::IllegalSegment {
                index: 1,
                segment: "my-mod".into()
            }
        );
        assert!(QualifiedName::parse("1abc").is_err());
        assert!(QualifiedName::parse("pkg.++ unknown component ++").is_err());
    }

    #[test]
    fn synthetic_names() {
        let entry = QualifiedName::synthetic_entry();
        assert_eq!(entry.as_str(), "++ unknown component ++.entry");
        assert_eq!(QualifiedName::parse(entry.as_str()).unwrap(), entry);
        assert_eq!(entry.parent().unwrap(), QualifiedName::synthetic_component());
        assert!(entry.is_synthetic());
    }

    #[test]
    fn prefix_relations() {
        let a = QualifiedName::parse("pkg.a").unwrap();
        let f = QualifiedName::parse("pkg.a.f").unwrap();
        let other = QualifiedName::parse("pkg.ab.f").unwrap();
        assert!(a.is_strict_prefix_of(&f));
        assert!(!a.is_strict_prefix_of(&a));
        assert!(!a.is_strict_prefix_of(&other));
        assert_eq!(f.strip_prefix(&a).unwrap().as_str(), "f");
        assert_eq!(
            f.ancestors().iter().map(|n| n.as_str()).collect::<Vec<_>>(),
            ["pkg", "pkg.a"]
        );
    }

    proptest! {
        #[test]
        fn render_parse_identity(segs in prop::collection::vec("[A-Za-z_][A-Za-z0-9_]{0,6}", 1..6)) {
            let name = QualifiedName::from_segments(&segs).unwrap();
            prop_assert_eq!(QualifiedName::parse(&name.to_string()).unwrap(), name.clone());
            prop_assert_eq!(name.segments().map(str::to_string).collect::<Vec<_>>(), segs);
        }

        #[test]
        fn ordering_matches_segment_order(
            a in prop::collection::vec("[a-c_][a-c0-9_]{0,2}", 1..4),
            b in prop::collection::vec("[a-c_][a-c0-9_]{0,2}", 1..4),
        ) {
            let na = QualifiedName::from_segments(&a).unwrap();
            let nb = QualifiedName::from_segments(&b).unwrap();
            prop_assert_eq!(na.cmp(&nb), a.cmp(&b));
        }
    }
}
