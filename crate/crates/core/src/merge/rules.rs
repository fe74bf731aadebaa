//! Name rewrite rules used to reconcile naming conventions between models.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::QualifiedName;

/// Segment used when probing a rule set for idempotence; never a real name.
const PROBE_SEGMENT: &str = "zz_probe";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NameRule {
    /// Removes a leading prefix; repeated while it still applies, never to empty.
    PrefixStrip { prefix: QualifiedName },
    /// Prepends a prefix unless the name already starts with it.
    PrefixAdd { prefix: QualifiedName },
    /// Replaces every segment equal to `from`.
    SegmentRename { from: QualifiedName, to: QualifiedName },
    /// Stops rule processing for matching names (all names when no prefix is given).
    SyntheticPassthrough {
        #[serde(default)]
        prefix: Option<QualifiedName>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("segment-rename arguments must be single segments, got {from} -> {to}")]
    MultiSegmentRename { from: String, to: String },
    #[error("rule set is not idempotent: {probe} -> {once} -> {twice}")]
    NotIdempotent { probe: String, once: String, twice: String },
}

/// Ordered rule cascade. Construction checks that applying it twice equals
/// applying it once on a probe set drawn from the rules' own vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<NameRule>", into = "Vec<NameRule>")]
pub struct NameRuleSet {
    rules: Vec<NameRule>,
}

impl TryFrom<Vec<NameRule>> for NameRuleSet {
    type Error = RuleError;

    fn try_from(rules: Vec<NameRule>) -> Result<Self, RuleError> {
        NameRuleSet::new(rules)
    }
}

impl From<NameRuleSet> for Vec<NameRule> {
    fn from(set: NameRuleSet) -> Self {
        set.rules
    }
}

fn apply_rule(rule: &NameRule, name: QualifiedName) -> QualifiedName {
    match rule {
        NameRule::PrefixStrip { prefix } => {
            let mut current = name;
            while let Some(rest) = current.strip_prefix(prefix) {
                current = rest;
            }
            current
        }
        NameRule::PrefixAdd { prefix } => {
            if name.starts_with(prefix) {
                name
            } else {
                prefix.join(&name)
            }
        }
        NameRule::SegmentRename { from, to } => {
            if !name.segments().any(|s| s == from.as_str()) {
                return name;
            }
            let segs: Vec<&str> = name
                .segments()
                .map(|s| if s == from.as_str() { to.as_str() } else { s })
                .collect();
            QualifiedName::from_segments(&segs).expect("renamed segments stay identifiers")
        }
        NameRule::SyntheticPassthrough { .. } => name,
    }
}

impl NameRuleSet {
    pub fn new(rules: Vec<NameRule>) -> Result<Self, RuleError> {
        for r in &rules {
            if let NameRule::SegmentRename { from, to } = r {
                if from.len() != 1 || to.len() != 1 {
                    return Err(RuleError::MultiSegmentRename {
                        from: from.to_string(),
                        to: to.to_string(),
                    });
                }
            }
        }
        let set = NameRuleSet { rules };
        set.check_idempotent()?;
        Ok(set)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rules(&self) -> &[NameRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rewrites a name through the cascade. Synthetic names are never rewritten.
    pub fn apply(&self, name: &QualifiedName) -> QualifiedName {
        if name.is_synthetic() {
            return name.clone();
        }
        let mut current = name.clone();
        for rule in &self.rules {
            if let NameRule::SyntheticPassthrough { prefix } = rule {
                let stop = prefix.as_ref().is_none_or(|p| current.starts_with(p));
                if stop {
                    return current;
                }
                continue;
            }
            current = apply_rule(rule, current);
        }
        current
    }

    /// Names assembled from the rules' prefixes and segments plus a fresh segment.
    fn probe_names(&self) -> Vec<QualifiedName> {
        let fresh = QualifiedName::parse(PROBE_SEGMENT).expect("probe segment is an identifier");
        let mut parts: BTreeSet<QualifiedName> = BTreeSet::new();
        for r in &self.rules {
            match r {
                NameRule::PrefixStrip { prefix } | NameRule::PrefixAdd { prefix } => {
                    parts.insert(prefix.clone());
                }
                NameRule::SegmentRename { from, to } => {
                    parts.insert(from.clone());
                    parts.insert(to.clone());
                }
                NameRule::SyntheticPassthrough { prefix: Some(p) } => {
                    parts.insert(p.clone());
                }
                NameRule::SyntheticPassthrough { prefix: None } => {}
            }
        }
        let mut probes: BTreeSet<QualifiedName> = BTreeSet::new();
        probes.insert(fresh.clone());
        for a in &parts {
            probes.insert(a.clone());
            probes.insert(a.join(&fresh));
            probes.insert(fresh.join(a));
            probes.insert(fresh.join(a).join(&fresh));
            for b in &parts {
                probes.insert(a.join(b));
                probes.insert(a.join(b).join(&fresh));
                probes.insert(a.join(&fresh).join(b));
            }
        }
        probes.into_iter().collect()
    }

    fn check_idempotent(&self) -> Result<(), RuleError> {
        for probe in self.probe_names() {
            let once = self.apply(&probe);
            let twice = self.apply(&once);
            if once != twice {
                return Err(RuleError::NotIdempotent {
                    probe: probe.to_string(),
                    once: once.to_string(),
                    twice: twice.to_string(),
                });
            }
        }
        Ok(())
    }
}
