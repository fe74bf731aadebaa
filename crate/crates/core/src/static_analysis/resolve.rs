//! Call resolution.
//!
//! Cascade, first hit wins:
//! 1. locals and parameters of enclosing functions block resolution, except
//!    nested function definitions, which resolve to themselves;
//! 2. `self.m()` resolves to a method of the enclosing class;
//! 3. module-level functions and classes (a class call targets `__init__`);
//! 4. import aliases are expanded and looked up exactly;
//! 5. the last name segment is matched against every definition in the corpus,
//!    and used only when exactly one definition carries it.
//!
//! Module variables and conditional-import names block resolution at step 3,
//! targets of explicit imports that lie outside the corpus are external, and
//! builtins are never resolved.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::extract::{Callee, EntityTable, HeadScope, RawCallSite};
use crate::model::{CallEdge, Provenance, QualifiedName};

const INIT: &str = "__init__";
const MAX_REEXPORT_HOPS: usize = 8;

const BUILTINS: &[&str] = &[
    "abs", "aiter", "all", "anext", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes",
    "callable", "chr", "classmethod", "compile", "complex", "delattr", "dict", "dir", "divmod", "enumerate",
    "eval", "exec", "filter", "float", "format", "frozenset", "getattr", "globals", "hasattr", "hash", "help",
    "hex", "id", "input", "int", "isinstance", "issubclass", "iter", "len", "list", "locals", "map", "max",
    "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print", "property", "range", "repr",
    "reversed", "round", "set", "setattr", "slice", "sorted", "staticmethod", "str", "sum", "super", "tuple",
    "type", "vars", "zip", "__import__", "BaseException", "Exception", "ArithmeticError", "AssertionError",
    "AttributeError", "EOFError", "ImportError", "IndexError", "KeyError", "KeyboardInterrupt",
    "LookupError", "MemoryError", "ModuleNotFoundError", "NameError", "NotImplementedError", "OSError",
    "OverflowError", "RecursionError", "RuntimeError", "StopIteration", "SyntaxError", "SystemExit",
    "TypeError", "UnicodeError", "ValueError", "ZeroDivisionError", "FileNotFoundError", "PermissionError",
    "TimeoutError", "Warning", "UserWarning", "DeprecationWarning", "RuntimeWarning",
];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

/// Why a call site produced no edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnresolvedReason {
    /// Head name is a local variable or parameter.
    ShadowedLocal,
    /// Head name is a module variable or conditionally imported.
    OpaqueBinding,
    Builtin,
    /// Import target lies outside the analyzed corpus.
    External,
    /// Qualified target inside the corpus names no definition.
    MissingDefinition,
    /// Class has no `__init__` of its own.
    ClassWithoutInit,
    /// Method call whose name no single definition carries.
    UnresolvedAttribute,
    /// Several definitions share the name.
    Ambiguous,
    UnknownName,
    /// Callee is not a name (call result, subscript, lambda).
    DynamicCallee,
}

impl UnresolvedReason {
    pub fn code(self) -> &'static str {
        match self {
            Self::ShadowedLocal => "shadowed-local",
            Self::OpaqueBinding => "opaque-binding",
            Self::Builtin => "builtin",
            Self::External => "external",
            Self::MissingDefinition => "missing-definition",
            Self::ClassWithoutInit => "class-without-init",
            Self::UnresolvedAttribute => "unresolved-attribute",
            Self::Ambiguous => "ambiguous",
            Self::UnknownName => "unknown-name",
            Self::DynamicCallee => "dynamic-callee",
        }
    }
}

/// Cascade step that produced an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResolutionStep {
    NestedDefinition,
    SelfMethod,
    ModuleDefinition,
    ImportAlias,
    UniqueName,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedCall {
    pub caller: QualifiedName,
    pub callee: String,
    pub line: usize,
    pub reason: UnresolvedReason,
}

/// Outcome for one call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SiteResolution {
    Resolved { callee: QualifiedName, step: ResolutionStep },
    Unresolved(UnresolvedReason),
}

#[derive(Debug, Clone, Default)]
pub struct Resolution {
    /// One entry per input site, in input order.
    pub per_site: Vec<SiteResolution>,
    pub edges: Vec<CallEdge>,
    pub unresolved: Vec<UnresolvedCall>,
}

impl Resolution {
    pub fn callee_of(&self, index: usize) -> Option<&QualifiedName> {
        match self.per_site.get(index) {
            Some(SiteResolution::Resolved { callee, .. }) => Some(callee),
            _ => None,
        }
    }
}

enum Target<'a> {
    Function(&'a QualifiedName),
    Class(&'a QualifiedName),
}

/// Corpus-wide lookup structures.
pub struct Corpus<'a> {
    tables: BTreeMap<&'a QualifiedName, &'a EntityTable>,
    functions: BTreeSet<&'a QualifiedName>,
    classes: BTreeSet<&'a QualifiedName>,
    by_last_segment: BTreeMap<&'a str, Vec<Target<'a>>>,
}

impl<'a> Corpus<'a> {
    pub fn new(tables: &'a [EntityTable]) -> Self {
        let mut corpus = Corpus {
            tables: BTreeMap::new(),
            functions: BTreeSet::new(),
            classes: BTreeSet::new(),
            by_last_segment: BTreeMap::new(),
        };
        for t in tables {
            corpus.tables.insert(t.module_name(), t);
            for f in &t.functions {
                corpus.functions.insert(&f.signature);
                corpus
                    .by_last_segment
                    .entry(f.signature.last())
                    .or_default()
                    .push(Target::Function(&f.signature));
            }
            for c in &t.classes {
                corpus.classes.insert(&c.name);
                corpus
                    .by_last_segment
                    .entry(c.name.last())
                    .or_default()
                    .push(Target::Class(&c.name));
            }
        }
        corpus
    }

    /// Whether any corpus module equals or lies below the first segment of `name`.
    fn in_corpus_namespace(&self, name: &QualifiedName) -> bool {
        let head = name.first();
        self.tables.keys().any(|m| m.first() == head)
    }

    fn class_call(&self, class: &QualifiedName) -> Result<QualifiedName, UnresolvedReason> {
        let init = class.child(INIT).map_err(|_| UnresolvedReason::ClassWithoutInit)?;
        if self.functions.contains(&init) {
            Ok(init)
        } else {
            Err(UnresolvedReason::ClassWithoutInit)
        }
    }

    /// Exact lookup of a fully qualified callee, following package re-exports.
    fn lookup_exact(&self, name: &QualifiedName) -> Result<QualifiedName, UnresolvedReason> {
        let mut current = name.clone();
        for _ in 0..MAX_REEXPORT_HOPS {
            if self.functions.contains(&current) {
                return Ok(current);
            }
            if self.classes.contains(&current) {
                return self.class_call(&current);
            }
            if !self.in_corpus_namespace(&current) {
                return Err(UnresolvedReason::External);
            }
            // Longest module prefix, then an alias defined in that module.
            let Some(next) = self.expand_reexport(&current) else {
                return Err(UnresolvedReason::MissingDefinition);
            };
            current = next;
        }
        Err(UnresolvedReason::MissingDefinition)
    }

    fn expand_reexport(&self, name: &QualifiedName) -> Option<QualifiedName> {
        let segs: Vec<&str> = name.segments().collect();
        for split in (1..segs.len()).rev() {
            let module = QualifiedName::from_segments(&segs[..split]).ok()?;
            let Some(table) = self.tables.get(&module) else { continue };
            let aliases = table.aliases();
            let target = aliases.get(segs[split])?;
            let rest = &segs[split + 1..];
            let mut out = (*target).clone();
            for s in rest {
                out = out.child(s).ok()?;
            }
            return (out != *name).then_some(out);
        }
        None
    }

    fn unique_by_name(&self, name: &str, none: UnresolvedReason) -> Result<QualifiedName, UnresolvedReason> {
        match self.by_last_segment.get(name).map(Vec::as_slice) {
            Some([Target::Function(f)]) => Ok((*f).clone()),
            Some([Target::Class(c)]) => self.class_call(c),
            Some([]) | None => Err(none),
            Some(_) => Err(UnresolvedReason::Ambiguous),
        }
    }

    pub fn resolve(&self, site: &RawCallSite) -> SiteResolution {
        match self.resolve_inner(site) {
            Ok((callee, step)) => SiteResolution::Resolved { callee, step },
            Err(reason) => SiteResolution::Unresolved(reason),
        }
    }

    fn resolve_inner(&self, site: &RawCallSite) -> Result<(QualifiedName, ResolutionStep), UnresolvedReason> {
        let unique = |name: &str, none| self.unique_by_name(name, none).map(|q| (q, ResolutionStep::UniqueName));
        let segs = match &site.callee {
            Callee::Opaque => return Err(UnresolvedReason::DynamicCallee),
            Callee::Attribute(attr) => return unique(attr, UnresolvedReason::UnresolvedAttribute),
            Callee::Dotted(segs) => segs,
        };
        let last = segs.last().map(String::as_str).unwrap_or_default();
        let dotted = segs.len() > 1;

        match &site.head {
            HeadScope::Local if dotted => return unique(last, UnresolvedReason::UnresolvedAttribute),
            HeadScope::Local => return Err(UnresolvedReason::ShadowedLocal),
            HeadScope::LocalDef(def) if !dotted => return Ok((def.clone(), ResolutionStep::NestedDefinition)),
            HeadScope::LocalDef(_) => return unique(last, UnresolvedReason::UnresolvedAttribute),
            HeadScope::SelfReceiver(class) => {
                if segs.len() == 2 {
                    if let Ok(method) = class.child(last) {
                        if self.functions.contains(&method) {
                            return Ok((method, ResolutionStep::SelfMethod));
                        }
                    }
                }
                return unique(last, UnresolvedReason::UnresolvedAttribute);
            }
            HeadScope::Free => {}
        }

        let caller_module = self
            .tables
            .keys()
            .filter(|m| m.is_strict_prefix_of(&site.caller))
            .max_by_key(|m| m.len())
            .copied();
        let table = caller_module.and_then(|m| self.tables.get(m)).copied();
        let head = segs[0].as_str();
        let rest: Vec<&str> = segs[1..].iter().map(String::as_str).collect();

        if let Some(table) = table {
            // Step 3: module-level definitions.
            if let Some(def) = table.module_definitions().get(head) {
                let full = extend(def, &rest).ok_or(UnresolvedReason::MissingDefinition)?;
                return self.lookup_exact(&full).map(|q| (q, ResolutionStep::ModuleDefinition));
            }
            if table.module_variables.contains(head) || table.opaque_names().contains(head) {
                return Err(UnresolvedReason::OpaqueBinding);
            }
            // Step 4: import aliases.
            if let Some(target) = table.aliases().get(head) {
                let full = extend(target, &rest).ok_or(UnresolvedReason::MissingDefinition)?;
                return self.lookup_exact(&full).map(|q| (q, ResolutionStep::ImportAlias));
            }
        }
        if is_builtin(head) {
            return Err(UnresolvedReason::Builtin);
        }
        // Step 5.
        let none = if dotted {
            UnresolvedReason::UnresolvedAttribute
        } else {
            UnresolvedReason::UnknownName
        };
        unique(last, none)
    }
}

fn extend(base: &QualifiedName, rest: &[&str]) -> Option<QualifiedName> {
    let mut out = base.clone();
    for s in rest {
        out = out.child(s).ok()?;
    }
    Some(out)
}

/// Resolves every call site. Edges are deduplicated and sorted.
pub fn resolve_calls(tables: &[EntityTable], sites: &[RawCallSite]) -> Resolution {
    let corpus = Corpus::new(tables);
    let mut per_site = Vec::with_capacity(sites.len());
    let mut edges = BTreeSet::new();
    let mut unresolved = Vec::new();
    for site in sites {
        let outcome = corpus.resolve(site);
        match &outcome {
            SiteResolution::Resolved { callee, .. } => {
                edges.insert((site.caller.clone(), callee.clone()));
            }
            SiteResolution::Unresolved(reason) => unresolved.push(UnresolvedCall {
                caller: site.caller.clone(),
                callee: site.callee.text(),
                line: site.line,
                reason: *reason,
            }),
        }
        per_site.push(outcome);
    }
    Resolution {
        per_site,
        edges: edges
            .into_iter()
            .map(|(caller, callee)| CallEdge::new(caller, callee, 0, Provenance::Static))
            .collect(),
        unresolved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::static_analysis::extract::extract_module;
    use crate::static_analysis::parse::parse_text;
    use crate::static_analysis::scan::SourceFile;
    use std::path::PathBuf;

    fn corpus(files: &[(&str, bool, &str)]) -> (Vec<EntityTable>, Vec<RawCallSite>) {
        let mut tables = Vec::new();
        let mut sites = Vec::new();
        for (module, is_package, src) in files {
            let file = SourceFile {
                path: PathBuf::from(format!("{}.py", module.replace('.', "/"))),
                module: QualifiedName::parse(module).unwrap(),
                is_package: *is_package,
            };
            let facts = extract_module(&parse_text(file, src).unwrap());
            tables.push(facts.entities);
            sites.extend(facts.sites);
        }
        (tables, sites)
    }

    fn edges(r: &Resolution) -> Vec<String> {
        r.edges.iter().map(|e| format!("{}->{}", e.caller, e.callee)).collect()
    }

    fn reasons(r: &Resolution) -> Vec<(String, &'static str)> {
        r.unresolved.iter().map(|u| (u.callee.clone(), u.reason.code())).collect()
    }

    #[test]
    fn local_definition_hit() {
        let (t, s) = corpus(&[("m", false, "def g():\n    pass\ndef f():\n    g()\n")]);
        assert_eq!(edges(&resolve_calls(&t, &s)), ["m.f->m.g"]);
    }

    #[test]
    fn alias_expansion() {
        let (t, s) = corpus(&[
            ("pkg", true, ""),
            ("pkg.a", false, "def util():\n    pass\n"),
            ("m", false, "import pkg.a as pa\ndef f():\n    pa.util()\n"),
        ]);
        assert_eq!(edges(&resolve_calls(&t, &s)), ["m.f->pkg.a.util"]);
    }

    #[test]
    fn unknown_attribute_is_reported() {
        let (t, s) = corpus(&[("m", false, "def f(obj):\n    obj.mystery()\n")]);
        let r = resolve_calls(&t, &s);
        assert!(r.edges.is_empty());
        assert_eq!(reasons(&r), [("obj.mystery".to_string(), "unresolved-attribute")]);
    }

    #[test]
    fn locals_shadow_module_definitions() {
        let src = "def g():\n    pass\ndef f(g):\n    g()\ndef h():\n    g = 1\n    g()\n";
        let (t, s) = corpus(&[("m", false, src)]);
        let r = resolve_calls(&t, &s);
        assert!(r.edges.is_empty());
        assert_eq!(r.unresolved.len(), 2);
        assert!(r.unresolved.iter().all(|u| u.reason == UnresolvedReason::ShadowedLocal));
    }

    #[test]
    fn class_call_targets_constructor() {
        let src = "class A:\n    def __init__(self):\n        pass\nclass B:\n    pass\ndef f():\n    A()\n    B()\n";
        let (t, s) = corpus(&[("m", false, src)]);
        let r = resolve_calls(&t, &s);
        assert_eq!(edges(&r), ["m.f->m.A.__init__"]);
        assert_eq!(reasons(&r), [("B".to_string(), "class-without-init")]);
    }

    #[test]
    fn self_method_then_unique_fallback() {
        let src = "\
class A:
    def run(self):
        self.step()
        self.helper.go()
        self.missing()
    def step(self):
        pass
class B:
    def go(self):
        pass
";
        let (t, s) = corpus(&[("m", false, src)]);
        let r = resolve_calls(&t, &s);
        assert_eq!(edges(&r), ["m.A.run->m.A.step", "m.A.run->m.B.go"]);
        assert_eq!(reasons(&r), [("self.missing".to_string(), "unresolved-attribute")]);
    }

    #[test]
    fn unique_name_across_corpus() {
        let (t, s) = corpus(&[
            ("a", false, "def only():\n    pass\ndef dup():\n    pass\n"),
            ("b", false, "def dup():\n    pass\ndef f():\n    only()\n    dup()\n    nowhere()\n"),
        ]);
        let r = resolve_calls(&t, &s);
        // b.dup is a module definition of b, so it wins over the ambiguity.
        assert_eq!(edges(&r), ["b.f->a.only", "b.f->b.dup"]);
        assert_eq!(reasons(&r), [("nowhere".to_string(), "unknown-name")]);

        let (t, s) = corpus(&[
            ("a", false, "def dup():\n    pass\n"),
            ("b", false, "def dup():\n    pass\n"),
            ("c", false, "def f(x):\n    x.dup()\n"),
        ]);
        assert_eq!(reasons(&resolve_calls(&t, &s)), [("x.dup".to_string(), "ambiguous")]);
    }

    #[test]
    fn builtins_externals_and_opaque_bindings() {
        let src = "\
import os
try:
    import numpy as np
except ImportError:
    np = None
def len2(x):
    pass
def f(p):
    len(p)
    os.path.join(p)
    np.mean(p)
";
        let (t, s) = corpus(&[("m", false, src)]);
        let r = resolve_calls(&t, &s);
        assert!(r.edges.is_empty());
        assert_eq!(
            reasons(&r),
            [
                ("len".to_string(), "builtin"),
                ("os.path.join".to_string(), "external"),
                ("np.mean".to_string(), "opaque-binding"),
            ]
        );
    }

    #[test]
    fn external_alias_is_not_guessed() {
        let (t, s) = corpus(&[
            ("a", false, "def sqrt(x):\n    pass\n"),
            ("b", false, "import math\ndef f():\n    math.sqrt(2)\n"),
        ]);
        let r = resolve_calls(&t, &s);
        assert!(r.edges.is_empty());
        assert_eq!(reasons(&r), [("math.sqrt".to_string(), "external")]);
    }

    #[test]
    fn package_reexports_are_followed() {
        let (t, s) = corpus(&[
            ("pkg", true, "from pkg.impl import work\n"),
            ("pkg.impl", false, "def work():\n    pass\n"),
            ("app", false, "from pkg import work\nimport pkg\ndef f():\n    work()\n    pkg.work()\n"),
        ]);
        assert_eq!(edges(&resolve_calls(&t, &s)), ["app.f->pkg.impl.work"]);
    }

    #[test]
    fn nested_definition_resolves() {
        let src = "def outer():\n    def inner():\n        pass\n    inner()\n";
        let (t, s) = corpus(&[("m", false, src)]);
        assert_eq!(edges(&resolve_calls(&t, &s)), ["m.outer->m.outer.inner"]);
    }

    #[test]
    fn class_attribute_call_through_module_definition() {
        let src = "class K:\n    def make():\n        pass\ndef f():\n    K.make()\n";
        let (t, s) = corpus(&[("m", false, src)]);
        assert_eq!(edges(&resolve_calls(&t, &s)), ["m.f->m.K.make"]);
    }
}
