use std::collections::BTreeMap;
use std::fmt::Write;

use super::{DotMode, ExportOptions};
use crate::model::{ArchitectureModel, Component, QualifiedName};

/// Double-quoted DOT identifier.
pub fn quote_id(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn indent(depth: usize) -> String {
    "  ".repeat(depth)
}

fn write_edges(out: &mut String, m: &ArchitectureModel, options: &ExportOptions) {
    for e in m.call_edges() {
        let weight = if options.include_weights {
            format!(", weight={}", e.weight)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "  {} -> {} [kind=call{weight}];",
            quote_id(e.caller.as_str()),
            quote_id(e.callee.as_str())
        );
    }
    if options.include_dataflow {
        for d in m.dataflow_edges() {
            let _ = writeln!(
                out,
                "  {} -> {} [kind=dataflow, flow={}, style=dashed];",
                quote_id(d.source.as_str()),
                quote_id(d.target.as_str()),
                quote_id(d.kind.as_str())
            );
        }
    }
}

fn write_flat(out: &mut String, m: &ArchitectureModel) {
    for c in m.components() {
        let _ = writeln!(out, "  {} [kind={}, shape=box];", quote_id(c.name.as_str()), c.kind);
    }
    for o in m.operations() {
        let _ = writeln!(out, "  {} [kind=operation, label={}];", quote_id(o.signature.as_str()), quote_id(o.signature.last()));
    }
    for c in m.components() {
        if let Some(p) = &c.parent {
            let _ = writeln!(out, "  {} -> {} [kind=owns];", quote_id(p.as_str()), quote_id(c.name.as_str()));
        }
    }
    for o in m.operations() {
        let _ = writeln!(
            out,
            "  {} -> {} [kind=owns];",
            quote_id(o.owner.as_str()),
            quote_id(o.signature.as_str())
        );
    }
}

struct Tree<'a> {
    children: BTreeMap<Option<&'a QualifiedName>, Vec<&'a Component>>,
    operations: BTreeMap<&'a QualifiedName, Vec<&'a QualifiedName>>,
}

fn write_cluster(out: &mut String, tree: &Tree<'_>, c: &Component, depth: usize) {
    let pad = indent(depth);
    let _ = writeln!(out, "{pad}subgraph {} {{", quote_id(&format!("cluster_{}", c.name)));
    let _ = writeln!(out, "{pad}  label={};", quote_id(c.name.as_str()));
    let _ = writeln!(out, "{pad}  kind={};", c.kind);
    for op in tree.operations.get(&c.name).into_iter().flatten() {
        let _ = writeln!(out, "{pad}  {} [label={}];", quote_id(op.as_str()), quote_id(op.last()));
    }
    for child in tree.children.get(&Some(&c.name)).into_iter().flatten() {
        write_cluster(out, tree, child, depth + 1);
    }
    let _ = writeln!(out, "{pad}}}");
}

fn write_grouped(out: &mut String, m: &ArchitectureModel) {
    let mut tree = Tree {
        children: BTreeMap::new(),
        operations: BTreeMap::new(),
    };
    for c in m.components() {
        tree.children.entry(c.parent.as_ref()).or_default().push(c);
    }
    for o in m.operations() {
        tree.operations.entry(&o.owner).or_default().push(&o.signature);
    }
    for c in tree.children.get(&None).into_iter().flatten() {
        write_cluster(out, &tree, c, 1);
    }
}

/// DOT rendering of a model. Node ids are canonical names; output order follows
/// the model's sorted collections, so equal models give equal text.
pub fn to_dot(m: &ArchitectureModel, options: &ExportOptions) -> String {
    let mut out = String::from("digraph G {\n");
    if !m.is_empty() {
        let _ = writeln!(out, "  label={};", quote_id(m.label()));
        out.push_str("  node [shape=ellipse];\n");
    }
    match options.dot_mode {
        DotMode::Flat => write_flat(&mut out, m),
        DotMode::Grouped => write_grouped(&mut out, m),
    }
    write_edges(&mut out, m, options);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{anygraph_mini, qn};
    use crate::model::{ComponentKind, Operation, Provenance};

    fn grouped() -> ExportOptions {
        ExportOptions::default()
    }

    #[test]
    fn empty_model_is_an_empty_digraph() {
        let text = to_dot(&ArchitectureModel::empty("e"), &grouped());
        assert_eq!(text.split_whitespace().collect::<Vec<_>>(), ["digraph", "G", "{", "}"]);
    }

    #[test]
    fn one_component_one_cluster() {
        let st = Provenance::Static;
        let m = ArchitectureModel::from_parts(
            "x",
            vec![Component::new(qn("pkg"), ComponentKind::Package, None, st), Component::new(qn("pkg.a"), ComponentKind::Module, Some(qn("pkg")), st)],
            vec![Operation::new(qn("pkg.a.f"), qn("pkg.a"), 0, st)],
            vec![],
            vec![],
        );
        let text = to_dot(&m, &grouped());
        assert_eq!(text.matches("subgraph").count(), 2);
        let inner = text.find("\"cluster_pkg.a\"").unwrap();
        let node = text.find("\"pkg.a.f\" [").unwrap();
        assert!(node > inner);
    }

    #[test]
    fn flat_mode_draws_ownership_edges() {
        let m = anygraph_mini();
        let opts = ExportOptions {
            dot_mode: DotMode::Flat,
            ..grouped()
        };
        let text = to_dot(&m, &opts);
        let owns = text.matches("[kind=owns]").count();
        assert_eq!(owns, m.operations().len() + m.components().iter().filter(|c| c.parent.is_some()).count());
        assert!(!text.contains("subgraph"));
    }

    #[test]
    fn weights_and_dataflow_are_optional() {
        let m = anygraph_mini();
        let full = to_dot(&m, &grouped());
        assert!(full.contains("weight=0") && full.contains("style=dashed"));
        let bare = to_dot(
            &m,
            &ExportOptions {
                include_weights: false,
                include_dataflow: false,
                ..grouped()
            },
        );
        assert!(!bare.contains("weight=") && !bare.contains("dashed"));
    }

    #[test]
    fn quoting_escapes() {
        assert_eq!(quote_id(r#"a"b\c"#), r#""a\"b\\c""#);
    }
}
