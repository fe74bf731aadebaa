use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write;

use serde::Serialize;

use crate::model::{ArchitectureModel, Component, QualifiedName};

const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

/// `(id, for, attr.name, attr.type)` of every declared key.
const KEYS: [(&str, &str, &str, &str); 8] = [
    ("node_kind", "node", "kind", "string"),
    ("node_name", "node", "name", "string"),
    ("node_provenance", "node", "provenance", "string"),
    ("node_arity", "node", "arity", "int"),
    ("edge_kind", "edge", "kind", "string"),
    ("edge_weight", "edge", "weight", "long"),
    ("edge_provenance", "edge", "provenance", "string"),
    ("edge_flow", "edge", "flow", "string"),
];

pub fn xml_escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// GraphML ids are NMTOKENs. Letters, digits, `_` and `.` pass through and any
/// other byte becomes `-XX-`, so the mapping is injective.
fn node_id(name: &QualifiedName) -> String {
    let mut out = String::with_capacity(name.as_str().len());
    for b in name.as_str().bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' {
            out.push(b as char);
        } else {
            let _ = write!(out, "-{b:02X}-");
        }
    }
    out
}

fn data(out: &mut String, pad: &str, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{pad}<data key=\"{key}\">{}</data>", xml_escape(&value.to_string()));
}

struct Tree<'a> {
    children: BTreeMap<Option<&'a QualifiedName>, Vec<&'a Component>>,
    m: &'a ArchitectureModel,
    operations: BTreeMap<&'a QualifiedName, Vec<usize>>,
}

fn write_component(out: &mut String, tree: &Tree<'_>, c: &Component, depth: usize) {
    let pad = "  ".repeat(depth);
    let id = node_id(&c.name);
    let _ = writeln!(out, "{pad}<node id=\"{id}\">");
    let inner = format!("{pad}  ");
    data(out, &inner, "node_kind", c.kind);
    data(out, &inner, "node_name", &c.name);
    data(out, &inner, "node_provenance", c.provenance);
    let _ = writeln!(out, "{inner}<graph id=\"{id}:\" edgedefault=\"directed\">");
    let leaf_pad = format!("{inner}  ");
    for &i in tree.operations.get(&c.name).into_iter().flatten() {
        let o = &tree.m.operations()[i];
        let _ = writeln!(out, "{leaf_pad}<node id=\"{}\">", node_id(&o.signature));
        let field_pad = format!("{leaf_pad}  ");
        data(out, &field_pad, "node_kind", "operation");
        data(out, &field_pad, "node_name", &o.signature);
        data(out, &field_pad, "node_provenance", o.provenance);
        data(out, &field_pad, "node_arity", o.arity);
        let _ = writeln!(out, "{leaf_pad}</node>");
    }
    for child in tree.children.get(&Some(&c.name)).into_iter().flatten() {
        write_component(out, tree, child, depth + 2);
    }
    let _ = writeln!(out, "{inner}</graph>");
    let _ = writeln!(out, "{pad}</node>");
}

/// GraphML rendering: each component is a node holding a nested graph with its
/// operations and child components. Edges join operation nodes and sit in the
/// top-level graph.
pub fn to_graphml(m: &ArchitectureModel) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<graphml xmlns=\"{GRAPHML_NS}\" xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"{GRAPHML_NS} {GRAPHML_NS}/1.0/graphml.xsd\">"
    );
    for (id, target, name, ty) in KEYS {
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{name}\" attr.type=\"{ty}\"/>");
    }
    let _ = writeln!(out, "  <graph id=\"G\" edgedefault=\"directed\">");
    let mut tree = Tree {
        children: BTreeMap::new(),
        m,
        operations: BTreeMap::new(),
    };
    for c in m.components() {
        tree.children.entry(c.parent.as_ref()).or_default().push(c);
    }
    for (i, o) in m.operations().iter().enumerate() {
        tree.operations.entry(&o.owner).or_default().push(i);
    }
    for c in tree.children.get(&None).into_iter().flatten() {
        write_component(&mut out, &tree, c, 2);
    }
    let mut n = 0usize;
    for e in m.call_edges() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{n}\" source=\"{}\" target=\"{}\">",
            node_id(&e.caller),
            node_id(&e.callee)
        );
        data(&mut out, "      ", "edge_kind", "call");
        data(&mut out, "      ", "edge_weight", e.weight);
        data(&mut out, "      ", "edge_provenance", e.provenance);
        out.push_str("    </edge>\n");
        n += 1;
    }
    for d in m.dataflow_edges() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{n}\" source=\"{}\" target=\"{}\">",
            node_id(&d.source),
            node_id(&d.target)
        );
        data(&mut out, "      ", "edge_kind", "dataflow");
        data(&mut out, "      ", "edge_flow", d.kind);
        out.push_str("    </edge>\n");
        n += 1;
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphmlError {
    #[error("not well-formed XML: {0}")]
    Xml(String),
    #[error("line {line}: {message}")]
    Schema { line: u32, message: String },
}

/// Counts gathered while checking a GraphML document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GraphmlSummary {
    pub nodes: usize,
    /// Nodes holding a nested graph.
    pub compound_nodes: usize,
    pub edges: usize,
    pub max_depth: usize,
}

const KEY_DOMAINS: [&str; 8] = ["all", "graphml", "graph", "node", "edge", "hyperedge", "port", "endpoint"];
const KEY_TYPES: [&str; 6] = ["boolean", "int", "long", "float", "double", "string"];

fn is_nmtoken(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '.' | '-' | '_' | ':' | '\u{B7}'))
}

struct Checker<'a, 'input> {
    doc: &'a roxmltree::Document<'input>,
    keys: HashMap<String, String>,
    node_ids: HashSet<String>,
    edge_ids: HashSet<String>,
    graph_ids: HashSet<String>,
    endpoints: Vec<(u32, String, String)>,
    summary: GraphmlSummary,
}

impl Checker<'_, '_> {
    fn fail<T>(&self, node: roxmltree::Node<'_, '_>, message: impl Into<String>) -> Result<T, GraphmlError> {
        Err(GraphmlError::Schema {
            line: self.doc.text_pos_at(node.range().start).row,
            message: message.into(),
        })
    }

    fn elements<'n>(
        &self,
        node: roxmltree::Node<'n, 'n>,
    ) -> Result<Vec<roxmltree::Node<'n, 'n>>, GraphmlError> {
        let mut out = Vec::new();
        for child in node.children() {
            if child.is_element() {
                if child.tag_name().namespace() != Some(GRAPHML_NS) {
                    return self.fail(child, format!("element {} outside the GraphML namespace", child.tag_name().name()));
                }
                out.push(child);
            } else if child.is_text() && !child.text().unwrap_or("").trim().is_empty() && node.tag_name().name() != "data" && node.tag_name().name() != "desc" {
                return self.fail(child, format!("text content inside <{}>", node.tag_name().name()));
            }
        }
        Ok(out)
    }

    /// Checks that element names follow `order`, each entry allowing the
    /// names listed and the given repetition (`?` at most once, `*` any).
    fn sequence(
        &self,
        parent: roxmltree::Node<'_, '_>,
        elems: &[roxmltree::Node<'_, '_>],
        order: &[(&[&str], char)],
    ) -> Result<(), GraphmlError> {
        let mut slot = 0usize;
        let mut used = 0usize;
        for e in elems {
            let name = e.tag_name().name();
            loop {
                let Some((names, rep)) = order.get(slot) else {
                    return self.fail(*e, format!("<{name}> not allowed here inside <{}>", parent.tag_name().name()));
                };
                if names.contains(&name) && (*rep == '*' || used == 0) {
                    used += 1;
                    break;
                }
                slot += 1;
                used = 0;
            }
        }
        Ok(())
    }

    fn required<'n>(&self, node: roxmltree::Node<'n, 'n>, attr: &str) -> Result<&'n str, GraphmlError> {
        match node.attribute(attr) {
            Some(v) => Ok(v),
            None => self.fail(node, format!("<{}> lacks required attribute {attr}", node.tag_name().name())),
        }
    }

    fn data(&self, node: roxmltree::Node<'_, '_>, domain: &str) -> Result<(), GraphmlError> {
        let key = self.required(node, "key")?;
        match self.keys.get(key) {
            None => self.fail(node, format!("data refers to undeclared key {key}")),
            Some(d) if d != "all" && d != domain => {
                self.fail(node, format!("key {key} is declared for {d}, used on {domain}"))
            }
            Some(_) => Ok(()),
        }
    }

    fn graph(&mut self, g: roxmltree::Node<'_, '_>, depth: usize) -> Result<(), GraphmlError> {
        let dir = self.required(g, "edgedefault")?;
        if dir != "directed" && dir != "undirected" {
            return self.fail(g, format!("edgedefault must be directed or undirected, got {dir}"));
        }
        if let Some(id) = g.attribute("id") {
            if !is_nmtoken(id) || !self.graph_ids.insert(id.to_string()) {
                return self.fail(g, format!("bad or repeated graph id {id:?}"));
            }
        }
        self.summary.max_depth = self.summary.max_depth.max(depth);
        let elems = self.elements(g)?;
        self.sequence(g, &elems, &[(&["desc"], '?'), (&["data", "node", "edge", "hyperedge"], '*')])?;
        for e in elems {
            match e.tag_name().name() {
                "data" => self.data(e, "graph")?,
                "node" => self.node(e, depth)?,
                "edge" => self.edge(e, depth)?,
                "hyperedge" => return self.fail(e, "hyperedges are not used by this checker's producer"),
                _ => {}
            }
        }
        Ok(())
    }

    fn node(&mut self, n: roxmltree::Node<'_, '_>, depth: usize) -> Result<(), GraphmlError> {
        let id = self.required(n, "id")?;
        if !is_nmtoken(id) {
            return self.fail(n, format!("node id {id:?} is not an NMTOKEN"));
        }
        if !self.node_ids.insert(id.to_string()) {
            return self.fail(n, format!("duplicate node id {id}"));
        }
        self.summary.nodes += 1;
        let elems = self.elements(n)?;
        self.sequence(n, &elems, &[(&["desc"], '?'), (&["data", "port"], '*'), (&["graph"], '?'), (&["locator"], '?')])?;
        for e in elems {
            match e.tag_name().name() {
                "data" => self.data(e, "node")?,
                "graph" => {
                    self.summary.compound_nodes += 1;
                    self.graph(e, depth + 1)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn edge(&mut self, e: roxmltree::Node<'_, '_>, depth: usize) -> Result<(), GraphmlError> {
        if let Some(id) = e.attribute("id") {
            if !is_nmtoken(id) || !self.edge_ids.insert(id.to_string()) {
                return self.fail(e, format!("bad or repeated edge id {id:?}"));
            }
        }
        let source = self.required(e, "source")?.to_string();
        let target = self.required(e, "target")?.to_string();
        if let Some(d) = e.attribute("directed") {
            if d != "true" && d != "false" {
                return self.fail(e, format!("directed must be a boolean, got {d}"));
            }
        }
        let line = self.doc.text_pos_at(e.range().start).row;
        self.endpoints.push((line, source, target));
        self.summary.edges += 1;
        let elems = self.elements(e)?;
        self.sequence(e, &elems, &[(&["desc"], '?'), (&["data"], '*'), (&["graph"], '?')])?;
        for c in elems {
            match c.tag_name().name() {
                "data" => self.data(c, "edge")?,
                "graph" => self.graph(c, depth + 1)?,
                _ => {}
            }
        }
        Ok(())
    }
}

/// Checks a document against the GraphML core content model: element order
/// and nesting, required attributes, NMTOKEN ids, unique node and edge ids,
/// declared keys used in their domain, and edge endpoints that exist.
pub fn check_graphml(text: &str) -> Result<GraphmlSummary, GraphmlError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| GraphmlError::Xml(e.to_string()))?;
    let root = doc.root_element();
    let mut ck = Checker {
        doc: &doc,
        keys: HashMap::new(),
        node_ids: HashSet::new(),
        edge_ids: HashSet::new(),
        graph_ids: HashSet::new(),
        endpoints: Vec::new(),
        summary: GraphmlSummary::default(),
    };
    if root.tag_name().name() != "graphml" || root.tag_name().namespace() != Some(GRAPHML_NS) {
        return ck.fail(root, "root element must be graphml in the GraphML namespace");
    }
    let elems = ck.elements(root)?;
    ck.sequence(root, &elems, &[(&["desc"], '?'), (&["key"], '*'), (&["data", "graph"], '*')])?;
    for e in &elems {
        if e.tag_name().name() == "key" {
            let id = ck.required(*e, "id")?;
            let domain = e.attribute("for").unwrap_or("all");
            if !is_nmtoken(id) || !KEY_DOMAINS.contains(&domain) {
                return ck.fail(*e, format!("bad key declaration {id:?} for {domain:?}"));
            }
            if let Some(ty) = e.attribute("attr.type") {
                if !KEY_TYPES.contains(&ty) {
                    return ck.fail(*e, format!("unknown attr.type {ty}"));
                }
            }
            if ck.keys.insert(id.to_string(), domain.to_string()).is_some() {
                return ck.fail(*e, format!("duplicate key id {id}"));
            }
        }
    }
    for e in elems {
        match e.tag_name().name() {
            "graph" => ck.graph(e, 1)?,
            "data" => ck.data(e, "graphml")?,
            _ => {}
        }
    }
    for (line, s, t) in &ck.endpoints {
        for end in [s, t] {
            if !ck.node_ids.contains(end) {
                return Err(GraphmlError::Schema {
                    line: *line,
                    message: format!("edge endpoint {end} is not a node"),
                });
            }
        }
    }
    Ok(ck.summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{anygraph_mini, qn};
    use crate::model::{ComponentKind, Operation, Provenance};

    #[test]
    fn empty_model_has_one_empty_graph() {
        let text = to_graphml(&ArchitectureModel::empty("e"));
        let doc = roxmltree::Document::parse(&text).unwrap();
        let graphs: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("graph")).collect();
        assert_eq!(graphs.len(), 1);
        assert_eq!(graphs[0].children().filter(|n| n.is_element()).count(), 0);
        assert_eq!(check_graphml(&text).unwrap().nodes, 0);
    }

    #[test]
    fn class_with_two_methods_is_one_compound_node() {
        let st = Provenance::Static;
        let m = ArchitectureModel::from_parts(
            "c",
            vec![Component::new(qn("m"), ComponentKind::Class, None, st)],
            vec![Operation::new(qn("m.a"), qn("m"), 1, st), Operation::new(qn("m.b"), qn("m"), 1, st)],
            vec![],
            vec![],
        );
        let summary = check_graphml(&to_graphml(&m)).unwrap();
        assert_eq!((summary.nodes, summary.compound_nodes, summary.max_depth), (3, 1, 2));
    }

    #[test]
    fn ids_are_injective_nmtokens() {
        let a = node_id(&QualifiedName::synthetic_entry());
        assert!(is_nmtoken(&a));
        assert!(!a.contains(' ') && !a.contains('+'));
        assert_ne!(node_id(&qn("a_2D_b")), node_id(&qn("a.b")));
    }

    #[test]
    fn fixture_counts() {
        let m = anygraph_mini();
        let s = check_graphml(&to_graphml(&m)).unwrap();
        assert_eq!(s.nodes, m.components().len() + m.operations().len());
        assert_eq!(s.edges, m.call_edges().len() + m.dataflow_edges().len());
    }

    #[test]
    fn checker_rejects_broken_documents() {
        let ns = GRAPHML_NS;
        let dangling = format!(
            "<graphml xmlns=\"{ns}\"><graph edgedefault=\"directed\"><node id=\"a\"/><edge source=\"a\" target=\"b\"/></graph></graphml>"
        );
        assert!(matches!(check_graphml(&dangling), Err(GraphmlError::Schema { .. })));
        let order = format!("<graphml xmlns=\"{ns}\"><graph edgedefault=\"directed\"/><key id=\"k\"/></graphml>");
        assert!(check_graphml(&order).is_err());
        let dup = format!(
            "<graphml xmlns=\"{ns}\"><graph edgedefault=\"directed\"><node id=\"a\"/><node id=\"a\"/></graph></graphml>"
        );
        assert!(check_graphml(&dup).is_err());
        let no_dir = format!("<graphml xmlns=\"{ns}\"><graph/></graphml>");
        assert!(check_graphml(&no_dir).is_err());
        let bad_key = format!(
            "<graphml xmlns=\"{ns}\"><key id=\"k\" for=\"edge\"/><graph edgedefault=\"directed\"><node id=\"a\"><data key=\"k\">1</data></node></graph></graphml>"
        );
        assert!(check_graphml(&bad_key).is_err());
        assert!(matches!(check_graphml("<graphml"), Err(GraphmlError::Xml(_))));
    }
}
