//! Reader for the DOT language, keeping only what a grouped graph needs.
//!
//! `cluster*` subgraphs become groups and every node becomes a leaf of the
//! innermost cluster it is mentioned in. Edge `weight` is kept, and an edge is
//! a dataflow edge when its `kind` is `dataflow` or its style is dashed. All
//! other attributes are parsed and dropped.

use std::collections::{BTreeMap, VecDeque};

use super::graph::{EdgeKind, GraphError, GroupedGraph};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct DotError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// Identifier text and whether it was quoted (quoted ids are never keywords).
    Id(String, bool),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Colon,
    Eq,
    Arrow,
    Line,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
    at_line_start: bool,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
            at_line_start: true,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
            self.at_line_start = true;
        } else {
            self.column += 1;
            if !c.is_whitespace() {
                self.at_line_start = false;
            }
        }
        Some(c)
    }

    fn error<T>(&self, line: usize, column: usize, message: impl Into<String>) -> Result<T, DotError> {
        Err(DotError {
            line,
            column,
            message: message.into(),
        })
    }

    fn skip_trivia(&mut self) -> Result<(), DotError> {
        loop {
            match self.chars.peek().copied() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') if self.at_line_start => {
                    while self.chars.peek().is_some_and(|&c| c != '\n') {
                        self.bump();
                    }
                }
                Some('/') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    match ahead.peek() {
                        Some('/') => {
                            while self.chars.peek().is_some_and(|&c| c != '\n') {
                                self.bump();
                            }
                        }
                        Some('*') => {
                            let (line, column) = (self.line, self.column);
                            self.bump();
                            self.bump();
                            let mut prev = ' ';
                            loop {
                                match self.bump() {
                                    None => return self.error(line, column, "unterminated comment"),
                                    Some('/') if prev == '*' => break,
                                    Some(c) => prev = c,
                                }
                            }
                        }
                        _ => return Ok(()),
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn quoted(&mut self, line: usize, column: usize) -> Result<String, DotError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.error(line, column, "unterminated string"),
                Some('"') => return Ok(out),
                Some('\\') => match self.chars.peek().copied() {
                    Some('"') => {
                        self.bump();
                        out.push('"');
                    }
                    Some('\n') => {
                        self.bump();
                    }
                    Some('\r') => {
                        self.bump();
                        if self.chars.peek() == Some(&'\n') {
                            self.bump();
                        }
                    }
                    Some('\\') => {
                        self.bump();
                        out.push_str("\\\\");
                    }
                    _ => out.push('\\'),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn html(&mut self, line: usize, column: usize) -> Result<String, DotError> {
        let mut depth = 1usize;
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return self.error(line, column, "unterminated HTML string"),
                Some('<') => {
                    depth += 1;
                    out.push('<');
                }
                Some('>') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(out);
                    }
                    out.push('>');
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn next(&mut self) -> Result<Token, DotError> {
        self.skip_trivia()?;
        let (line, column) = (self.line, self.column);
        let tok = |tok| Ok(Token { tok, line, column });
        let Some(c) = self.bump() else {
            return tok(Tok::Eof);
        };
        match c {
            '{' => tok(Tok::LBrace),
            '}' => tok(Tok::RBrace),
            '[' => tok(Tok::LBracket),
            ']' => tok(Tok::RBracket),
            ';' => tok(Tok::Semi),
            ',' => tok(Tok::Comma),
            ':' => tok(Tok::Colon),
            '=' => tok(Tok::Eq),
            '"' => {
                let mut text = self.quoted(line, column)?;
                // "a" + "b" concatenation
                loop {
                    self.skip_trivia()?;
                    if self.chars.peek() != Some(&'+') {
                        break;
                    }
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    while ahead.peek().is_some_and(|c| c.is_whitespace()) {
                        ahead.next();
                    }
                    if ahead.peek() != Some(&'"') {
                        break;
                    }
                    self.bump();
                    self.skip_trivia()?;
                    let (l, c) = (self.line, self.column);
                    self.bump();
                    text.push_str(&self.quoted(l, c)?);
                }
                tok(Tok::Id(text, true))
            }
            '<' => {
                let text = self.html(line, column)?;
                tok(Tok::Id(text, true))
            }
            '-' if self.chars.peek() == Some(&'>') => {
                self.bump();
                tok(Tok::Arrow)
            }
            '-' if self.chars.peek() == Some(&'-') => {
                self.bump();
                tok(Tok::Line)
            }
            c if c == '-' || c == '.' || c.is_ascii_digit() => {
                let mut text = String::from(c);
                while let Some(&d) = self.chars.peek() {
                    if d.is_ascii_digit() || d == '.' {
                        text.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                let valid = {
                    let body = text.strip_prefix('-').unwrap_or(&text);
                    body.matches('.').count() <= 1 && body.chars().any(|d| d.is_ascii_digit())
                };
                if !valid {
                    return self.error(line, column, format!("malformed numeral {text:?}"));
                }
                if self.chars.peek().is_some_and(|&d| d.is_alphabetic() || d == '_') {
                    return self.error(line, column, format!("identifier may not start with numeral {text:?}"));
                }
                tok(Tok::Id(text, false))
            }
            c if c.is_alphabetic() || c == '_' || !c.is_ascii() => {
                let mut text = String::from(c);
                while let Some(&d) = self.chars.peek() {
                    if d.is_alphanumeric() || d == '_' || !d.is_ascii() {
                        text.push(d);
                        self.bump();
                    } else {
                        break;
                    }
                }
                tok(Tok::Id(text, false))
            }
            other => self.error(line, column, format!("unexpected character {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct EdgeDefaults {
    kind: Option<String>,
    style: Option<String>,
    weight: Option<String>,
}

impl EdgeDefaults {
    fn apply(&mut self, attrs: &[(String, String)]) {
        for (k, v) in attrs {
            match k.as_str() {
                "kind" => self.kind = Some(v.clone()),
                "style" => self.style = Some(v.clone()),
                "weight" => self.weight = Some(v.clone()),
                _ => {}
            }
        }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    ahead: VecDeque<Token>,
    directed: bool,
    /// `(id, parent)` with `None` for the root; indices are group handles.
    groups: Vec<(String, Option<usize>)>,
    group_ids: BTreeMap<String, usize>,
    leaves: BTreeMap<String, Option<usize>>,
    edges: Vec<(String, String, EdgeKind, u64)>,
    anonymous_clusters: usize,
}

fn keyword(t: &Tok, word: &str) -> bool {
    matches!(t, Tok::Id(s, false) if s.eq_ignore_ascii_case(word))
}

impl<'a> Parser<'a> {
    fn peek_at(&mut self, n: usize) -> Result<&Token, DotError> {
        while self.ahead.len() <= n {
            let t = self.lexer.next()?;
            self.ahead.push_back(t);
        }
        Ok(&self.ahead[n])
    }

    fn peek(&mut self) -> Result<&Token, DotError> {
        self.peek_at(0)
    }

    fn next(&mut self) -> Result<Token, DotError> {
        match self.ahead.pop_front() {
            Some(t) => Ok(t),
            None => self.lexer.next(),
        }
    }

    fn fail<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, DotError> {
        Err(DotError {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, DotError> {
        let t = self.next()?;
        if t.tok != want {
            return self.fail(&t, format!("expected {what}, found {:?}", t.tok));
        }
        Ok(t)
    }

    fn id(&mut self, what: &str) -> Result<String, DotError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Id(s, _) => Ok(s.clone()),
            other => self.fail(&t, format!("expected {what}, found {other:?}")),
        }
    }

    fn eat(&mut self, want: &Tok) -> Result<bool, DotError> {
        if &self.peek()?.tok == want {
            self.next()?;
            return Ok(true);
        }
        Ok(false)
    }

    fn is_descendant(&self, mut g: Option<usize>, ancestor: Option<usize>) -> bool {
        while g != ancestor {
            match g {
                None => return false,
                Some(i) => g = self.groups[i].1,
            }
        }
        true
    }

    fn mention(&mut self, node: &str, cluster: Option<usize>) {
        match self.leaves.get(node).copied() {
            None => {
                self.leaves.insert(node.to_string(), cluster);
            }
            Some(current) if current != cluster && self.is_descendant(cluster, current) => {
                self.leaves.insert(node.to_string(), cluster);
            }
            Some(_) => {}
        }
    }

    fn attr_lists(&mut self) -> Result<Vec<(String, String)>, DotError> {
        let mut out = Vec::new();
        while self.eat(&Tok::LBracket)? {
            loop {
                if self.eat(&Tok::RBracket)? {
                    break;
                }
                let key = self.id("attribute name")?;
                self.expect(Tok::Eq, "'='")?;
                let value = self.id("attribute value")?;
                out.push((key, value));
                if !self.eat(&Tok::Comma)? {
                    self.eat(&Tok::Semi)?;
                }
            }
        }
        Ok(out)
    }

    fn port(&mut self) -> Result<(), DotError> {
        if self.eat(&Tok::Colon)? {
            self.id("port")?;
            if self.eat(&Tok::Colon)? {
                self.id("compass point")?;
            }
        }
        Ok(())
    }

    fn open_cluster(&mut self, name: Option<String>, parent: Option<usize>, at: &Token) -> Result<Option<usize>, DotError> {
        let Some(name) = name.filter(|n| n.starts_with("cluster")) else {
            return Ok(parent);
        };
        let mut id = name["cluster".len()..].trim_start_matches('_').to_string();
        if id.is_empty() {
            self.anonymous_clusters += 1;
            id = format!("cluster#{}", self.anonymous_clusters);
        }
        if let Some(&g) = self.group_ids.get(&id) {
            if self.groups[g].1 != parent {
                return self.fail(at, format!("cluster {id:?} reopened under a different parent"));
            }
            return Ok(Some(g));
        }
        self.groups.push((id.clone(), parent));
        let g = self.groups.len() - 1;
        self.group_ids.insert(id, g);
        Ok(Some(g))
    }

    /// `[subgraph [id]] { stmts }`; returns the nodes mentioned inside.
    fn subgraph(&mut self, cluster: Option<usize>, defaults: &EdgeDefaults) -> Result<Vec<String>, DotError> {
        let start = self.peek()?.clone();
        let name = if keyword(&start.tok, "subgraph") {
            self.next()?;
            match self.peek()?.tok.clone() {
                Tok::Id(s, _) => {
                    self.next()?;
                    Some(s)
                }
                _ => None,
            }
        } else {
            None
        };
        let inner = self.open_cluster(name, cluster, &start)?;
        self.expect(Tok::LBrace, "'{'")?;
        let nodes = self.stmt_list(inner, defaults.clone())?;
        self.expect(Tok::RBrace, "'}'")?;
        Ok(nodes)
    }

    fn endpoint(&mut self, cluster: Option<usize>, defaults: &EdgeDefaults) -> Result<Vec<String>, DotError> {
        let t = self.peek()?.clone();
        if t.tok == Tok::LBrace || keyword(&t.tok, "subgraph") {
            return self.subgraph(cluster, defaults);
        }
        let id = self.id("node id")?;
        self.port()?;
        self.mention(&id, cluster);
        Ok(vec![id])
    }

    fn stmt_list(&mut self, cluster: Option<usize>, mut defaults: EdgeDefaults) -> Result<Vec<String>, DotError> {
        let mut mentioned = Vec::new();
        loop {
            let t = self.peek()?.clone();
            match &t.tok {
                Tok::RBrace | Tok::Eof => return Ok(mentioned),
                Tok::Semi => {
                    self.next()?;
                    continue;
                }
                _ => {}
            }
            if keyword(&t.tok, "graph") || keyword(&t.tok, "node") || keyword(&t.tok, "edge") {
                self.next()?;
                let attrs = self.attr_lists()?;
                if keyword(&t.tok, "edge") {
                    defaults.apply(&attrs);
                }
                continue;
            }
            if matches!(t.tok, Tok::Id(..)) && !keyword(&t.tok, "subgraph") && self.peek_at(1)?.tok == Tok::Eq {
                // `a = b` graph attribute
                self.next()?;
                self.next()?;
                self.id("attribute value")?;
                continue;
            }
            let mut ends = vec![self.endpoint(cluster, &defaults)?];
            mentioned.extend(ends[0].iter().cloned());
            loop {
                let op = self.peek()?.clone();
                match op.tok {
                    Tok::Arrow if !self.directed => return self.fail(&op, "'->' in an undirected graph"),
                    Tok::Line if self.directed => return self.fail(&op, "'--' in a directed graph"),
                    Tok::Arrow | Tok::Line => {
                        self.next()?;
                        let e = self.endpoint(cluster, &defaults)?;
                        mentioned.extend(e.iter().cloned());
                        ends.push(e);
                    }
                    _ => break,
                }
            }
            let attr_tok = self.peek()?.clone();
            let attrs = self.attr_lists()?;
            if ends.len() > 1 {
                let mut eff = defaults.clone();
                eff.apply(&attrs);
                let kind = match eff.kind.as_deref() {
                    Some("dataflow") => EdgeKind::Dataflow,
                    Some("call") => EdgeKind::Call,
                    _ if eff.style.as_deref().is_some_and(|s| s.contains("dashed")) => EdgeKind::Dataflow,
                    _ => EdgeKind::Call,
                };
                let weight = match eff.weight.as_deref() {
                    None => 1,
                    Some(w) => match w.parse::<f64>() {
                        Ok(v) if v.is_finite() && v >= 0.0 => v.round() as u64,
                        _ => return self.fail(&attr_tok, format!("weight {w:?} is not a non-negative number")),
                    },
                };
                for pair in ends.windows(2) {
                    for a in &pair[0] {
                        for b in &pair[1] {
                            self.edges.push((a.clone(), b.clone(), kind, weight));
                        }
                    }
                }
            }
        }
    }

}

/// Parses DOT text into a grouped graph.
pub fn read_dot(text: &str) -> Result<GroupedGraph, DotError> {
    let mut p = Parser {
        lexer: Lexer::new(text),
        ahead: VecDeque::new(),
        directed: true,
        groups: Vec::new(),
        group_ids: BTreeMap::new(),
        leaves: BTreeMap::new(),
        edges: Vec::new(),
        anonymous_clusters: 0,
    };
    let mut t = p.next()?;
    if keyword(&t.tok, "strict") {
        t = p.next()?;
    }
    p.directed = if keyword(&t.tok, "digraph") {
        true
    } else if keyword(&t.tok, "graph") {
        false
    } else {
        return p.fail(&t, "expected 'graph' or 'digraph'");
    };
    if let Tok::Id(..) = p.peek()?.tok {
        p.next()?;
    }
    p.expect(Tok::LBrace, "'{'")?;
    p.stmt_list(None, EdgeDefaults::default())?;
    p.expect(Tok::RBrace, "'}'")?;
    let end = p.next()?;
    if end.tok != Tok::Eof {
        return p.fail(&end, "text after the closing brace");
    }

    let name = |g: Option<usize>, groups: &[(String, Option<usize>)]| g.map(|i| groups[i].0.clone());
    let groups = p.groups.iter().map(|(id, parent)| (id.clone(), name(*parent, &p.groups))).collect();
    let leaves = p.leaves.iter().map(|(id, g)| (id.clone(), name(*g, &p.groups))).collect();
    GroupedGraph::from_parts(groups, leaves, p.edges).map_err(|e: GraphError| DotError {
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::graph::ROOT;

    #[test]
    fn empty_digraph() {
        assert!(read_dot("digraph G { }").unwrap().is_empty());
        assert!(read_dot("strict graph { }").unwrap().is_empty());
    }

    #[test]
    fn nested_clusters_two_deep() {
        let g = read_dot(
            r#"digraph G {
                subgraph cluster_a { x; subgraph "cluster_a.b" { y } }
                x -> y [weight=3];
            }"#,
        )
        .unwrap();
        assert_eq!(g.depth(), 2);
        let b = g.group_index("a.b").unwrap();
        assert_eq!(g.leaves()[g.leaf_index("y").unwrap()].group, b);
        assert_eq!(g.edges()[0].weight, 3);
    }

    #[test]
    fn chains_subgraph_endpoints_and_defaults() {
        let g = read_dot(
            "digraph { edge [style=dashed]; a -> b -> {c d} [weight=2]; e -> a [style=solid] }",
        )
        .unwrap();
        assert_eq!(g.edges().len(), 4);
        let kinds: Vec<EdgeKind> = g.edges().iter().map(|e| e.kind).collect();
        assert_eq!(kinds.iter().filter(|k| **k == EdgeKind::Dataflow).count(), 3);
        assert!(g.leaves().iter().all(|l| l.group == ROOT));
    }

    #[test]
    fn comments_ports_html_and_concatenation() {
        let text = "# generated\n/* block */ digraph { // line\n \"a\" + \"b\":p:n -> <c<i>x</i>>; rankdir=LR; n [label=\"x\\\"y\"] }";
        let g = read_dot(text).unwrap();
        let ids: Vec<&str> = g.leaves().iter().map(|l| l.id.as_str()).collect();
        assert_eq!(ids, ["ab", "c<i>x</i>", "n"]);
    }

    #[test]
    fn node_moves_into_cluster_declared_later() {
        let g = read_dot("digraph { a -> b; subgraph cluster_k { a } }").unwrap();
        assert_eq!(g.leaves()[0].group, g.group_index("k").unwrap());
        assert_eq!(g.leaves()[1].group, ROOT);
    }

    #[test]
    fn errors_carry_positions() {
        let e = read_dot("digraph {\n  a -> ;\n}").unwrap_err();
        assert_eq!((e.line, e.column), (2, 8));
        let e = read_dot("graph { a -> b }").unwrap_err();
        assert!(e.message.contains("undirected"), "{e}");
        assert!(read_dot("digraph { a [x=] }").is_err());
        assert!(read_dot("digraph { \"open }").is_err());
        assert!(read_dot("digraph { } extra").is_err());
        assert!(read_dot("digraph { a -> b [weight=-1] }").is_err());
    }
}
