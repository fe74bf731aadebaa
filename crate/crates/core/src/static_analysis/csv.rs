//! Tabular entity export: `entities.csv`, `calls.csv`, `dataflow.csv`.

use std::path::{Path, PathBuf};

use super::StaticError;
use crate::model::ArchitectureModel;

pub const ENTITIES_FILE: &str = "entities.csv";
pub const CALLS_FILE: &str = "calls.csv";
pub const DATAFLOW_FILE: &str = "dataflow.csv";

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, StaticError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> StaticError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    StaticError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Renders the three tables in canonical (model) order.
pub fn entity_tables(model: &ArchitectureModel) -> [(&'static str, Vec<Vec<String>>); 3] {
    let mut entities = vec![vec!["kind".into(), "qualified_name".into(), "owner".into(), "arity".into()]];
    for c in model.components() {
        entities.push(vec![
            c.kind.as_str().into(),
            c.name.to_string(),
            c.parent.as_ref().map(|p| p.to_string()).unwrap_or_default(),
            String::new(),
        ]);
    }
    for o in model.operations() {
        entities.push(vec![
            "operation".into(),
            o.signature.to_string(),
            o.owner.to_string(),
            o.arity.to_string(),
        ]);
    }
    let mut calls = vec![vec!["caller".into(), "callee".into(), "provenance".into(), "weight".into()]];
    for e in model.call_edges() {
        calls.push(vec![
            e.caller.to_string(),
            e.callee.to_string(),
            e.provenance.as_str().into(),
            e.weight.to_string(),
        ]);
    }
    let mut flows = vec![vec!["source".into(), "target".into(), "kind".into()]];
    for d in model.dataflow_edges() {
        flows.push(vec![d.source.to_string(), d.target.to_string(), d.kind.as_str().into()]);
    }
    [(ENTITIES_FILE, entities), (CALLS_FILE, calls), (DATAFLOW_FILE, flows)]
}

/// Writes the three CSV files into `out_dir`, which must exist.
pub fn export_entity_csv(model: &ArchitectureModel, out_dir: &Path) -> Result<Vec<PathBuf>, StaticError> {
    let mut written = Vec::new();
    for (name, rows) in entity_tables(model) {
        let path = out_dir.join(name);
        let mut w = writer(&path)?;
        for row in rows {
            w.write_record(&row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| StaticError::Io {
            path: path.clone(),
            source: e,
        })?;
        written.push(path);
    }
    Ok(written)
}
