use serde::{Deserialize, Serialize};

use crate::model::{ArchitectureModel, CallEdge, Component, DataflowEdge, Operation, ValidationReport};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    label: String,
    components: Vec<Component>,
    operations: Vec<Operation>,
    call_edges: Vec<CallEdge>,
    dataflow_edges: Vec<DataflowEdge>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum JsonError {
    #[error("malformed model document at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("model document violates invariants: {0}")]
    Invalid(ValidationReport),
}

/// Canonical JSON: sorted keys, two-space indentation, trailing newline.
pub fn to_json(m: &ArchitectureModel) -> String {
    let (label, components, operations, call_edges, dataflow_edges) = m.clone().into_parts();
    let doc = ModelDocument {
        label,
        components,
        operations,
        call_edges,
        dataflow_edges,
    };
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(&doc).expect("model values always serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Reads a model written by [`to_json`] and checks its invariants.
pub fn from_json(text: &str) -> Result<ArchitectureModel, JsonError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ModelDocument = serde_path_to_error::deserialize(de).map_err(|e| JsonError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let m = ArchitectureModel::from_parts(
        doc.label,
        doc.components,
        doc.operations,
        doc.call_edges,
        doc.dataflow_edges,
    );
    ValidationReport::check(&m).map_err(JsonError::Invalid)?;
    Ok(m)
}
