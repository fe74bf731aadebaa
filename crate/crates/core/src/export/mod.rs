//! DOT, GraphML and JSON views of an architecture model.
//!
//! JSON is the only lossless format and the one read back between stages. DOT
//! and GraphML are drawings of the model and drop provenance details.

mod dot;
mod graphml;
mod json;

use serde::{Deserialize, Serialize};

pub use dot::{quote_id, to_dot};
pub use graphml::{check_graphml, xml_escape, to_graphml, GraphmlError, GraphmlSummary};
pub use json::{from_json, to_json, JsonError};

use crate::model::ArchitectureModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Dot,
    Graphml,
    Json,
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Dot => "dot",
            ExportFormat::Graphml => "graphml",
            ExportFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DotMode {
    /// Components and operations are all plain nodes.
    Flat,
    /// Components are nested clusters holding their operations.
    #[default]
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExportOptions {
    pub format: ExportFormat,
    /// Ignored unless `format` is DOT.
    pub dot_mode: DotMode,
    pub include_dataflow: bool,
    pub include_weights: bool,
}

impl Default for ExportOptions {
    fn default() -> Self {
        Self {
            format: ExportFormat::Dot,
            dot_mode: DotMode::Grouped,
            include_dataflow: true,
            include_weights: true,
        }
    }
}

/// Renders `m` in the format selected by `options`.
pub fn export_model(m: &ArchitectureModel, options: &ExportOptions) -> String {
    match options.format {
        ExportFormat::Dot => to_dot(m, options),
        ExportFormat::Graphml => to_graphml(m),
        ExportFormat::Json => to_json(m),
    }
}
