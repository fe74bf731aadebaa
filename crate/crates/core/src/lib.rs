//! Architecture recovery for Python codebases.
//!
//! The crate is organised as a chain of stages that exchange
//! [`ArchitectureModel`](model::ArchitectureModel) values:
//!
//! - [`static_analysis`] parses source trees and resolves calls and dataflow,
//! - [`trace`] replays execution-trace logs into a dynamic model,
//! - [`merge`] reconciles names and combines or compares models,
//! - [`export`] writes DOT, GraphML and JSON views,
//! - [`layout`] computes a grouped force-directed layout and renders SVG,
//! - [`pipeline`] wires the stages together with timing and failure policy.

pub mod export;
pub mod layout;
pub mod merge;
pub mod model;
pub mod pipeline;
pub mod static_analysis;
pub mod trace;

pub use model::{ArchitectureModel, QualifiedName};
