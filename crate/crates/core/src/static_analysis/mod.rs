//! Static extraction of components, operations, calls and dataflow from Python
//! sources.

mod csv;
mod dataflow;
mod extract;
mod parse;
mod resolve;
mod scan;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use self::csv::{entity_tables, export_entity_csv, CALLS_FILE, DATAFLOW_FILE, ENTITIES_FILE};
pub use dataflow::extract_dataflow;
pub use extract::{
    extract_call_sites, extract_entities, extract_module, Callee, ClassDef, EntityTable, FunctionDef, HeadScope,
    ImportBinding, ImportKind, ModuleFacts, RawCallSite, SiteContext,
};
pub use parse::{parse_source, parse_text, ParsedModule, SyntaxDiagnostic};
pub use resolve::{
    is_builtin, resolve_calls, Resolution, ResolutionStep, SiteResolution, UnresolvedCall, UnresolvedReason,
};
pub use scan::{scan_project, SourceFile, SourceSet, SOURCE_SUFFIX};

use crate::model::{ArchitectureModel, Component, ComponentKind, ModelBuilder, Operation, Provenance, QualifiedName, WeightRule};

#[derive(Debug, thiserror::Error)]
pub enum StaticError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: not a directory", .0.display())]
    NotADirectory(PathBuf),
    #[error("invalid glob {pattern:?}: {message}")]
    Glob { pattern: String, message: String },
}

/// Operation dropped because its name collides with a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedOperation {
    pub signature: QualifiedName,
    pub reason: String,
}

/// Diagnostics of a static run. Everything here is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StaticReport {
    pub files_scanned: usize,
    pub files_parsed: usize,
    pub syntax_errors: Vec<SyntaxDiagnostic>,
    pub warnings: Vec<String>,
    pub call_sites: usize,
    pub resolved_sites: usize,
    pub unresolved: Vec<UnresolvedCall>,
    /// Calls at module or class-body level, which have no calling operation.
    pub unattributed_calls: usize,
    pub skipped_dataflows: usize,
    pub dropped_operations: Vec<DroppedOperation>,
}

#[derive(Debug, Clone)]
pub struct StaticAnalysis {
    pub model: ArchitectureModel,
    pub tables: Vec<EntityTable>,
    pub report: StaticReport,
}

fn label_for(root: &Path) -> String {
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| root.display().to_string());
    format!("static:{name}")
}

/// Parses and extracts every file concurrently, then reduces in module order.
pub fn build_static_model(sources: &SourceSet) -> StaticAnalysis {
    let parsed: Vec<Result<ModuleFacts, SyntaxDiagnostic>> = sources
        .files
        .par_iter()
        .map(|file| parse_source(&sources.root, file.clone()).map(|m| extract_module(&m)))
        .collect();

    let mut report = StaticReport {
        files_scanned: sources.files.len(),
        warnings: sources.warnings.clone(),
        ..StaticReport::default()
    };
    let mut tables = Vec::new();
    let mut sites = Vec::new();
    for outcome in parsed {
        match outcome {
            Ok(facts) => {
                report.files_parsed += 1;
                report.unattributed_calls += facts.unattributed_calls;
                report.warnings.extend(facts.entities.warnings.iter().cloned());
                tables.push(facts.entities);
                sites.extend(facts.sites);
            }
            Err(diag) => {
                log::warn!("skipping {diag}");
                report.syntax_errors.push(diag);
            }
        }
    }

    let mut builder = ModelBuilder::new(label_for(&sources.root));
    let st = Provenance::Static;

    // Packages, including namespace directories without an initializer.
    let mut components: BTreeSet<(QualifiedName, ComponentKind)> = BTreeSet::new();
    for file in &sources.files {
        for ancestor in file.module.ancestors() {
            if ancestor != file.module {
                components.insert((ancestor, ComponentKind::Package));
            }
        }
    }
    for t in &tables {
        let kind = if t.is_package {
            ComponentKind::Package
        } else {
            ComponentKind::Module
        };
        components.insert((t.module_name().clone(), kind));
    }
    for (name, kind) in components {
        // A plain module that also has submodules stays a module.
        if kind == ComponentKind::Package && builder.has_component(&name) {
            continue;
        }
        let parent = name.parent();
        builder.add_component(Component::new(name, kind, parent, st));
    }
    for t in &tables {
        for c in &t.classes {
            builder.add_component(Component::new(c.name.clone(), ComponentKind::Class, Some(c.parent.clone()), st));
        }
    }

    let mut dropped: BTreeSet<QualifiedName> = BTreeSet::new();
    for t in &tables {
        for f in &t.functions {
            if builder.has_component(&f.signature) {
                report.dropped_operations.push(DroppedOperation {
                    signature: f.signature.clone(),
                    reason: "name-clash".into(),
                });
                dropped.insert(f.signature.clone());
                continue;
            }
            builder.add_operation(Operation::new(f.signature.clone(), f.owner.clone(), f.arity, st));
        }
    }

    let resolution = resolve_calls(&tables, &sites);
    report.call_sites = sites.len();
    report.resolved_sites = resolution
        .per_site
        .iter()
        .filter(|r| matches!(r, SiteResolution::Resolved { .. }))
        .count();
    report.unresolved = resolution.unresolved.clone();
    for e in &resolution.edges {
        if !dropped.contains(&e.caller) && !dropped.contains(&e.callee) {
            builder.add_call(e.clone(), WeightRule::Max);
        }
    }
    let (flows, skipped) = extract_dataflow(&sites, &resolution);
    report.skipped_dataflows = skipped;
    for d in flows {
        if !dropped.contains(&d.source) && !dropped.contains(&d.target) {
            builder.add_dataflow(d);
        }
    }

    StaticAnalysis {
        model: builder.build(),
        tables,
        report,
    }
}

/// Scans `root` and builds its static model.
pub fn analyze_project(root: &Path, include: &[String], exclude: &[String]) -> Result<StaticAnalysis, StaticError> {
    let sources = scan_project(root, include, exclude)?;
    Ok(build_static_model(&sources))
}
