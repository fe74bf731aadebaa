//! Stage orchestration: static analysis, trace ingest, merge, export and
//! layout, run in sequence with per-stage timing and a partial-failure policy.

mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{apply_override, ConfigError, PipelineConfig};

use crate::export::{export_model, to_json, ExportOptions};
use crate::layout::{build_grouped_graph, layout, render_svg, LayoutParams, SvgStyle};
use crate::merge::{merge_models, normalize_names, MergeError, NameRuleSet, NormalizeReport};
use crate::model::ArchitectureModel;
use crate::static_analysis::{analyze_project, export_entity_csv, StaticAnalysis, StaticError, CALLS_FILE, DATAFLOW_FILE, ENTITIES_FILE};
use crate::trace::{build_dynamic_model, ingest_logs, reconstruct_traces, FileMalformed, QuarantinedTrace, TraceError};

pub const STATIC_MODEL_FILE: &str = "static.json";
pub const DYNAMIC_MODEL_FILE: &str = "dynamic.json";
pub const MERGED_MODEL_FILE: &str = "merged.json";
pub const EXPORT_STEM: &str = "model";
pub const SVG_FILE: &str = "layout.svg";
pub const TIMING_FILE: &str = "timing.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Static,
    Ingest,
    Merge,
    Export,
    Layout,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Static, Stage::Ingest, Stage::Merge, Stage::Export, Stage::Layout];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Static => "static",
            Stage::Ingest => "ingest",
            Stage::Merge => "merge",
            Stage::Export => "export",
            Stage::Layout => "layout",
        }
    }
}

/// "Skipped" means the stage did not apply to this run, which is not an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Skipped { reason: String },
    Failed { error: String },
}

impl StageStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, StageStatus::Ok)
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, StageStatus::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    #[serde(flatten)]
    pub status: StageStatus,
    pub seconds: f64,
    pub counts: BTreeMap<String, usize>,
    /// File names inside the output directory.
    pub artifacts: Vec<String>,
}

impl StageRecord {
    fn skipped(reason: impl Into<String>) -> Self {
        StageRecord {
            status: StageStatus::Skipped { reason: reason.into() },
            seconds: 0.0,
            counts: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }
}

/// Wall-clock seconds and element counts per stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub stages: BTreeMap<Stage, StageRecord>,
    pub total_seconds: f64,
}

impl TimingReport {
    pub fn stage(&self, stage: Stage) -> &StageRecord {
        &self.stages[&stage]
    }

    /// Sorted-key JSON keyed by stage name plus `total`.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (stage, record) in &self.stages {
            map.insert(
                stage.as_str().into(),
                json!({
                    "status": status_name(&record.status),
                    "seconds": record.seconds,
                    "counts": record.counts,
                }),
            );
        }
        map.insert("total".into(), json!({ "seconds": self.total_seconds }));
        json_text(&Value::Object(map))
    }
}

fn status_name(s: &StageStatus) -> &'static str {
    match s {
        StageStatus::Ok => "ok",
        StageStatus::Skipped { .. } => "skipped",
        StageStatus::Failed { .. } => "failed",
    }
}

/// Pretty JSON with a trailing newline. Maps with string keys come out sorted
/// once converted to a `Value`.
pub fn json_text<T: Serialize>(v: &T) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(v)).expect("JSON values always serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success,
    StageFailure,
    UsageError,
    Partial,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::StageFailure => 1,
            ExitStatus::UsageError => 2,
            ExitStatus::Partial => 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn exit_status(&self) -> ExitStatus {
        match self {
            PipelineError::Config(_) => ExitStatus::UsageError,
            PipelineError::Io { .. } => ExitStatus::StageFailure,
        }
    }
}

/// Which model the export and layout stages worked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSource {
    Merged,
    Static,
    Dynamic,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub timing: TimingReport,
    pub exit: ExitStatus,
    pub exported: Option<ModelSource>,
}

impl RunOutcome {
    /// Stage failures in pipeline order, each prefixed by its stage name.
    pub fn diagnostics(&self) -> Vec<String> {
        self.timing
            .stages
            .iter()
            .filter_map(|(stage, r)| match &r.status {
                StageStatus::Failed { error } => Some(format!("{} stage failed: {error}", stage.as_str())),
                _ => None,
            })
            .collect()
    }
}

/// Writes `text` to `dir/name`.
pub fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<PathBuf, PipelineError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| PipelineError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

pub fn model_counts(m: &ArchitectureModel) -> BTreeMap<String, usize> {
    BTreeMap::from([
        ("components".to_string(), m.components().len()),
        ("operations".to_string(), m.operations().len()),
        ("call-edges".to_string(), m.call_edges().len()),
        ("dataflow-edges".to_string(), m.dataflow_edges().len()),
    ])
}

/// Static analysis plus its JSON and CSV artifacts.
pub fn static_stage(
    root: &Path,
    include: &[String],
    exclude: &[String],
    out_dir: &Path,
) -> Result<(StaticAnalysis, Vec<PathBuf>), StageFailure> {
    let analysis = analyze_project(root, include, exclude)?;
    let mut written = vec![write_artifact(out_dir, STATIC_MODEL_FILE, &to_json(&analysis.model))?];
    written.extend(export_entity_csv(&analysis.model, out_dir)?);
    Ok((analysis, written))
}

/// What trace ingest saw, for the run report.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub logs: usize,
    pub events: usize,
    pub malformed: Vec<FileMalformed>,
    pub traces: usize,
    pub quarantined: Vec<QuarantinedTrace>,
}

impl IngestReport {
    fn counts(&self) -> BTreeMap<String, usize> {
        BTreeMap::from([
            ("logs".to_string(), self.logs),
            ("events".to_string(), self.events),
            ("malformed-lines".to_string(), self.malformed.len()),
            ("traces".to_string(), self.traces),
            ("quarantined".to_string(), self.quarantined.len()),
        ])
    }
}

/// `dynamic:<file>` for a single log, `dynamic:<n> logs` otherwise.
pub fn dynamic_label(paths: &[PathBuf]) -> String {
    match paths {
        [one] => format!(
            "dynamic:{}",
            one.file_name().map_or_else(|| one.display().to_string(), |n| n.to_string_lossy().into_owned())
        ),
        _ => format!("dynamic:{} logs", paths.len()),
    }
}

/// Parses, replays and models a set of trace logs.
pub fn dynamic_from_logs(paths: &[PathBuf]) -> Result<(ArchitectureModel, IngestReport), TraceError> {
    let ingest = ingest_logs(paths)?;
    let events = ingest.events.len();
    let set = reconstruct_traces(ingest.events);
    let model = build_dynamic_model(&set, dynamic_label(paths));
    let report = IngestReport {
        logs: paths.len(),
        events,
        malformed: ingest.malformed,
        traces: set.traces.len(),
        quarantined: set.quarantined,
    };
    Ok((model, report))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub first: NormalizeReport,
    pub second: NormalizeReport,
}

/// Normalizes both models through `rules`, then merges them.
pub fn normalize_and_merge(
    a: &ArchitectureModel,
    b: &ArchitectureModel,
    rules: &NameRuleSet,
) -> Result<(ArchitectureModel, MergeReport), MergeError> {
    let (a, first) = normalize_names(a, rules)?;
    let (b, second) = normalize_names(b, rules)?;
    Ok((merge_models(&a, &b)?, MergeReport { first, second }))
}

/// Export in the configured format; returns the written path.
pub fn export_stage(m: &ArchitectureModel, options: &ExportOptions, out_dir: &Path) -> Result<PathBuf, PipelineError> {
    let name = format!("{EXPORT_STEM}.{}", options.format.extension());
    write_artifact(out_dir, &name, &export_model(m, options))
}

/// Layout and SVG render; returns the SVG text and element counts.
pub fn render_model(
    m: &ArchitectureModel,
    include_dataflow: bool,
    params: &LayoutParams,
    style: &SvgStyle,
) -> (String, BTreeMap<String, usize>) {
    let g = build_grouped_graph(m, include_dataflow);
    let r = layout(&g, params);
    let counts = BTreeMap::from([
        ("leaves".to_string(), g.leaves().len()),
        ("groups".to_string(), g.group_count() - 1),
        ("edges".to_string(), g.edges().len()),
        ("grid-fallbacks".to_string(), r.grid_fallbacks),
    ]);
    (render_svg(&g, &r, style), counts)
}

/// Any error a stage can hit, flattened to its message for the report.
#[derive(Debug, thiserror::Error)]
pub enum StageFailure {
    #[error(transparent)]
    Static(#[from] StaticError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

fn file_names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

/// Every file a run may write, so stale outputs of an earlier run never
/// survive a stage that fails this time.
fn all_artifacts() -> Vec<String> {
    let mut names: Vec<String> = [
        STATIC_MODEL_FILE,
        ENTITIES_FILE,
        CALLS_FILE,
        DATAFLOW_FILE,
        DYNAMIC_MODEL_FILE,
        MERGED_MODEL_FILE,
        SVG_FILE,
        TIMING_FILE,
        REPORT_FILE,
    ]
    .map(String::from)
    .to_vec();
    for ext in ["dot", "graphml", "json"] {
        names.push(format!("{EXPORT_STEM}.{ext}"));
    }
    names
}

struct Runner {
    records: BTreeMap<Stage, StageRecord>,
    report: serde_json::Map<String, Value>,
}

impl Runner {
    /// Times `body` and records its outcome; returns the value on success.
    fn stage<T>(
        &mut self,
        stage: Stage,
        body: impl FnOnce() -> Result<(T, BTreeMap<String, usize>, Vec<PathBuf>, Value), StageFailure>,
    ) -> Option<T> {
        log::info!("{} stage started", stage.as_str());
        let started = Instant::now();
        let outcome = body();
        let seconds = started.elapsed().as_secs_f64();
        let (record, value) = match outcome {
            Ok((value, counts, artifacts, detail)) => {
                if !detail.is_null() {
                    self.report.insert(stage.as_str().to_string(), detail);
                }
                let record = StageRecord {
                    status: StageStatus::Ok,
                    seconds,
                    counts,
                    artifacts: file_names(&artifacts),
                };
                (record, Some(value))
            }
            Err(e) => {
                log::error!("{} stage failed: {e}", stage.as_str());
                let record = StageRecord {
                    status: StageStatus::Failed { error: e.to_string() },
                    seconds,
                    counts: BTreeMap::new(),
                    artifacts: Vec::new(),
                };
                (record, None)
            }
        };
        log::info!("{} stage finished in {seconds:.3} s", stage.as_str());
        self.records.insert(stage, record);
        value
    }

    fn skip(&mut self, stage: Stage, reason: &str) {
        log::info!("{} stage skipped: {reason}", stage.as_str());
        self.records.insert(stage, StageRecord::skipped(reason));
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types always serialize")
}

/// Runs every applicable stage and writes `timing.json` and `report.json`.
///
/// A failed stage stops the stages that need its output. When the merge fails,
/// or only one input model exists, export and layout run on the surviving
/// model, preferring the static one. The exit status is `Partial` when some
/// stage failed but an export or layout was still produced.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let out_dir = cfg.out_dir.as_path();
    std::fs::create_dir_all(out_dir).map_err(|e| {
        ConfigError::Invalid(format!("output directory {} is not writable: {e}", out_dir.display()))
    })?;
    for name in all_artifacts() {
        let path = out_dir.join(name);
        if path.is_file() {
            std::fs::remove_file(&path).map_err(|source| PipelineError::Io { path, source })?;
        }
    }

    let started = Instant::now();
    let mut run = Runner {
        records: BTreeMap::new(),
        report: serde_json::Map::new(),
    };

    let static_model = match &cfg.project_root {
        None => {
            run.skip(Stage::Static, "no project root configured");
            None
        }
        Some(root) => run.stage(Stage::Static, || {
            let (analysis, written) = static_stage(root, &cfg.include, &cfg.exclude, out_dir)?;
            let mut counts = model_counts(&analysis.model);
            counts.insert("files-scanned".into(), analysis.report.files_scanned);
            counts.insert("files-parsed".into(), analysis.report.files_parsed);
            let detail = to_value(&analysis.report);
            Ok((analysis.model, counts, written, detail))
        }),
    };

    let dynamic_model = if cfg.trace_logs.is_empty() {
        run.skip(Stage::Ingest, "no trace logs configured");
        None
    } else {
        run.stage(Stage::Ingest, || {
            let (model, report) = dynamic_from_logs(&cfg.trace_logs)?;
            let written = write_artifact(out_dir, DYNAMIC_MODEL_FILE, &to_json(&model))?;
            let mut counts = model_counts(&model);
            counts.extend(report.counts());
            Ok((model, counts, vec![written], to_value(&report)))
        })
    };

    let merged = match (&static_model, &dynamic_model) {
        (Some(s), Some(d)) => run.stage(Stage::Merge, || {
            let (model, report) = normalize_and_merge(s, d, &cfg.name_rules)?;
            let written = write_artifact(out_dir, MERGED_MODEL_FILE, &to_json(&model))?;
            let counts = model_counts(&model);
            Ok((model, counts, vec![written], to_value(&report)))
        }),
        _ => {
            run.skip(Stage::Merge, "needs both a static and a dynamic model");
            None
        }
    };

    let surviving = merged
        .map(|m| (ModelSource::Merged, m))
        .or_else(|| static_model.map(|m| (ModelSource::Static, m)))
        .or_else(|| dynamic_model.map(|m| (ModelSource::Dynamic, m)));
    run.report.insert("exported-model".into(), to_value(&surviving.as_ref().map(|(s, _)| *s)));

    match &surviving {
        None => {
            run.skip(Stage::Export, "no model survived the earlier stages");
            run.skip(Stage::Layout, "no model survived the earlier stages");
        }
        Some((_, model)) => {
            run.stage(Stage::Export, || {
                let written = export_stage(model, &cfg.export, out_dir)?;
                Ok(((), model_counts(model), vec![written], Value::Null))
            });
            run.stage(Stage::Layout, || {
                let (svg, counts) = render_model(model, cfg.export.include_dataflow, &cfg.layout, &SvgStyle::default());
                let written = write_artifact(out_dir, SVG_FILE, &svg)?;
                Ok(((), counts, vec![written], Value::Null))
            });
        }
    }

    let timing = TimingReport {
        total_seconds: started.elapsed().as_secs_f64(),
        stages: run.records,
    };
    let failed = timing.stages.values().any(|r| r.status.is_failed());
    let produced = timing.stage(Stage::Export).status.is_ok() || timing.stage(Stage::Layout).status.is_ok();
    let exit = match (failed, produced) {
        (false, _) => ExitStatus::Success,
        (true, true) => ExitStatus::Partial,
        (true, false) => ExitStatus::StageFailure,
    };

    // The report holds no durations so that repeated runs stay byte-identical.
    let stages: serde_json::Map<String, Value> = timing
        .stages
        .iter()
        .map(|(stage, r)| {
            let mut v = to_value(&r.status);
            v["counts"] = to_value(&r.counts);
            v["artifacts"] = to_value(&r.artifacts);
            (stage.as_str().to_string(), v)
        })
        .collect();
    run.report.insert("stages".into(), Value::Object(stages));
    run.report.insert("exit-code".into(), json!(exit.code()));
    write_artifact(out_dir, REPORT_FILE, &json_text(&Value::Object(run.report)))?;
    write_artifact(out_dir, TIMING_FILE, &timing.to_json())?;

    Ok(RunOutcome {
        timing,
        exit,
        exported: surviving.map(|(s, _)| s),
    })
}
