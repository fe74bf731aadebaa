//! `pyarch`: recover the architecture of a Python code base from its sources
//! and execution traces, then export and draw it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pyarch_core::export::{export_model, from_json, ExportFormat};
use pyarch_core::layout::{build_grouped_graph, layout, read_dot, render_svg, GroupedGraph, SvgStyle};
use pyarch_core::merge::compare_models;
use pyarch_core::model::ArchitectureModel;
use pyarch_core::pipeline::{
    dynamic_from_logs, json_text, normalize_and_merge, run_pipeline, static_stage, write_artifact, ConfigError,
    ExitStatus, PipelineConfig, PipelineError, StageFailure, DYNAMIC_MODEL_FILE, EXPORT_STEM, MERGED_MODEL_FILE,
    SVG_FILE,
};
use pyarch_core::static_analysis::StaticError;
use pyarch_core::trace::TraceError;

#[derive(Parser)]
#[command(name = "pyarch", version, about = "Architecture recovery for Python code bases")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory for all written artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Layout random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// More logging; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Overrides a configuration key, e.g. `--set layout.gravity=0.05`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Static model of a source tree: static.json, CSV tables and a report.
    Static {
        root: Option<PathBuf>,
        #[arg(long)]
        include: Vec<String>,
        #[arg(long)]
        exclude: Vec<String>,
    },
    /// Dynamic model of one or more `.trace` logs.
    Dynamic { logs: Vec<PathBuf> },
    /// Normalizes two models with the configured name rules and merges them.
    Merge { first: PathBuf, second: PathBuf },
    /// Lists elements found in only one of two models, or in both.
    Compare { first: PathBuf, second: PathBuf },
    /// Writes a model as DOT, GraphML or JSON.
    Export {
        model: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Plain DOT without cluster subgraphs.
        #[arg(long)]
        flat: bool,
        #[arg(long)]
        no_dataflow: bool,
        #[arg(long)]
        no_weights: bool,
        /// Output file (default: model.<ext> in the output directory).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Grouped force-directed layout of a DOT file or model JSON, drawn as SVG.
    Layout {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        no_labels: bool,
        #[arg(long)]
        font_size: Option<f64>,
        #[arg(long)]
        edge_width: Option<f64>,
        /// Leave dataflow edges out when the input is a model.
        #[arg(long)]
        no_dataflow: bool,
    },
    /// Every stage in order, with timing.json and report.json.
    Run {
        #[arg(long)]
        root: Option<PathBuf>,
        #[arg(long = "trace")]
        traces: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Graphml,
    Json,
}

impl From<FormatArg> for ExportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Dot => ExportFormat::Dot,
            FormatArg::Graphml => ExportFormat::Graphml,
            FormatArg::Json => ExportFormat::Json,
        }
    }
}

/// A message for stderr and the process exit status.
struct Failure {
    status: ExitStatus,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: ExitStatus::UsageError,
            message: message.into(),
        }
    }

    fn stage(message: impl Into<String>) -> Self {
        Failure {
            status: ExitStatus::StageFailure,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure {
            status: e.exit_status(),
            message: e.to_string(),
        }
    }
}

/// Unreadable or missing inputs are usage errors; bad content is a stage failure.
impl From<StageFailure> for Failure {
    fn from(e: StageFailure) -> Self {
        match e {
            StageFailure::Static(StaticError::Io { .. } | StaticError::NotADirectory(_))
            | StageFailure::Trace(TraceError::Io { .. }) => Failure::usage(e.to_string()),
            StageFailure::Pipeline(e) => e.into(),
            _ => Failure::stage(e.to_string()),
        }
    }
}

fn load_config(global: &Global) -> Result<PipelineConfig, Failure> {
    let mut cfg = PipelineConfig::load(global.config.as_deref(), &global.overrides)?;
    if let Some(dir) = &global.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = global.seed {
        cfg.layout.rng_seed = seed;
    }
    cfg.layout
        .validate()
        .map_err(|e| Failure::usage(format!("invalid configuration: layout.{}: {}", e.name, e.detail)))?;
    Ok(cfg)
}

fn out_dir(cfg: &PipelineConfig) -> Result<&Path, Failure> {
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| Failure::usage(format!("{}: {e}", cfg.out_dir.display())))?;
    Ok(&cfg.out_dir)
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<ArchitectureModel, Failure> {
    from_json(&read_input(path)?).map_err(|e| Failure::stage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::stage(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<ExitStatus, Failure> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Static { root, include, exclude } => {
            let root = root
                .or_else(|| cfg.project_root.clone())
                .ok_or_else(|| Failure::usage("no project root given"))?;
            let include = if include.is_empty() { cfg.include.clone() } else { include };
            let exclude = if exclude.is_empty() { cfg.exclude.clone() } else { exclude };
            let dir = out_dir(&cfg)?;
            let (analysis, _) = static_stage(&root, &include, &exclude, dir)?;
            for e in &analysis.report.syntax_errors {
                log::warn!("{}:{}: {}", e.path.display(), e.line, e.message);
            }
            write_artifact(dir, "static-report.json", &json_text(&analysis.report))?;
        }
        Command::Dynamic { logs } => {
            let logs = if logs.is_empty() { cfg.trace_logs.clone() } else { logs };
            let dir = out_dir(&cfg)?;
            let (model, report) = dynamic_from_logs(&logs).map_err(StageFailure::from)?;
            write_artifact(dir, DYNAMIC_MODEL_FILE, &pyarch_core::export::to_json(&model))?;
            write_artifact(dir, "dynamic-report.json", &json_text(&report))?;
        }
        Command::Merge { first, second } => {
            let (a, b) = (read_model(&first)?, read_model(&second)?);
            let (merged, report) =
                normalize_and_merge(&a, &b, &cfg.name_rules).map_err(|e| Failure::stage(format!("merge: {e}")))?;
            let dir = out_dir(&cfg)?;
            write_artifact(dir, MERGED_MODEL_FILE, &pyarch_core::export::to_json(&merged))?;
            write_artifact(dir, "merge-report.json", &json_text(&report))?;
        }
        Command::Compare { first, second } => {
            let (a, b) = (read_model(&first)?, read_model(&second)?);
            let normalize = |m: &ArchitectureModel| {
                pyarch_core::merge::normalize_names(m, &cfg.name_rules)
                    .map(|(m, _)| m)
                    .map_err(|e| Failure::stage(format!("compare: {e}")))
            };
            let diff = compare_models(&normalize(&a)?, &normalize(&b)?)
                .map_err(|e| Failure::stage(format!("compare: {e}")))?;
            let dir = out_dir(&cfg)?;
            write_artifact(dir, "compare.json", &json_text(&diff))?;
            println!(
                "only in first: {}, only in second: {}, in both: {}",
                diff.only_in_a.len(),
                diff.only_in_b.len(),
                diff.in_both.len()
            );
        }
        Command::Export {
            model,
            format,
            flat,
            no_dataflow,
            no_weights,
            output,
        } => {
            let m = read_model(&model)?;
            let mut options = cfg.export;
            if let Some(f) = format {
                options.format = f.into();
            }
            if flat {
                options.dot_mode = pyarch_core::export::DotMode::Flat;
            }
            options.include_dataflow &= !no_dataflow;
            options.include_weights &= !no_weights;
            let path = match output {
                Some(p) => p,
                None => out_dir(&cfg)?.join(format!("{EXPORT_STEM}.{}", options.format.extension())),
            };
            write_file(&path, &export_model(&m, &options))?;
        }
        Command::Layout {
            input,
            output,
            no_labels,
            font_size,
            edge_width,
            no_dataflow,
        } => {
            let text = read_input(&input)?;
            let graph: GroupedGraph = if input.extension().is_some_and(|e| e == "json") {
                let m = from_json(&text).map_err(|e| Failure::stage(format!("{}: {e}", input.display())))?;
                build_grouped_graph(&m, cfg.export.include_dataflow && !no_dataflow)
            } else {
                read_dot(&text).map_err(|e| Failure::stage(format!("{}: {e}", input.display())))?
            };
            let mut style = SvgStyle::default();
            style.labels &= !no_labels;
            style.font_size = font_size.unwrap_or(style.font_size);
            style.edge_width = edge_width.unwrap_or(style.edge_width);
            let result = layout(&graph, &cfg.layout);
            if result.grid_fallbacks > 0 {
                log::warn!("{} groups fell back to grid packing", result.grid_fallbacks);
            }
            let path = match output {
                Some(p) => p,
                None => out_dir(&cfg)?.join(SVG_FILE),
            };
            write_file(&path, &render_svg(&graph, &result, &style))?;
        }
        Command::Run { root, traces } => {
            let mut cfg = cfg;
            if root.is_some() {
                cfg.project_root = root;
            }
            if !traces.is_empty() {
                cfg.trace_logs = traces;
            }
            let outcome = run_pipeline(&cfg)?;
            for line in outcome.diagnostics() {
                eprintln!("pyarch: {line}");
            }
            return Ok(outcome.exit);
        }
    }
    Ok(ExitStatus::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("pyarch: --jobs: {e}");
            return ExitCode::from(ExitStatus::UsageError.code() as u8);
        }
    }
    let status = match execute(cli) {
        Ok(status) => status,
        Err(f) => {
            eprintln!("pyarch: {}", f.message);
            f.status
        }
    };
    ExitCode::from(status.code() as u8)
}
