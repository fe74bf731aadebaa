//! The run configuration file and its command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::export::ExportOptions;
use crate::layout::LayoutParams;
use crate::merge::NameRuleSet;

/// Keys whose values are paths; relative values are resolved against the
/// directory of the file they were read from.
const PATH_KEYS: [&str; 2] = ["project-root", "out-dir"];
const PATH_LIST_KEYS: [&str; 1] = ["trace-logs"];

/// One end-to-end run.
///
/// ```toml
/// project-root = "src"
/// trace-logs = ["runs/a.trace"]
/// out-dir = "out"
///
/// [[name-rules]]
/// kind = "prefix-strip"
/// prefix = "site_packages"
///
/// [export]
/// format = "graphml"
///
/// [layout]
/// rng-seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct PipelineConfig {
    pub project_root: Option<PathBuf>,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    pub trace_logs: Vec<PathBuf>,
    pub name_rules: NameRuleSet,
    pub export: ExportOptions,
    pub layout: LayoutParams,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            project_root: None,
            include: Vec::new(),
            exclude: Vec::new(),
            trace_logs: Vec::new(),
            name_rules: NameRuleSet::default(),
            export: ExportOptions::default(),
            layout: LayoutParams::default(),
            out_dir: PathBuf::from("pyarch-out"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("override {0:?} is not of the form key=value")]
    Override(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl PipelineConfig {
    /// Reads `path` (when given), applies `overrides` in order and deserializes.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<PipelineConfig, ConfigError> {
        let mut table = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                let mut table: toml::Table = toml::from_str(&text).map_err(|e| ConfigError::Parse {
                    origin: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let base = path.parent().unwrap_or(Path::new(""));
                resolve_paths(&mut table, base);
                table
            }
            None => toml::Table::new(),
        };
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        let origin = path.map_or_else(|| "configuration".to_string(), |p| p.display().to_string());
        toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse {
                origin,
                message: e.message().to_string(),
            })
    }

    /// Checks what a full run needs beyond what deserialization guarantees.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.project_root.is_none() && self.trace_logs.is_empty() {
            return Err(ConfigError::Invalid(
                "nothing to analyze: set project-root or trace-logs".into(),
            ));
        }
        self.layout
            .validate()
            .map_err(|e| ConfigError::Invalid(format!("layout.{}: {}", e.name, e.detail)))
    }
}

fn resolve_paths(table: &mut toml::Table, base: &Path) {
    let resolve = |v: &mut toml::Value| {
        if let toml::Value::String(s) = v {
            let p = Path::new(s.as_str());
            if p.is_relative() {
                *s = base.join(p).to_string_lossy().into_owned();
            }
        }
    };
    for key in PATH_KEYS {
        if let Some(v) = table.get_mut(key) {
            resolve(v);
        }
    }
    for key in PATH_LIST_KEYS {
        if let Some(toml::Value::Array(items)) = table.get_mut(key) {
            items.iter_mut().for_each(resolve);
        }
    }
}

/// Parses the right-hand side as a TOML value, falling back to a bare string
/// so that `out-dir=build/x` needs no quoting.
fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

/// Sets a dotted key such as `layout.rng-seed=3`.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| ConfigError::Override(item.to_string()))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(item.to_string()));
    }
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut current = table;
    for part in parents {
        let entry = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        current = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(ConfigError::Override(item.to_string())),
        };
    }
    current.insert(last.to_string(), parse_value(value.trim()));
    Ok(())
}
