//! Execution-trace logs.
//!
//! A log is UTF-8 text with one event per line:
//!
//! ```text
//! traceId;orderIndex;depth;signature;entryNs;exitNs;processLabel
//! ```
//!
//! Lines starting with `#` are comments. An `exitNs` of `-` or an empty field
//! marks an event whose exit was never recorded.

mod dynamic;
mod reconstruct;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use dynamic::{build_dynamic_model, observed_time, split_signature, SignatureParts};
pub use reconstruct::{reconstruct_traces, ExecutionTrace, QuarantineReason, QuarantinedTrace, TraceKey, TraceSet};

use crate::model::QualifiedName;

pub const TRACE_SUFFIX: &str = ".trace";
const FIELD_COUNT: usize = 7;
/// More malformed lines than this fraction means the file is probably not a trace log.
const MALFORMED_LIMIT: f64 = 0.10;

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {malformed} of {lines} event lines are malformed; not a trace log?", path.display())]
    TooManyMalformed { path: PathBuf, malformed: usize, lines: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub trace_id: u64,
    pub order_index: u64,
    pub depth: u32,
    pub signature: QualifiedName,
    pub entry_ns: i64,
    /// `None` when the exit was never recorded.
    pub exit_ns: Option<i64>,
    pub process_label: String,
}

impl TraceEvent {
    pub fn duration_ns(&self) -> Option<u64> {
        self.exit_ns.map(|exit| exit.saturating_sub(self.entry_ns).max(0) as u64)
    }

    /// The log line for this event, without a newline.
    pub fn to_line(&self) -> String {
        let exit = self.exit_ns.map_or_else(|| "-".to_string(), |e| e.to_string());
        format!(
            "{};{};{};{};{};{};{}",
            self.trace_id, self.order_index, self.depth, self.signature, self.entry_ns, exit, self.process_label
        )
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Serializes events as a log, one line each.
pub fn write_trace_log(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedLine {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParsedLog {
    pub events: Vec<TraceEvent>,
    pub malformed: Vec<MalformedLine>,
    /// Non-blank, non-comment lines seen.
    pub event_lines: usize,
}

fn parse_line(line: &str) -> Result<TraceEvent, String> {
    let fields: Vec<&str> = line.split(';').collect();
    if fields.len() != FIELD_COUNT {
        return Err(format!("expected {FIELD_COUNT} fields, found {}", fields.len()));
    }
    let num = |idx: usize, what: &str| -> Result<u64, String> {
        fields[idx]
            .trim()
            .parse::<u64>()
            .map_err(|e| format!("{what} {:?}: {e}", fields[idx]))
    };
    let trace_id = num(0, "traceId")?;
    let order_index = num(1, "orderIndex")?;
    let depth = u32::try_from(num(2, "depth")?).map_err(|_| "depth out of range".to_string())?;
    let signature = QualifiedName::parse(fields[3].trim()).map_err(|e| format!("signature: {e}"))?;
    if signature.len() < 2 {
        return Err(format!("signature {signature} has no module part"));
    }
    if signature.is_synthetic() {
        return Err("signature uses the reserved synthetic namespace".into());
    }
    let entry_ns = fields[4]
        .trim()
        .parse::<i64>()
        .map_err(|e| format!("entryNs {:?}: {e}", fields[4]))?;
    let exit_ns = match fields[5].trim() {
        "" | "-" => None,
        text => Some(text.parse::<i64>().map_err(|e| format!("exitNs {text:?}: {e}"))?),
    };
    if let Some(exit) = exit_ns {
        if exit < entry_ns {
            return Err(format!("exitNs {exit} precedes entryNs {entry_ns}"));
        }
    }
    Ok(TraceEvent {
        trace_id,
        order_index,
        depth,
        signature,
        entry_ns,
        exit_ns,
        process_label: fields[6].to_string(),
    })
}

/// Parses log text; malformed lines are collected, not fatal.
pub fn parse_trace_text(text: &str) -> ParsedLog {
    let mut out = ParsedLog::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.event_lines += 1;
        match parse_line(line) {
            Ok(e) => out.events.push(e),
            Err(reason) => out.malformed.push(MalformedLine { line: idx + 1, reason }),
        }
    }
    out
}

/// Reads and parses one log file.
pub fn parse_trace_log(path: &Path) -> Result<ParsedLog, TraceError> {
    let text = std::fs::read_to_string(path).map_err(|e| TraceError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let parsed = parse_trace_text(&text);
    let malformed = parsed.malformed.len();
    if malformed as f64 > MALFORMED_LIMIT * parsed.event_lines as f64 {
        return Err(TraceError::TooManyMalformed {
            path: path.to_path_buf(),
            malformed,
            lines: parsed.event_lines,
        });
    }
    for m in &parsed.malformed {
        log::warn!("{}:{}: skipped malformed event: {}", path.display(), m.line, m.reason);
    }
    Ok(parsed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileMalformed {
    pub path: PathBuf,
    pub line: usize,
    pub reason: String,
}

/// Result of ingesting a set of log files.
#[derive(Debug, Clone, Default)]
pub struct Ingest {
    pub events: Vec<TraceEvent>,
    pub malformed: Vec<FileMalformed>,
}

/// Parses several logs in parallel; events are concatenated in path order.
pub fn ingest_logs(paths: &[PathBuf]) -> Result<Ingest, TraceError> {
    let parsed: Vec<Result<ParsedLog, TraceError>> = paths.par_iter().map(|p| parse_trace_log(p)).collect();
    let mut out = Ingest::default();
    for (path, result) in paths.iter().zip(parsed) {
        let log = result?;
        out.events.extend(log.events);
        out.malformed.extend(log.malformed.into_iter().map(|m| FileMalformed {
            path: path.clone(),
            line: m.line,
            reason: m.reason,
        }));
    }
    Ok(out)
}
