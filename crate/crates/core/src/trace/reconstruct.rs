use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::TraceEvent;
use crate::model::QualifiedName;

/// Traces are keyed by process and id, so logs from separate runs that reuse
/// ids never mix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TraceKey {
    pub process_label: String,
    pub trace_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionTrace {
    pub key: TraceKey,
    /// Sorted by order index.
    pub events: Vec<TraceEvent>,
    pub root_count: usize,
}

impl ExecutionTrace {
    /// `(caller, callee)` per event by stack replay; roots have no caller.
    pub fn calls(&self) -> Vec<(Option<&QualifiedName>, &QualifiedName)> {
        let mut stack: Vec<&QualifiedName> = Vec::new();
        let mut out = Vec::with_capacity(self.events.len());
        for e in &self.events {
            stack.truncate(e.depth as usize);
            out.push((stack.last().copied(), &e.signature));
            stack.push(&e.signature);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum QuarantineReason {
    DuplicateOrderIndex { order_index: u64 },
    FirstDepthNotZero { depth: u32 },
    DepthJump { order_index: u64, from: u32, to: u32 },
    MissingExit { order_index: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuarantinedTrace {
    pub key: TraceKey,
    pub events: usize,
    #[serde(flatten)]
    pub reason: QuarantineReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TraceSet {
    pub traces: Vec<ExecutionTrace>,
    pub quarantined: Vec<QuarantinedTrace>,
}

impl TraceSet {
    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }
}

fn check(events: &[TraceEvent]) -> Result<usize, QuarantineReason> {
    let mut seen = BTreeSet::new();
    for e in events {
        if !seen.insert(e.order_index) {
            return Err(QuarantineReason::DuplicateOrderIndex {
                order_index: e.order_index,
            });
        }
    }
    if let Some(first) = events.first() {
        if first.depth != 0 {
            return Err(QuarantineReason::FirstDepthNotZero { depth: first.depth });
        }
    }
    for pair in events.windows(2) {
        if pair[1].depth > pair[0].depth + 1 {
            return Err(QuarantineReason::DepthJump {
                order_index: pair[1].order_index,
                from: pair[0].depth,
                to: pair[1].depth,
            });
        }
    }
    if let Some(open) = events.iter().find(|e| e.exit_ns.is_none()) {
        return Err(QuarantineReason::MissingExit {
            order_index: open.order_index,
        });
    }
    Ok(events.iter().filter(|e| e.depth == 0).count())
}

/// Groups events into traces and checks each one; invalid traces are set aside.
pub fn reconstruct_traces(events: impl IntoIterator<Item = TraceEvent>) -> TraceSet {
    let mut groups: BTreeMap<TraceKey, Vec<TraceEvent>> = BTreeMap::new();
    for e in events {
        let key = TraceKey {
            process_label: e.process_label.clone(),
            trace_id: e.trace_id,
        };
        groups.entry(key).or_default().push(e);
    }
    let mut out = TraceSet::default();
    for (key, mut events) in groups {
        events.sort_by_key(|e| e.order_index);
        match check(&events) {
            Ok(root_count) => out.traces.push(ExecutionTrace {
                key,
                events,
                root_count,
            }),
            Err(reason) => {
                log::warn!("quarantined trace {}#{}: {reason:?}", key.process_label, key.trace_id);
                out.quarantined.push(QuarantinedTrace {
                    key,
                    events: events.len(),
                    reason,
                })
            }
        }
    }
    out
}
