use std::collections::{BTreeMap, BTreeSet};

use super::extract::{RawCallSite, SiteContext};
use super::resolve::Resolution;
use crate::model::{DataflowEdge, DataflowKind, QualifiedName};

/// Return-value and argument flows between resolved calls.
///
/// `x = g()` inside `f` gives `g -> f` (return-value); `h(g())` gives `g -> h`
/// (argument). Returns the edges and the number of flows skipped because one
/// end was unresolved.
pub fn extract_dataflow(sites: &[RawCallSite], resolution: &Resolution) -> (Vec<DataflowEdge>, usize) {
    let mut by_ordinal: BTreeMap<(&QualifiedName, u32), Option<&QualifiedName>> = BTreeMap::new();
    for (i, site) in sites.iter().enumerate() {
        by_ordinal.insert((&site.caller, site.ordinal), resolution.callee_of(i));
    }

    let mut edges = BTreeSet::new();
    let mut skipped = 0;
    for (i, site) in sites.iter().enumerate() {
        let inner = resolution.callee_of(i);
        let edge = match site.context {
            SiteContext::Other => continue,
            SiteContext::AssignedValue => {
                inner.map(|g| DataflowEdge::new(g.clone(), site.caller.clone(), DataflowKind::ReturnValue))
            }
            SiteContext::ArgumentOf(outer) => {
                let outer = by_ordinal.get(&(&site.caller, outer)).copied().flatten();
                match (inner, outer) {
                    (Some(g), Some(h)) => Some(DataflowEdge::new(g.clone(), h.clone(), DataflowKind::Argument)),
                    _ => None,
                }
            }
        };
        match edge {
            Some(e) => {
                edges.insert(e);
            }
            None => skipped += 1,
        }
    }
    (edges.into_iter().collect(), skipped)
}
