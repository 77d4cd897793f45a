use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::TimelineError;
use crate::event_graph::{Cluster, MatchGraph};

/// Offsets relative to the representative clip, in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOffsets {
    pub cluster_id: String,
    pub representative: String,
    pub offsets: BTreeMap<String, f64>,
}

/// Clip start positions on the event timeline; the earliest clip sits at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionMap {
    pub cluster_id: String,
    pub representative: String,
    pub earliest: String,
    pub raw: BTreeMap<String, f64>,
    pub positions: BTreeMap<String, f64>,
}

/// Path-cost offsets from the highest-degree member (ties: smallest id),
/// summed along a breadth-first tree that visits neighbors in id order.
pub fn assign_offsets(cluster: &Cluster, g: &MatchGraph) -> Result<RawOffsets, TimelineError> {
    let representative = cluster
        .members
        .iter()
        .max_by(|a, b| g.degree(a).cmp(&g.degree(b)).then(b.cmp(a)))
        .ok_or_else(|| TimelineError::EmptyCluster(cluster.id.clone()))?
        .clone();

    let mut offsets = BTreeMap::new();
    offsets.insert(representative.clone(), 0.0);
    let mut queue = VecDeque::from([representative.clone()]);
    while let Some(node) = queue.pop_front() {
        let base = offsets[&node];
        for edge in g.outgoing(&node) {
            if !offsets.contains_key(&edge.to) {
                offsets.insert(edge.to.clone(), base + edge.weight);
                queue.push_back(edge.to.clone());
            }
        }
    }

    if offsets.len() != cluster.members.len() || cluster.members.iter().any(|m| !offsets.contains_key(m)) {
        return Err(TimelineError::NotConnected(cluster.id.clone()));
    }
    Ok(RawOffsets {
        cluster_id: cluster.id.clone(),
        representative,
        offsets,
    })
}

/// Shift offsets so the earliest clip (ties: smallest id) is at 0.
pub fn normalize_positions(raw: &RawOffsets) -> PositionMap {
    let (earliest, &min) = raw
        .offsets
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(b.0)))
        .expect("raw offsets are never empty");
    let positions = raw.offsets.iter().map(|(k, &o)| (k.clone(), o - min)).collect();
    PositionMap {
        cluster_id: raw.cluster_id.clone(),
        representative: raw.representative.clone(),
        earliest: earliest.clone(),
        raw: raw.offsets.clone(),
        positions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeResidual {
    pub from: String,
    pub to: String,
    pub weight: f64,
    /// `|(p(to) - p(from)) - weight|`
    pub residual: f64,
    pub flagged: bool,
}

/// Check every edge inside the cluster against the recovered positions.
/// Each undirected pair is reported once, from the smaller id.
pub fn consistency_report(cluster: &Cluster, g: &MatchGraph, pm: &PositionMap, eps: f64) -> Vec<EdgeResidual> {
    let mut out = Vec::new();
    for from in &cluster.members {
        for e in g.outgoing(from) {
            if e.from > e.to {
                continue;
            }
            let (Some(pf), Some(pt)) = (pm.positions.get(&e.from), pm.positions.get(&e.to)) else {
                continue;
            };
            let residual = ((pt - pf) - e.weight).abs();
            out.push(EdgeResidual {
                from: e.from.clone(),
                to: e.to.clone(),
                weight: e.weight,
                residual,
                flagged: residual > eps,
            });
        }
    }
    out
}
