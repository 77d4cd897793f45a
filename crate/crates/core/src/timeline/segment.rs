use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PositionMap;

/// Boundaries closer than this (seconds) are treated as the same instant.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// The part of one clip that falls inside a segment, in clip-local seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipCut {
    pub clip_id: String,
    pub local_start: f64,
    pub local_end: f64,
}

impl ClipCut {
    pub fn len(&self) -> f64 {
        self.local_end - self.local_start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }
}

/// Half-open timeline interval `[t_start, t_end)` with the clips active
/// over all of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub members: Vec<ClipCut>,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Cut the event timeline at every clip start and end.
///
/// Each interval between consecutive distinct boundaries becomes a segment
/// holding the clips that cover it entirely; intervals covered by no clip
/// are skipped.
pub fn build_segments(pm: &PositionMap, durations: &BTreeMap<String, f64>) -> Vec<Segment> {
    let spans: Vec<(&String, f64, f64)> = pm
        .positions
        .iter()
        .filter_map(|(id, &p)| durations.get(id).map(|&d| (id, p, d)))
        .filter(|&(_, _, d)| d > 0.0)
        .collect();

    let mut boundaries: Vec<f64> = spans.iter().flat_map(|&(_, p, d)| [p, p + d]).collect();
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup_by(|later, kept| (*later - *kept).abs() <= BOUNDARY_EPS);

    let mut segments = Vec::new();
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        let members: Vec<ClipCut> = spans
            .iter()
            .filter(|&&(_, p, d)| p <= a + BOUNDARY_EPS && p + d >= b - BOUNDARY_EPS)
            .map(|&(id, p, d)| {
                let snap = |t: f64| {
                    if t.abs() <= BOUNDARY_EPS {
                        0.0
                    } else if (t - d).abs() <= BOUNDARY_EPS {
                        d
                    } else {
                        t
                    }
                };
                ClipCut {
                    clip_id: id.clone(),
                    local_start: snap(a - p),
                    local_end: snap(b - p),
                }
            })
            .collect();
        if !members.is_empty() {
            segments.push(Segment {
                t_start: a,
                t_end: b,
                members,
            });
        }
    }
    segments
}
