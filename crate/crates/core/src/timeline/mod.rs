//! Per-event timeline: clip positions from path costs, overlap segments,
//! and per-segment quality ranking.

mod align;
mod quality;
mod segment;

pub use align::{assign_offsets, consistency_report, normalize_positions, EdgeResidual, PositionMap, RawOffsets};
pub use quality::{segment_quality, PairVotes, QualityScore, SegmentQuality, ALIGNED_TOLERANCE_FRAMES};
pub use segment::{build_segments, ClipCut, Segment, BOUNDARY_EPS};

use thiserror::Error;

/// Default tolerance for flagging inconsistent edges, in seconds.
pub const DEFAULT_CONSISTENCY_EPS: f64 = 0.1;

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("cluster {0:?} is not connected in the match graph")]
    NotConnected(String),
    #[error("cluster {0:?} has no members")]
    EmptyCluster(String),
    #[error("no audio for clip {0:?}")]
    MissingClip(String),
}
