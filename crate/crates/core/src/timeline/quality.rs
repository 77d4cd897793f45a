use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Segment, TimelineError};
use crate::audio_io::AudioClip;
use crate::fingerprint::{landmarks_of, offset_bins, offset_histogram, FpConfig, Landmark};

/// Votes within this many frames of zero count as aligned.
pub const ALIGNED_TOLERANCE_FRAMES: i32 = 2;

/// Fingerprint comparison of two cuts inside one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVotes {
    pub a: String,
    pub b: String,
    /// Matching landmarks with |offset| <= [`ALIGNED_TOLERANCE_FRAMES`].
    pub aligned_votes: u64,
    /// Strongest merged offset bin of the pair (`t1_b - t1_a`), if any
    /// landmark matched at all.
    pub best_offset_frames: Option<i32>,
}

impl PairVotes {
    /// Whether the pair's strongest match sits at offset zero.
    pub fn matched_at_zero(&self) -> bool {
        self.best_offset_frames
            .is_some_and(|o| o.abs() <= ALIGNED_TOLERANCE_FRAMES)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityScore {
    pub clip_id: String,
    pub score: u64,
}

/// Relative-quality ranking of the clips in one segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentQuality {
    pub t_start: f64,
    pub t_end: f64,
    /// Highest score first; ties by clip id.
    pub ranking: Vec<QualityScore>,
    /// One entry per unordered member pair, `a < b`.
    pub pairs: Vec<PairVotes>,
}

impl SegmentQuality {
    pub fn member_count(&self) -> usize {
        self.ranking.len()
    }

    pub fn pair(&self, x: &str, y: &str) -> Option<&PairVotes> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Re-fingerprint every member's cut at `hi_cfg` (denser peaks, vote
/// threshold of one) and score each clip by its aligned matching landmarks against the
/// other members.
///
/// A segment shorter than one STFT window scores every member 0.
pub fn segment_quality(
    seg: &Segment,
    clips: &HashMap<String, AudioClip>,
    hi_cfg: &FpConfig,
) -> Result<SegmentQuality, TimelineError> {
    let cuts: Vec<(&str, Vec<Landmark>)> = seg
        .members
        .par_iter()
        .map(|cut| {
            let clip = clips
                .get(&cut.clip_id)
                .ok_or_else(|| TimelineError::MissingClip(cut.clip_id.clone()))?;
            let samples = clip.slice_seconds(cut.local_start, cut.local_end);
            Ok((cut.clip_id.as_str(), landmarks_of(samples, hi_cfg)))
        })
        .collect::<Result<_, TimelineError>>()?;

    let mut scores: HashMap<&str, u64> = cuts.iter().map(|(id, _)| (*id, 0)).collect();
    let mut pairs = Vec::new();
    for i in 0..cuts.len() {
        for j in i + 1..cuts.len() {
            let (ia, la) = &cuts[i];
            let (ib, lb) = &cuts[j];
            let (a, b, la, lb) = if ia <= ib { (ia, ib, la, lb) } else { (ib, ia, lb, la) };
            let hist = offset_histogram(la, lb);
            let aligned: u64 = hist
                .range(-ALIGNED_TOLERANCE_FRAMES..=ALIGNED_TOLERANCE_FRAMES)
                .map(|(_, &c)| c as u64)
                .sum();
            let best = offset_bins(&hist, hi_cfg.offset_merge, hi_cfg.match_threshold)
                .first()
                .map(|bin| bin.center);
            *scores.get_mut(a).unwrap() += aligned;
            *scores.get_mut(b).unwrap() += aligned;
            pairs.push(PairVotes {
                a: a.to_string(),
                b: b.to_string(),
                aligned_votes: aligned,
                best_offset_frames: best,
            });
        }
    }
    pairs.sort_by(|x, y| x.a.cmp(&y.a).then(x.b.cmp(&y.b)));

    let mut ranking: Vec<QualityScore> = scores
        .into_iter()
        .map(|(id, score)| QualityScore {
            clip_id: id.to_string(),
            score,
        })
        .collect();
    ranking.sort_by(|x, y| y.score.cmp(&x.score).then(x.clip_id.cmp(&y.clip_id)));
    Ok(SegmentQuality {
        t_start: seg.t_start,
        t_end: seg.t_end,
        ranking,
        pairs,
    })
}
