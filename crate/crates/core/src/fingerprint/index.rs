use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{pack_key, FingerprintError, FpConfig, Landmark, LandmarkKey};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedClip {
    pub id: String,
    pub duration: f64,
    /// `#L` for this clip.
    pub landmark_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Posting {
    pub clip: u32,
    pub t1: u32,
}

/// One candidate clip at one offset in a query's matching list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub query_id: String,
    pub clip_id: String,
    /// `t1` in the candidate minus `t1` in the query at the winning offset
    /// bin, i.e. `start(query) - start(candidate)` in frames.
    pub offset_frames: i32,
    /// Vote-weighted mean offset of the merged bin, in seconds.
    pub offset_seconds: f64,
    /// Matching landmarks at this offset.
    pub ml: u32,
    /// Matching landmarks for this candidate across all offsets.
    pub tml: u32,
    /// Landmarks in the query.
    pub lq: u32,
    /// Landmarks in the candidate.
    pub li: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingList {
    pub query_id: String,
    pub entries: Vec<MatchEntry>,
}

/// A merged run of offset-histogram bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetBin {
    pub center: i32,
    pub count: u32,
    /// Count-weighted mean offset of the merged bins.
    pub mean: f64,
}

fn merged_count(hist: &BTreeMap<i32, u32>, center: i32, merge: i32) -> u32 {
    hist.range(center - merge..=center + merge).map(|(_, &c)| c).sum()
}

/// Repeatedly take the strongest merged window (±`merge` frames) and remove
/// its votes, until the best window holds fewer than `threshold` votes.
///
/// Ties go to the smaller |offset|, then the smaller offset.
pub fn offset_bins(hist: &BTreeMap<i32, u32>, merge: i32, threshold: u32) -> Vec<OffsetBin> {
    let threshold = threshold.max(1);
    let mut remaining = hist.clone();
    // Merged counts only shrink as votes are consumed, so offsets that start
    // below threshold can never be picked.
    let mut candidates: Vec<i32> = hist
        .keys()
        .copied()
        .filter(|&o| merged_count(hist, o, merge) >= threshold)
        .collect();
    let mut bins = Vec::new();
    loop {
        let best = candidates
            .iter()
            .map(|&o| (o, merged_count(&remaining, o, merge)))
            .max_by(|a, b| {
                a.1.cmp(&b.1)
                    .then(b.0.abs().cmp(&a.0.abs()))
                    .then(b.0.cmp(&a.0))
            });
        let Some((center, count)) = best else { break };
        if count < threshold {
            break;
        }
        let window: Vec<(i32, u32)> = remaining
            .range(center - merge..=center + merge)
            .map(|(&o, &c)| (o, c))
            .collect();
        let weighted: f64 = window.iter().map(|&(o, c)| o as f64 * c as f64).sum();
        for (o, _) in &window {
            remaining.remove(o);
        }
        candidates.retain(|&o| merged_count(&remaining, o, merge) >= threshold);
        bins.push(OffsetBin {
            center,
            count,
            mean: weighted / count as f64,
        });
    }
    bins
}

/// Offset votes `t1_b - t1_a` over all landmark pairs with equal keys.
pub fn offset_histogram(a: &[Landmark], b: &[Landmark]) -> BTreeMap<i32, u32> {
    let mut by_key: HashMap<LandmarkKey, Vec<u32>> = HashMap::new();
    for l in b {
        if let Ok(k) = pack_key(l) {
            by_key.entry(k).or_default().push(l.t1);
        }
    }
    let mut hist = BTreeMap::new();
    for l in a {
        let Ok(k) = pack_key(l) else { continue };
        if let Some(times) = by_key.get(&k) {
            for &t in times {
                *hist.entry(t as i32 - l.t1 as i32).or_insert(0) += 1;
            }
        }
    }
    hist
}

/// Inverted landmark index over a set of clips.
#[derive(Debug, Clone)]
pub struct FingerprintIndex {
    config: FpConfig,
    clips: Vec<IndexedClip>,
    by_id: HashMap<String, u32>,
    postings: HashMap<LandmarkKey, Vec<Posting>>,
}

impl FingerprintIndex {
    pub fn new(config: FpConfig) -> Self {
        Self {
            config,
            clips: Vec::new(),
            by_id: HashMap::new(),
            postings: HashMap::new(),
        }
    }

    pub fn config(&self) -> &FpConfig {
        &self.config
    }

    pub fn clips(&self) -> &[IndexedClip] {
        &self.clips
    }

    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }

    pub fn landmark_count(&self, clip_id: &str) -> Option<u32> {
        self.by_id.get(clip_id).map(|&i| self.clips[i as usize].landmark_count)
    }

    pub fn posting_count(&self) -> usize {
        self.postings.values().map(Vec::len).sum()
    }

    /// All postings as `(key, clip ordinal, t1)`, sorted.
    pub fn sorted_postings(&self) -> Vec<(u32, u32, u32)> {
        let mut all: Vec<(u32, u32, u32)> = self
            .postings
            .iter()
            .flat_map(|(k, ps)| ps.iter().map(move |p| (k.0, p.clip, p.t1)))
            .collect();
        all.sort_unstable();
        all
    }

    /// Add a clip's landmarks. Fails on a duplicate id, an empty fingerprint,
    /// or a landmark outside the key domain; the index is unchanged on error.
    pub fn add_clip(&mut self, clip_id: &str, duration: f64, landmarks: &[Landmark]) -> Result<(), FingerprintError> {
        if self.by_id.contains_key(clip_id) {
            return Err(FingerprintError::DuplicateClip(clip_id.to_string()));
        }
        if landmarks.is_empty() {
            return Err(FingerprintError::EmptyFingerprint(clip_id.to_string()));
        }
        let keys = landmarks.iter().map(pack_key).collect::<Result<Vec<_>, _>>()?;
        let ordinal = self.clips.len() as u32;
        for (key, l) in keys.into_iter().zip(landmarks) {
            self.postings.entry(key).or_default().push(Posting {
                clip: ordinal,
                t1: l.t1,
            });
        }
        self.by_id.insert(clip_id.to_string(), ordinal);
        self.clips.push(IndexedClip {
            id: clip_id.to_string(),
            duration,
            landmark_count: landmarks.len() as u32,
        });
        Ok(())
    }

    /// Rebuild an index from stored parts, checking that posting counts
    /// agree with the per-clip landmark counts.
    pub fn from_parts(
        config: FpConfig,
        clips: Vec<IndexedClip>,
        postings: impl IntoIterator<Item = (u32, u32, u32)>,
    ) -> Result<Self, FingerprintError> {
        let mut index = Self::new(config);
        for (i, c) in clips.iter().enumerate() {
            if index.by_id.insert(c.id.clone(), i as u32).is_some() {
                return Err(FingerprintError::DuplicateClip(c.id.clone()));
            }
        }
        let mut per_clip = vec![0u32; clips.len()];
        for (key, clip, t1) in postings {
            let slot = per_clip
                .get_mut(clip as usize)
                .ok_or(FingerprintError::Inconsistent("posting refers to unknown clip"))?;
            *slot += 1;
            index.postings.entry(LandmarkKey(key)).or_default().push(Posting { clip, t1 });
        }
        if per_clip.iter().zip(&clips).any(|(&n, c)| n != c.landmark_count) {
            return Err(FingerprintError::Inconsistent("posting counts disagree with landmark counts"));
        }
        index.clips = clips;
        Ok(index)
    }

    /// Matching list for `query_id` against every other indexed clip.
    pub fn query(&self, query_id: &str, landmarks: &[Landmark], cfg: &FpConfig) -> Result<MatchingList, FingerprintError> {
        if !self.config.same_grid(cfg) {
            return Err(FingerprintError::ConfigMismatch);
        }
        let own = self.by_id.get(query_id).copied();
        let mut votes: HashMap<u32, BTreeMap<i32, u32>> = HashMap::new();
        for l in landmarks {
            let Ok(key) = pack_key(l) else { continue };
            let Some(list) = self.postings.get(&key) else { continue };
            for p in list {
                if Some(p.clip) == own {
                    continue;
                }
                *votes.entry(p.clip).or_default().entry(p.t1 as i32 - l.t1 as i32).or_insert(0) += 1;
            }
        }

        let spf = cfg.seconds_per_frame();
        let mut entries = Vec::new();
        for (clip, hist) in votes {
            let tml: u32 = hist.values().sum();
            if tml < cfg.match_threshold {
                continue;
            }
            let info = &self.clips[clip as usize];
            for bin in offset_bins(&hist, cfg.offset_merge, cfg.match_threshold) {
                entries.push(MatchEntry {
                    query_id: query_id.to_string(),
                    clip_id: info.id.clone(),
                    offset_frames: bin.center,
                    offset_seconds: bin.mean * spf,
                    ml: bin.count,
                    tml,
                    lq: landmarks.len() as u32,
                    li: info.landmark_count,
                });
            }
        }
        entries.sort_by(|a, b| {
            a.clip_id
                .cmp(&b.clip_id)
                .then(b.ml.cmp(&a.ml))
                .then(a.offset_frames.cmp(&b.offset_frames))
        });
        Ok(MatchingList {
            query_id: query_id.to_string(),
            entries,
        })
    }
}
