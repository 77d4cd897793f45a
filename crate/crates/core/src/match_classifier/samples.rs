use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{featurize, ClassifierError, MatchFeatures};
use crate::audio_io::GroundTruth;
use crate::event_graph::{split_repetitions, Cluster, MatchGraph};
use crate::fingerprint::{MatchEntry, MatchingList};
use crate::timeline::SegmentQuality;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    True,
    Repetition,
    Wrong,
}

impl SampleKind {
    /// Class implied by the kind: 1 for true matches, 0 otherwise.
    pub fn class(self) -> u8 {
        match self {
            SampleKind::True => 1,
            SampleKind::Repetition | SampleKind::Wrong => 0,
        }
    }
}

/// One labeled match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: MatchFeatures,
    pub class: u8,
    pub kind: SampleKind,
    /// Grouping key for leave-one-song-out.
    pub query_song_id: String,
    pub query_id: String,
    pub clip_id: String,
    pub offset_frames: i32,
    /// Emitted by a cluster confirmation that held only because no segment
    /// had two members.
    #[serde(default)]
    pub vacuous: bool,
}

impl Sample {
    pub fn from_entry(entry: &MatchEntry, kind: SampleKind, song: String) -> Self {
        Sample {
            features: featurize(entry),
            class: kind.class(),
            kind,
            query_song_id: song,
            query_id: entry.query_id.clone(),
            clip_id: entry.clip_id.clone(),
            offset_frames: entry.offset_frames,
            vacuous: false,
        }
    }

    pub fn key(&self) -> (&str, &str, i32) {
        (&self.query_id, &self.clip_id, self.offset_frames)
    }
}

/// Song a clip belongs to when no ground truth is available: the id prefix
/// before the first `_`, or the whole id.
pub fn song_of(clip_id: &str) -> &str {
    clip_id.split('_').next().unwrap_or(clip_id)
}

fn song_from_truth(truth: Option<&GroundTruth>, clip_id: &str) -> String {
    match truth.and_then(|t| t.event_of(clip_id)) {
        Some(event) => format!("e{event:02}"),
        None => song_of(clip_id).to_string(),
    }
}

/// Label every entry of every matching list.
///
/// Repetitions are class 0. Primaries are class 1 unless the ground truth
/// puts query and candidate in different events, which makes them wrong
/// matches (class 0).
pub fn autolabel(lists: &[MatchingList], truth: Option<&GroundTruth>) -> Vec<Sample> {
    let mut out = Vec::new();
    for list in lists {
        let song = song_from_truth(truth, &list.query_id);
        let (primaries, repetitions) = split_repetitions(list);
        for e in &primaries {
            let cross_event = truth.is_some_and(|t| {
                matches!((t.event_of(&e.query_id), t.event_of(&e.clip_id)), (Some(a), Some(b)) if a != b)
            });
            let kind = if cross_event { SampleKind::Wrong } else { SampleKind::True };
            out.push(Sample::from_entry(e, kind, song.clone()));
        }
        for e in &repetitions {
            out.push(Sample::from_entry(e, SampleKind::Repetition, song.clone()));
        }
    }
    out
}

/// Indices of a class-balanced subset: the majority class is downsampled
/// uniformly at random to the minority size. Indices come back sorted, so
/// the original order is kept.
pub fn balance_indices(classes: &[u8], seed: u64) -> Result<Vec<usize>, ClassifierError> {
    let ones: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == 1).collect();
    let zeros: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] != 1).collect();
    if ones.is_empty() || zeros.is_empty() {
        return Err(ClassifierError::MissingClass {
            zeros: zeros.len(),
            ones: ones.len(),
        });
    }
    let (minority, majority) = if ones.len() <= zeros.len() { (ones, zeros) } else { (zeros, ones) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep: Vec<usize> = rand::seq::index::sample(&mut rng, majority.len(), minority.len())
        .into_iter()
        .map(|i| majority[i])
        .chain(minority)
        .collect();
    keep.sort_unstable();
    Ok(keep)
}

pub fn balance(data: &[Sample], seed: u64) -> Result<Vec<Sample>, ClassifierError> {
    let classes: Vec<u8> = data.iter().map(|s| s.class).collect();
    Ok(balance_indices(&classes, seed)?.into_iter().map(|i| data[i].clone()).collect())
}

/// Samples keyed by `(query, clip, offset_frames)`; re-inserting a key is
/// a no-op.
#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    samples: Vec<Sample>,
    seen: HashSet<(String, String, i32)>,
}

impl TrainingSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Returns whether the sample was new.
    pub fn insert(&mut self, s: Sample) -> bool {
        let key = (s.query_id.clone(), s.clip_id.clone(), s.offset_frames);
        if self.seen.insert(key) {
            self.samples.push(s);
            true
        } else {
            false
        }
    }

    /// Number of samples actually added.
    pub fn extend(&mut self, samples: impl IntoIterator<Item = Sample>) -> usize {
        samples.into_iter().map(|s| self.insert(s) as usize).sum()
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

impl FromIterator<Sample> for TrainingSet {
    fn from_iter<I: IntoIterator<Item = Sample>>(iter: I) -> Self {
        let mut set = TrainingSet::new();
        set.extend(iter);
        set
    }
}

/// Every repetition entry, labeled class 0.
pub fn expand_from_repetitions(lists: &[MatchingList]) -> Vec<Sample> {
    lists
        .iter()
        .flat_map(|list| {
            let (_, repetitions) = split_repetitions(list);
            repetitions
                .into_iter()
                .map(|e| Sample::from_entry(&e, SampleKind::Repetition, song_of(&e.query_id).to_string()))
        })
        .collect()
}

/// Whether every member of every segment matches all other members of that
/// segment at offset zero.
pub fn cluster_confirmed(qualities: &[SegmentQuality]) -> bool {
    qualities.iter().all(|q| {
        let ids: Vec<&str> = q.ranking.iter().map(|r| r.clip_id.as_str()).collect();
        ids.iter().all(|s| {
            let matched = ids
                .iter()
                .filter(|o| *o != s)
                .filter(|o| q.pair(s, o).is_some_and(|p| p.matched_at_zero()))
                .count();
            matched == ids.len() - 1
        })
    })
}

/// Class-1 samples for every match entry behind an edge of a confirmed
/// cluster; nothing when the confirmation predicate fails.
///
/// `qualities` must cover every segment of the cluster. When no segment has
/// two members the predicate holds trivially and samples carry `vacuous`.
pub fn confirm_cluster(cluster: &Cluster, g: &MatchGraph, qualities: &[SegmentQuality]) -> Vec<Sample> {
    if !cluster_confirmed(qualities) {
        return Vec::new();
    }
    let vacuous = qualities.iter().all(|q| q.member_count() < 2);
    let mut out = Vec::new();
    for m in &cluster.members {
        for e in g.outgoing(m) {
            // each entry backs two directed edges; take it once
            if e.from != e.source_entry.query_id {
                continue;
            }
            let mut s = Sample::from_entry(&e.source_entry, SampleKind::True, song_of(&e.from).to_string());
            s.vacuous = vacuous;
            out.push(s);
        }
    }
    out
}
