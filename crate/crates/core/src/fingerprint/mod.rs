//! Landmark fingerprints, the inverted index, and matching lists.
//!
//! A clip goes spectrogram -> peaks -> landmark pairs. Querying an index
//! accumulates `t1_db - t1_query` votes per candidate clip; every merged
//! offset bin that reaches `match_threshold` becomes a [`MatchEntry`].

mod config;
mod index;
mod landmark;
mod peaks;
mod spectrogram;

pub use config::FpConfig;
pub use index::{
    offset_bins, offset_histogram, FingerprintIndex, IndexedClip, MatchEntry, MatchingList, OffsetBin, Posting,
};
pub use landmark::{pack_key, pack_parts, pair_landmarks, unpack_key, Landmark, LandmarkKey};
pub use peaks::{extract_peaks, SpectralPeak};
pub use spectrogram::{spectrogram, Spectrogram};

use rayon::prelude::*;
use thiserror::Error;

use crate::audio_io::AudioClip;

#[derive(Debug, Error)]
pub enum FingerprintError {
    #[error("clip has {samples} samples, shorter than one {window}-sample window")]
    TooShort { samples: usize, window: usize },
    #[error("clip rate {found} Hz does not match the configured {expected} Hz")]
    RateMismatch { expected: u32, found: u32 },
    #[error("invalid fingerprint config: {0}")]
    InvalidConfig(String),
    #[error("landmark outside the key domain (f1={f1}, df={df}, dt={dt})")]
    KeyOutOfRange { f1: u32, df: i32, dt: u32 },
    #[error("clip {0:?} is already indexed")]
    DuplicateClip(String),
    #[error("clip {0:?} produced no landmarks")]
    EmptyFingerprint(String),
    #[error("query config does not match the index (rate/window/hop)")]
    ConfigMismatch,
    #[error("inconsistent index: {0}")]
    Inconsistent(&'static str),
}

/// Landmarks of one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    pub clip_id: String,
    pub duration: f64,
    pub landmarks: Vec<Landmark>,
}

/// Full extraction chain for one clip.
pub fn fingerprint_clip(clip: &AudioClip, cfg: &FpConfig) -> Result<Fingerprint, FingerprintError> {
    let spec = spectrogram(clip, cfg)?;
    let peaks = extract_peaks(&spec, cfg);
    Ok(Fingerprint {
        clip_id: clip.id.clone(),
        duration: clip.duration(),
        landmarks: pair_landmarks(&peaks, cfg),
    })
}

/// Landmarks of raw samples; empty when shorter than one window.
pub fn landmarks_of(samples: &[f32], cfg: &FpConfig) -> Vec<Landmark> {
    match spectrogram::spectrogram_of(samples, cfg) {
        Ok(spec) => pair_landmarks(&extract_peaks(&spec, cfg), cfg),
        Err(_) => Vec::new(),
    }
}

/// Fingerprint every clip in parallel, preserving order.
pub fn fingerprint_all(clips: &[AudioClip], cfg: &FpConfig) -> Vec<Result<Fingerprint, FingerprintError>> {
    clips.par_iter().map(|c| fingerprint_clip(c, cfg)).collect()
}

/// Index every non-empty fingerprint and return each clip's matching list.
/// Clips without landmarks get an empty list and are not indexed.
pub fn match_all(fingerprints: &[Fingerprint], cfg: &FpConfig) -> Result<(FingerprintIndex, Vec<MatchingList>), FingerprintError> {
    let mut index = FingerprintIndex::new(cfg.clone());
    for fp in fingerprints.iter().filter(|f| !f.landmarks.is_empty()) {
        index.add_clip(&fp.clip_id, fp.duration, &fp.landmarks)?;
    }
    let lists = fingerprints
        .par_iter()
        .map(|fp| index.query(&fp.clip_id, &fp.landmarks, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((index, lists))
}
