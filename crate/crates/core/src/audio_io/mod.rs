//! Audio input, resampling, and synthetic ground-truth corpora.

mod synth;
mod wav;

pub use synth::{add_white_noise, synth_corpus, ClipTruth, GroundTruth, SynthSpec};
pub use wav::{decode_wav, encode_wav16};

use std::path::Path;

use thiserror::Error;

/// Every fingerprint is computed at this rate.
pub const PROCESSING_RATE: u32 = 11025;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("malformed WAV at byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("unsupported WAV encoding at byte {offset}: {what}")]
    Unsupported { offset: usize, what: String },
    #[error("truncated WAV data at byte {offset}: chunk declares {expected} bytes, {found} present")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("infeasible corpus layout: {0}")]
    InfeasibleLayout(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A mono recording.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub id: String,
    pub samples: Vec<f32>,
    pub rate: u32,
}

impl AudioClip {
    pub fn new(id: String, samples: Vec<f32>, rate: u32) -> Self {
        assert!(rate > 0, "sample rate must be positive");
        Self { id, samples, rate }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate as f64
    }

    /// Samples in `[start, end)` seconds, clamped to the clip.
    pub fn slice_seconds(&self, start: f64, end: f64) -> &[f32] {
        let to_index = |t: f64| ((t * self.rate as f64).round().max(0.0) as usize).min(self.samples.len());
        let (a, b) = (to_index(start), to_index(end));
        &self.samples[a..b.max(a)]
    }
}

/// Read a WAV file, naming the clip after the file stem.
pub fn read_wav(path: &Path) -> Result<AudioClip, AudioError> {
    let bytes = std::fs::read(path).map_err(|source| AudioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(decode_wav(&bytes)?.with_id(id))
}

/// Every `.wav` file directly inside `dir`, sorted by file name.
pub fn read_wav_dir(dir: &Path) -> Result<Vec<AudioClip>, AudioError> {
    let io = |source| AudioError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(io)?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")));
    paths.sort();
    paths.iter().map(|p| read_wav(p)).collect()
}

/// Decode and bring a clip to [`PROCESSING_RATE`].
pub fn load_for_processing(path: &Path) -> Result<AudioClip, AudioError> {
    let clip = read_wav(path)?;
    Ok(resample_mono(&clip, PROCESSING_RATE))
}

/// Linear-interpolation resampler.
///
/// Output length is `round(len * target / source)`; equal rates return the
/// input unchanged.
pub fn resample_mono(clip: &AudioClip, target_rate: u32) -> AudioClip {
    assert!(target_rate > 0, "target rate must be positive");
    if clip.rate == target_rate || clip.samples.is_empty() {
        return AudioClip::new(clip.id.clone(), clip.samples.clone(), target_rate);
    }
    let n = clip.samples.len();
    let out_len = ((n as u64 * target_rate as u64) as f64 / clip.rate as f64).round() as usize;
    let step = clip.rate as f64 / target_rate as f64;
    let samples = (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let left = (pos.floor() as usize).min(n - 1);
            let right = (left + 1).min(n - 1);
            let frac = (pos - left as f64) as f32;
            clip.samples[left] * (1.0 - frac) + clip.samples[right] * frac
        })
        .collect();
    AudioClip::new(clip.id.clone(), samples, target_rate)
}
