//! Synthetic corpora of overlapping noisy clips with known ground truth.
//!
//! Each event gets a master signal made of enveloped sine bursts over a
//! -40 dB noise floor. Clips are contiguous cuts of a master, chained so
//! that consecutive clips (by start) overlap by at least `min_overlap`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{AudioClip, AudioError, PROCESSING_RATE};

/// Layout and noise parameters for [`synth_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_events: usize,
    pub clips_per_event: usize,
    pub event_duration: f64,
    pub clip_duration_range: (f64, f64),
    pub min_overlap: f64,
    pub snr_range_db: (f64, f64),
    pub seed: u64,
    /// Restrict burst pitches to an equal-tempered scale instead of a
    /// continuous range. Repeated notes make repetition matches common.
    #[serde(default)]
    pub scale_pitches: bool,
    /// Seconds of identical material shared between consecutive events
    /// (event k borrows a passage of event k-1). Produces wrong matches.
    #[serde(default)]
    pub shared_passage: f64,
    /// Range the per-event burst rate is drawn from.
    #[serde(default = "default_burst_rate")]
    pub bursts_per_minute: (f64, f64),
}

fn default_burst_rate() -> (f64, f64) {
    (240.0, 600.0)
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_events: 5,
            clips_per_event: 6,
            event_duration: 120.0,
            clip_duration_range: (25.0, 40.0),
            min_overlap: 10.0,
            snr_range_db: (10.0, 30.0),
            seed: 0,
            scale_pitches: false,
            shared_passage: 0.0,
            bursts_per_minute: default_burst_rate(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), AudioError> {
        let (dmin, dmax) = self.clip_duration_range;
        let (lo, hi) = self.snr_range_db;
        let bad = |msg: &str| Err(AudioError::InvalidSpec(msg.to_string()));
        if self.n_events == 0 || self.clips_per_event == 0 {
            return bad("n_events and clips_per_event must be at least 1");
        }
        if !(self.event_duration > 0.0 && dmin > 0.0 && dmax >= dmin) {
            return bad("durations must be positive with clip min <= clip max");
        }
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return bad("snr range must be finite with lo <= hi");
        }
        let (blo, bhi) = self.bursts_per_minute;
        if !(blo > 0.0 && bhi >= blo) {
            return bad("burst rate range must be positive with lo <= hi");
        }
        if self.min_overlap < 0.0 || self.shared_passage < 0.0 {
            return bad("min_overlap and shared_passage must be non-negative");
        }
        if self.min_overlap >= dmin {
            return Err(AudioError::InfeasibleLayout(format!(
                "min_overlap ({}) must be below the minimum clip duration ({dmin})",
                self.min_overlap
            )));
        }
        if dmax > self.event_duration {
            return Err(AudioError::InfeasibleLayout(format!(
                "maximum clip duration ({dmax}) exceeds event_duration ({})",
                self.event_duration
            )));
        }
        if self.shared_passage >= self.event_duration / 2.0 {
            return bad("shared_passage must be shorter than half an event");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipTruth {
    pub id: String,
    pub event: u32,
    /// Seconds on the event timeline.
    pub start: f64,
    pub duration: f64,
    pub snr_db: f64,
}

/// Ground truth for a synthetic corpus, keyed by clip id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub rate: u32,
    pub event_duration: f64,
    pub clips: Vec<ClipTruth>,
}

impl GroundTruth {
    pub fn get(&self, id: &str) -> Option<&ClipTruth> {
        self.clips.iter().find(|c| c.id == id)
    }

    pub fn event_of(&self, id: &str) -> Option<u32> {
        self.get(id).map(|c| c.event)
    }

    /// Clip ids grouped by event, each group sorted.
    pub fn partition(&self) -> Vec<Vec<String>> {
        let mut by_event: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for c in &self.clips {
            by_event.entry(c.event).or_default().push(c.id.clone());
        }
        let mut groups: Vec<Vec<String>> = by_event
            .into_values()
            .map(|mut g| {
                g.sort();
                g
            })
            .collect();
        groups.sort();
        groups
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Chain starts so consecutive clips overlap by at least `min_overlap` and
/// everything fits in `[0, event_duration]`. The first clip starts at 0.
fn layout(durations: &[f64], spec: &SynthSpec, rng: &mut impl Rng) -> Vec<f64> {
    let gaps: Vec<f64> = durations
        .windows(2)
        .map(|w| rng.random::<f64>() * (w[0] - spec.min_overlap))
        .collect();
    let mut prefix = vec![0.0];
    for g in &gaps {
        prefix.push(prefix.last().unwrap() + g);
    }
    // shrink the gaps uniformly until the last end fits
    let scale = prefix
        .iter()
        .zip(durations)
        .filter(|(s, _)| **s > 0.0)
        .map(|(s, d)| (spec.event_duration - d) / s)
        .fold(1.0f64, f64::min)
        .max(0.0);
    prefix.iter().map(|s| s * scale).collect()
}

const MIDI_LO: f64 = 56.0; // ~208 Hz
const MIDI_HI: f64 = 107.0; // ~3951 Hz

fn burst_frequency(rng: &mut impl Rng, scale: bool) -> f64 {
    if scale {
        let note = rng.random_range(MIDI_LO as u32..=MIDI_HI as u32) as f64;
        440.0 * 2f64.powf((note - 69.0) / 12.0)
    } else {
        rng.random_range(200.0..4000.0)
    }
}

fn master_signal(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let rate = PROCESSING_RATE as f64;
    let n = (spec.event_duration * rate).round() as usize;
    let floor = Normal::new(0.0, 0.01).expect("valid sigma");
    let mut x: Vec<f64> = (0..n).map(|_| floor.sample(rng)).collect();

    let (blo, bhi) = spec.bursts_per_minute;
    let per_minute = if bhi > blo { rng.random_range(blo..=bhi) } else { blo };
    let n_bursts = (per_minute * spec.event_duration / 60.0).round() as usize;
    let attack = (0.005 * rate) as usize;
    for _ in 0..n_bursts {
        let start = rng.random_range(0..n);
        let freq = burst_frequency(rng, spec.scale_pitches);
        let dur = rng.random_range(0.1..=1.0);
        let amp = rng.random_range(0.05..=0.5);
        // fundamental plus up to two harmonics below 5 kHz
        let partials: Vec<(f64, f64, f64)> = (1..=rng.random_range(1..=3u32))
            .map(|h| (freq * h as f64, amp / h as f64, rng.random_range(0.0..std::f64::consts::TAU)))
            .filter(|&(f, _, _)| f < 5000.0)
            .collect();
        let len = ((dur * rate) as usize).min(n - start);
        let decay = dur / 3.0;
        for i in 0..len {
            let t = i as f64 / rate;
            let env = if i < attack {
                i as f64 / attack as f64
            } else {
                (-t / decay).exp()
            };
            let tail = ((len - i) as f64 / attack as f64).min(1.0);
            let tone: f64 = partials
                .iter()
                .map(|&(f, a, ph)| a * (std::f64::consts::TAU * f * t + ph).sin())
                .sum();
            x[start + i] += env * tail * tone;
        }
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 0.5 / peak } else { 1.0 };
    x.iter().map(|v| (v * gain) as f32).collect()
}

/// Add white Gaussian noise at `snr_db` relative to the signal's mean power.
/// An infinite SNR leaves the samples untouched. The result is rescaled if
/// it would leave [-1, 1].
pub fn add_white_noise(samples: &mut [f32], snr_db: f64, rng: &mut impl Rng) {
    if samples.is_empty() || snr_db.is_infinite() && snr_db > 0.0 {
        return;
    }
    let power = samples.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / samples.len() as f64;
    let sigma = (power / 10f64.powf(snr_db / 10.0)).sqrt();
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).expect("finite sigma");
        for s in samples.iter_mut() {
            *s += noise.sample(rng) as f32;
        }
    }
    let peak = samples.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    if peak > 0.99 {
        let g = 0.99 / peak;
        samples.iter_mut().for_each(|s| *s *= g);
    }
}

/// Generate a corpus of clips at [`PROCESSING_RATE`] and its ground truth.
/// Deterministic for a fixed spec.
pub fn synth_corpus(spec: &SynthSpec) -> Result<(Vec<AudioClip>, GroundTruth), AudioError> {
    spec.validate()?;
    let rate = PROCESSING_RATE as f64;
    let mut clips = Vec::new();
    let mut truth = GroundTruth {
        rate: PROCESSING_RATE,
        event_duration: spec.event_duration,
        clips: Vec::new(),
    };

    let mut previous_master: Option<Vec<f32>> = None;
    for event in 0..spec.n_events {
        let mut rng = rng_for(spec.seed, event as u64);
        let mut master = master_signal(spec, &mut rng);
        if spec.shared_passage > 0.0 {
            if let Some(prev) = &previous_master {
                // copy a passage of the previous event into this one at a random spot
                let len = (spec.shared_passage * rate) as usize;
                let src = rng.random_range(0..prev.len() - len);
                let dst = rng.random_range(0..master.len() - len);
                master[dst..dst + len].copy_from_slice(&prev[src..src + len]);
            }
            previous_master = Some(master.clone());
        }

        let (dmin, dmax) = spec.clip_duration_range;
        let durations: Vec<f64> = (0..spec.clips_per_event)
            .map(|_| {
                let d = if dmax > dmin { rng.random_range(dmin..=dmax) } else { dmin };
                (d * rate).round() / rate
            })
            .collect();
        let starts = layout(&durations, spec, &mut rng);

        for (c, (&start, &dur)) in starts.iter().zip(&durations).enumerate() {
            let a = (start * rate).round() as usize;
            let len = (dur * rate).round() as usize;
            let b = (a + len).min(master.len());
            let a = b - len;
            let (lo, hi) = spec.snr_range_db;
            let snr = if hi > lo { rng.random_range(lo..=hi) } else { lo };
            let mut samples = master[a..b].to_vec();
            add_white_noise(&mut samples, snr, &mut rng);
            let id = format!("e{event:02}_c{c:02}");
            truth.clips.push(ClipTruth {
                id: id.clone(),
                event: event as u32,
                start: a as f64 / rate,
                duration: len as f64 / rate,
                snr_db: snr,
            });
            clips.push(AudioClip::new(id, samples, PROCESSING_RATE));
        }
    }
    Ok((clips, truth))
}
