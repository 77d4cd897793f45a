use rustfft::{num_complex::Complex, FftPlanner};

use super::{FingerprintError, FpConfig};
use crate::audio_io::AudioClip;

/// Log-magnitude STFT, stored frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<f32>,
    pub seconds_per_frame: f64,
}

impl Spectrogram {
    pub fn get(&self, frame: usize, bin: usize) -> f32 {
        self.data[frame * self.bins + bin]
    }

    pub fn frame(&self, frame: usize) -> &[f32] {
        &self.data[frame * self.bins..(frame + 1) * self.bins]
    }

    pub fn duration(&self) -> f64 {
        self.frames as f64 * self.seconds_per_frame
    }
}

fn hann(len: usize) -> Vec<f32> {
    (0..len)
        .map(|n| {
            let x = std::f64::consts::TAU * n as f64 / len as f64;
            (0.5 - 0.5 * x.cos()) as f32
        })
        .collect()
}

/// Hann-windowed STFT with `ln |X|` floored at `cfg.log_floor`.
pub fn spectrogram(clip: &AudioClip, cfg: &FpConfig) -> Result<Spectrogram, FingerprintError> {
    if clip.rate != cfg.rate {
        return Err(FingerprintError::RateMismatch {
            expected: cfg.rate,
            found: clip.rate,
        });
    }
    spectrogram_of(&clip.samples, cfg)
}

pub(crate) fn spectrogram_of(samples: &[f32], cfg: &FpConfig) -> Result<Spectrogram, FingerprintError> {
    let n = samples.len();
    if n < cfg.window {
        return Err(FingerprintError::TooShort {
            samples: n,
            window: cfg.window,
        });
    }
    let frames = (n - cfg.window) / cfg.hop + 1;
    let bins = cfg.window / 2 + 1;
    let window = hann(cfg.window);
    let fft = FftPlanner::<f32>::new().plan_fft_forward(cfg.window);

    let mut data = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex::new(0.0f32, 0.0); cfg.window];
    let mut scratch = vec![Complex::new(0.0f32, 0.0); fft.get_inplace_scratch_len()];
    for f in 0..frames {
        let start = f * cfg.hop;
        for (slot, (&s, &w)) in buf.iter_mut().zip(samples[start..start + cfg.window].iter().zip(&window)) {
            *slot = Complex::new(s * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        data.extend(buf[..bins].iter().map(|c| c.norm().ln().max(cfg.log_floor)));
    }
    Ok(Spectrogram {
        frames,
        bins,
        data,
        seconds_per_frame: cfg.seconds_per_frame(),
    })
}
