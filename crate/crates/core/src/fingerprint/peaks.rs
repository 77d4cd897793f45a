use super::{FpConfig, Spectrogram};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPeak {
    pub frame: u32,
    pub bin: u32,
    pub log_mag: f32,
}

/// Neighborhood maximum via two 1-D passes (bins, then frames).
fn neighborhood_max(spec: &Spectrogram, half_frames: usize, half_bins: usize) -> Vec<f32> {
    let (nf, nb) = (spec.frames, spec.bins);
    let mut along_bins = vec![f32::NEG_INFINITY; nf * nb];
    for f in 0..nf {
        let row = spec.frame(f);
        for b in 0..nb {
            let lo = b.saturating_sub(half_bins);
            let hi = (b + half_bins).min(nb - 1);
            along_bins[f * nb + b] = row[lo..=hi].iter().copied().fold(f32::NEG_INFINITY, f32::max);
        }
    }
    let mut out = vec![f32::NEG_INFINITY; nf * nb];
    for f in 0..nf {
        let lo = f.saturating_sub(half_frames);
        let hi = (f + half_frames).min(nf - 1);
        for b in 0..nb {
            out[f * nb + b] = (lo..=hi).map(|g| along_bins[g * nb + b]).fold(f32::NEG_INFINITY, f32::max);
        }
    }
    out
}

fn is_strict_max(spec: &Spectrogram, f: usize, b: usize, half_frames: usize, half_bins: usize) -> bool {
    let v = spec.get(f, b);
    let (f_lo, f_hi) = (f.saturating_sub(half_frames), (f + half_frames).min(spec.frames - 1));
    let (b_lo, b_hi) = (b.saturating_sub(half_bins), (b + half_bins).min(spec.bins - 1));
    (f_lo..=f_hi).all(|g| (b_lo..=b_hi).all(|c| (g, c) == (f, b) || spec.get(g, c) < v))
}

/// Strict local maxima above `log_floor + 1`, thinned to the strongest
/// `peak_density * duration` and returned sorted by (frame, bin).
pub fn extract_peaks(spec: &Spectrogram, cfg: &FpConfig) -> Vec<SpectralPeak> {
    if spec.frames == 0 || spec.bins == 0 {
        return Vec::new();
    }
    let threshold = cfg.log_floor + 1.0;
    let maxima = neighborhood_max(spec, cfg.peak_frames, cfg.peak_bins);
    let mut peaks: Vec<SpectralPeak> = spec
        .data
        .iter()
        .zip(&maxima)
        .enumerate()
        .filter(|(_, (&v, &m))| v > threshold && v == m)
        .map(|(i, (&v, _))| (i / spec.bins, i % spec.bins, v))
        .filter(|&(f, b, _)| is_strict_max(spec, f, b, cfg.peak_frames, cfg.peak_bins))
        .map(|(f, b, v)| SpectralPeak {
            frame: f as u32,
            bin: b as u32,
            log_mag: v,
        })
        .collect();

    let keep = (cfg.peak_density * spec.duration()).round() as usize;
    if peaks.len() > keep {
        peaks.sort_by(|a, b| {
            b.log_mag
                .total_cmp(&a.log_mag)
                .then(a.frame.cmp(&b.frame))
                .then(a.bin.cmp(&b.bin))
        });
        peaks.truncate(keep);
    }
    peaks.sort_by_key(|p| (p.frame, p.bin));
    peaks
}
