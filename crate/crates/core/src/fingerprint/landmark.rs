use serde::{Deserialize, Serialize};

use super::{FingerprintError, FpConfig, SpectralPeak};

/// A pair of spectral peaks anchored at the first peak's frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Landmark {
    pub t1: u32,
    pub f1: u32,
    pub f2: u32,
    pub dt: u32,
}

impl Landmark {
    pub fn df(&self) -> i32 {
        self.f2 as i32 - self.f1 as i32
    }
}

/// Packed 21-bit landmark hash: `f1:8 | (df + 63):7 | dt:6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LandmarkKey(pub u32);

const F1_MAX: u32 = 255;
const DF_BIAS: i32 = 63;
const DT_MAX: u32 = 63;

/// Pack the (f1, df, dt) identity of a landmark.
pub fn pack_key(l: &Landmark) -> Result<LandmarkKey, FingerprintError> {
    pack_parts(l.f1, l.df(), l.dt)
}

pub fn pack_parts(f1: u32, df: i32, dt: u32) -> Result<LandmarkKey, FingerprintError> {
    if f1 > F1_MAX || !(-DF_BIAS..=DF_BIAS).contains(&df) || dt == 0 || dt > DT_MAX {
        return Err(FingerprintError::KeyOutOfRange { f1, df, dt });
    }
    Ok(LandmarkKey((f1 << 13) | (((df + DF_BIAS) as u32) << 6) | dt))
}

/// Inverse of [`pack_key`]: `(f1, df, dt)`.
pub fn unpack_key(k: LandmarkKey) -> (u32, i32, u32) {
    let f1 = (k.0 >> 13) & 0xFF;
    let df = ((k.0 >> 6) & 0x7F) as i32 - DF_BIAS;
    let dt = k.0 & 0x3F;
    (f1, df, dt)
}

/// Pair each anchor with up to `fanout` later peaks inside the target zone,
/// nearest in time first. `peaks` must be sorted by (frame, bin).
///
/// Anchors above bin 255 cannot be packed and are skipped.
pub fn pair_landmarks(peaks: &[SpectralPeak], cfg: &FpConfig) -> Vec<Landmark> {
    let mut out = Vec::new();
    for (i, anchor) in peaks.iter().enumerate() {
        if anchor.bin > F1_MAX {
            continue;
        }
        let mut taken = 0;
        for other in &peaks[i + 1..] {
            let dt = other.frame - anchor.frame;
            if dt > cfg.dt_max {
                break;
            }
            if dt < cfg.dt_min {
                continue;
            }
            if (other.bin as i32 - anchor.bin as i32).abs() > cfg.df_max {
                continue;
            }
            out.push(Landmark {
                t1: anchor.frame,
                f1: anchor.bin,
                f2: other.bin,
                dt,
            });
            taken += 1;
            if taken == cfg.fanout {
                break;
            }
        }
    }
    out
}
