use serde::{Deserialize, Serialize};

use super::FingerprintError;
use crate::audio_io::PROCESSING_RATE;

/// Landmark extraction and matching parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FpConfig {
    pub rate: u32,
    /// STFT window length in samples, a power of two.
    pub window: usize,
    pub hop: usize,
    /// Target peaks per second after global thinning.
    pub peak_density: f64,
    /// Maximum landmarks formed per anchor peak.
    pub fanout: usize,
    pub dt_min: u32,
    pub dt_max: u32,
    /// Largest allowed |f2 - f1| in bins.
    pub df_max: i32,
    /// Minimum matching landmarks at one offset to declare a match.
    pub match_threshold: u32,
    /// Offset histogram bins within this many frames are merged.
    pub offset_merge: i32,
    pub log_floor: f32,
    /// Half-size of the local-maximum neighborhood in frames.
    pub peak_frames: usize,
    /// Half-size of the local-maximum neighborhood in bins.
    pub peak_bins: usize,
}

impl Default for FpConfig {
    fn default() -> Self {
        Self {
            rate: PROCESSING_RATE,
            window: 512,
            hop: 256,
            peak_density: 20.0,
            fanout: 3,
            dt_min: 1,
            dt_max: 63,
            df_max: 63,
            match_threshold: 5,
            offset_merge: 1,
            log_floor: -10.0,
            peak_frames: 3,
            peak_bins: 3,
        }
    }
}

impl FpConfig {
    /// The denser, threshold-1 configuration used when ranking clips inside
    /// a segment.
    pub fn high_density(&self, multiplier: f64) -> Self {
        Self {
            peak_density: self.peak_density * multiplier,
            match_threshold: 1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), FingerprintError> {
        let bad = |msg: String| Err(FingerprintError::InvalidConfig(msg));
        if self.rate == 0 {
            return bad("rate must be positive".into());
        }
        if !self.window.is_power_of_two() || self.window < 4 {
            return bad(format!("window {} is not a power of two", self.window));
        }
        if self.hop == 0 || self.hop > self.window {
            return bad(format!("hop {} must be in 1..=window", self.hop));
        }
        if !(self.peak_density > 0.0) {
            return bad("peak_density must be positive".into());
        }
        if self.fanout == 0 || self.match_threshold == 0 {
            return bad("fanout and match_threshold must be at least 1".into());
        }
        if self.dt_min == 0 || self.dt_min > self.dt_max || self.dt_max > 63 {
            return bad("dt range must satisfy 1 <= dt_min <= dt_max <= 63".into());
        }
        if !(0..=63).contains(&self.df_max) {
            return bad("df_max must be in 0..=63".into());
        }
        if self.offset_merge < 0 {
            return bad("offset_merge must be non-negative".into());
        }
        if !self.log_floor.is_finite() {
            return bad("log_floor must be finite".into());
        }
        Ok(())
    }

    pub fn seconds_per_frame(&self) -> f64 {
        self.hop as f64 / self.rate as f64
    }

    /// Whether two configs produce comparable frame and bin grids.
    pub fn same_grid(&self, other: &FpConfig) -> bool {
        self.rate == other.rate && self.window == other.window && self.hop == other.hop
    }
}
