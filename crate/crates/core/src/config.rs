//! Line-based `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Every key must be
//! known; a typo is an error rather than a silently ignored setting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fingerprint::FpConfig;
use crate::match_classifier::{Family, FeatureSubset};
use crate::timeline::DEFAULT_CONSISTENCY_EPS;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub fingerprint: FpConfig,
    /// Peak-density multiplier for segment quality fingerprints.
    pub quality_density: f64,
    pub consistency_eps: f64,
    /// Families searched by training; empty means both.
    pub families: Vec<Family>,
    pub subsets: Vec<FeatureSubset>,
    /// Overrides the default grid of each family when set.
    pub c_grid: Option<Vec<f64>>,
    pub k_grid: Option<Vec<f64>>,
    pub require_clean_wrong: bool,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub emit_cuts: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            fingerprint: FpConfig::default(),
            quality_density: 3.0,
            consistency_eps: DEFAULT_CONSISTENCY_EPS,
            families: vec![Family::LogReg, Family::Knn],
            subsets: FeatureSubset::ALL.to_vec(),
            c_grid: None,
            k_grid: None,
            require_clean_wrong: true,
            seed: 0,
            input: None,
            output: None,
            model: None,
            emit_cuts: None,
        }
    }
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| format!("{s:?}: {e}")))
        .collect()
}

fn one<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| e.to_string())
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl PipelineConfig {
    pub const KEYS: &'static [&'static str] = &[
        "rate",
        "window",
        "hop",
        "peak_density",
        "fanout",
        "dt_min",
        "dt_max",
        "df_max",
        "match_threshold",
        "offset_merge",
        "log_floor",
        "peak_frames",
        "peak_bins",
        "quality_density",
        "consistency_eps",
        "families",
        "subsets",
        "c_grid",
        "k_grid",
        "require_clean_wrong",
        "seed",
        "input",
        "output",
        "model",
        "emit_cuts",
    ];

    /// Apply one setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let fp = &mut self.fingerprint;
        match key {
            "rate" => fp.rate = one(value)?,
            "window" => fp.window = one(value)?,
            "hop" => fp.hop = one(value)?,
            "peak_density" => fp.peak_density = one(value)?,
            "fanout" => fp.fanout = one(value)?,
            "dt_min" => fp.dt_min = one(value)?,
            "dt_max" => fp.dt_max = one(value)?,
            "df_max" => fp.df_max = one(value)?,
            "match_threshold" => fp.match_threshold = one(value)?,
            "offset_merge" => fp.offset_merge = one(value)?,
            "log_floor" => fp.log_floor = one(value)?,
            "peak_frames" => fp.peak_frames = one(value)?,
            "peak_bins" => fp.peak_bins = one(value)?,
            "quality_density" => self.quality_density = one(value)?,
            "consistency_eps" => self.consistency_eps = one(value)?,
            "families" => self.families = list(value)?,
            "subsets" => self.subsets = list(value)?,
            "c_grid" => self.c_grid = Some(list(value)?),
            "k_grid" => self.k_grid = Some(list(value)?),
            "require_clean_wrong" => self.require_clean_wrong = one(value)?,
            "seed" => self.seed = one(value)?,
            "input" => self.input = Some(value.into()),
            "output" => self.output = Some(value.into()),
            "model" => self.model = Some(value.into()),
            "emit_cuts" => self.emit_cuts = Some(value.into()),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (k, v) = trimmed.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (k, v) = (k.trim(), v.trim());
            if !Self::KEYS.contains(&k) {
                return Err(ConfigError::UnknownKey { line, key: k.into() });
            }
            cfg.set(k, v).map_err(|reason| ConfigError::BadValue {
                line,
                key: k.into(),
                reason,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.fingerprint
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.quality_density >= 1.0) {
            return Err(ConfigError::Invalid("quality_density must be at least 1".into()));
        }
        if !(self.consistency_eps >= 0.0) {
            return Err(ConfigError::Invalid("consistency_eps must be non-negative".into()));
        }
        if self.subsets.is_empty() {
            return Err(ConfigError::Invalid("subsets must not be empty".into()));
        }
        Ok(())
    }

    /// Config used to fingerprint segment cuts for quality ranking.
    pub fn quality_config(&self) -> FpConfig {
        self.fingerprint.high_density(self.quality_density)
    }

    pub fn grid(&self, family: Family) -> Vec<f64> {
        let custom = match family {
            Family::LogReg => &self.c_grid,
            Family::Knn => &self.k_grid,
        };
        custom.clone().unwrap_or_else(|| family.default_grid())
    }

    /// Families to search, defaulting to both.
    pub fn search_families(&self) -> Vec<Family> {
        if self.families.is_empty() {
            vec![Family::LogReg, Family::Knn]
        } else {
            self.families.clone()
        }
    }

    /// Render as a config file that parses back to the same value.
    pub fn to_text(&self) -> String {
        let fp = &self.fingerprint;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("rate", fp.rate.to_string());
        kv("window", fp.window.to_string());
        kv("hop", fp.hop.to_string());
        kv("peak_density", format!("{:?}", fp.peak_density));
        kv("fanout", fp.fanout.to_string());
        kv("dt_min", fp.dt_min.to_string());
        kv("dt_max", fp.dt_max.to_string());
        kv("df_max", fp.df_max.to_string());
        kv("match_threshold", fp.match_threshold.to_string());
        kv("offset_merge", fp.offset_merge.to_string());
        kv("log_floor", format!("{:?}", fp.log_floor));
        kv("peak_frames", fp.peak_frames.to_string());
        kv("peak_bins", fp.peak_bins.to_string());
        kv("quality_density", format!("{:?}", self.quality_density));
        kv("consistency_eps", format!("{:?}", self.consistency_eps));
        kv("families", join(&self.families));
        kv("subsets", join(&self.subsets));
        if let Some(g) = &self.c_grid {
            kv("c_grid", join(g));
        }
        if let Some(g) = &self.k_grid {
            kv("k_grid", join(g));
        }
        kv("require_clean_wrong", self.require_clean_wrong.to_string());
        kv("seed", self.seed.to_string());
        for (k, p) in [("input", &self.input), ("output", &self.output), ("model", &self.model), ("emit_cuts", &self.emit_cuts)] {
            if let Some(p) = p {
                kv(k, p.display().to_string());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys_and_comments() {
        let cfg = PipelineConfig::parse(
            "# tuned\n\nmatch_threshold = 7\npeak_density=25.5\nfamilies = knn\nsubsets = S1, S3\nseed = 42\nk_grid = 1,3,5\n",
        )
        .unwrap();
        assert_eq!(cfg.fingerprint.match_threshold, 7);
        assert_eq!(cfg.fingerprint.peak_density, 25.5);
        assert_eq!(cfg.families, vec![Family::Knn]);
        assert_eq!(cfg.subsets, vec![FeatureSubset::S1, FeatureSubset::S3]);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.grid(Family::Knn), vec![1.0, 3.0, 5.0]);
        assert_eq!(cfg.grid(Family::LogReg).len(), 20);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = PipelineConfig::parse("match_treshold = 7\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 1, .. }), "{err}");
    }

    #[test]
    fn bad_values_and_syntax() {
        assert!(matches!(PipelineConfig::parse("hop = many"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(PipelineConfig::parse("just words"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(PipelineConfig::parse("window = 500"), Err(ConfigError::Invalid(_))));
        assert!(matches!(PipelineConfig::parse("subsets = S7"), Err(ConfigError::BadValue { .. })));
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = PipelineConfig::default();
        cfg.set("c_grid", "1,2,0.5").unwrap();
        cfg.set("output", "out/report.json").unwrap();
        cfg.fingerprint.log_floor = -9.5;
        assert_eq!(PipelineConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(PipelineConfig::parse(&PipelineConfig::default().to_text()).unwrap(), PipelineConfig::default());
    }
}
