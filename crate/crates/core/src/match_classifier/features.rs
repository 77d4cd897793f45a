use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClassifierError;
use crate::fingerprint::MatchEntry;

/// The four match counts the classifier sees. The offset itself is left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchFeatures {
    pub ml: u32,
    pub tml: u32,
    pub lq: u32,
    pub li: u32,
}

pub fn featurize(entry: &MatchEntry) -> MatchFeatures {
    MatchFeatures {
        ml: entry.ml,
        tml: entry.tml,
        lq: entry.lq,
        li: entry.li,
    }
}

/// Feature subsets evaluated during model selection, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSubset {
    S1,
    S2,
    S3,
    S4,
}

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 4] = [Self::S1, Self::S2, Self::S3, Self::S4];

    pub fn names(self) -> &'static [&'static str] {
        match self {
            Self::S1 => &["ml", "tml"],
            Self::S2 => &["ml", "tml", "lq"],
            Self::S3 => &["ml", "lq", "li"],
            Self::S4 => &["ml", "tml", "lq", "li"],
        }
    }

    pub fn dim(self) -> usize {
        self.names().len()
    }

    pub fn project(self, f: &MatchFeatures) -> Vec<f64> {
        let (ml, tml, lq, li) = (f.ml as f64, f.tml as f64, f.lq as f64, f.li as f64);
        match self {
            Self::S1 => vec![ml, tml],
            Self::S2 => vec![ml, tml, lq],
            Self::S3 => vec![ml, lq, li],
            Self::S4 => vec![ml, tml, lq, li],
        }
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FeatureSubset {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(Self::S1),
            "S2" => Ok(Self::S2),
            "S3" => Ok(Self::S3),
            "S4" => Ok(Self::S4),
            _ => Err(ClassifierError::InvalidParam(format!("unknown feature subset {s:?}"))),
        }
    }
}
