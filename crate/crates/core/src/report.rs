//! JSON summary of a pipeline run.

use serde::{Deserialize, Serialize};

use crate::event_graph::MutualResidual;
use crate::match_classifier::{Family, FeatureSubset};
use crate::timeline::{ClipCut, EdgeResidual, QualityScore};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub version: u32,
    pub events: Vec<EventReport>,
    /// Clips that could not be fingerprinted (too short or no landmarks).
    pub unmatched: Vec<String>,
    /// Disagreements between the two directions of mutual matches.
    pub mutual_residuals: Vec<MutualResidual>,
    pub classifier: Option<ClassifierSummary>,
    pub expansion: ExpansionSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub cluster_id: String,
    pub representative: String,
    pub earliest: String,
    pub clips: Vec<ClipPlacement>,
    pub segments: Vec<SegmentReport>,
    /// Edges checked against the recovered positions.
    pub residuals: Vec<EdgeResidual>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipPlacement {
    pub clip_id: String,
    /// Seconds after the earliest clip starts.
    pub position: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub t_start: f64,
    pub t_end: f64,
    pub cuts: Vec<ClipCut>,
    /// Best clip first.
    pub ranking: Vec<QualityScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub family: Family,
    pub param: f64,
    pub subset: FeatureSubset,
    pub accuracy: Option<f64>,
    pub validation_error: Option<f64>,
    pub wrong_match_false_positives: Option<usize>,
    pub degraded: bool,
    /// Primary matches the classifier rejected.
    pub rejected_matches: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSummary {
    pub repetition_samples: usize,
    pub confirmed_samples: usize,
    pub vacuous_samples: usize,
    /// Clusters whose every segment matched pairwise at offset zero.
    pub confirmed_clusters: Vec<String>,
}

impl PipelineReport {
    /// Pretty JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is always serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Every clip id mentioned, events first then unmatched.
    pub fn clip_ids(&self) -> Vec<&str> {
        self.events
            .iter()
            .flat_map(|e| e.clips.iter().map(|c| c.clip_id.as_str()))
            .chain(self.unmatched.iter().map(String::as_str))
            .collect()
    }
}
