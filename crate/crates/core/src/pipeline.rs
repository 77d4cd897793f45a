//! End-to-end run: fingerprint, match, cluster, align, segment, rank.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use log::{debug, info};
use thiserror::Error;

use crate::audio_io::{encode_wav16, resample_mono, AudioClip};
use crate::config::PipelineConfig;
use crate::event_graph::{build_graph, connected_components, split_repetitions, Cluster, MatchFilter, MatchGraph};
use crate::fingerprint::{fingerprint_all, match_all, FingerprintError, FingerprintIndex, MatchingList};
use crate::match_classifier::{confirm_cluster, expand_from_repetitions, Sample, TrainedModel, TrainingSet};
use crate::report::{
    ClassifierSummary, ClipPlacement, EventReport, ExpansionSummary, PipelineReport, SegmentReport, REPORT_VERSION,
};
use crate::timeline::{
    assign_offsets, build_segments, consistency_report, normalize_positions, segment_quality, PositionMap, Segment,
    SegmentQuality, TimelineError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("clip id {0:?} appears more than once")]
    DuplicateClip(String),
    #[error(transparent)]
    Fingerprint(#[from] FingerprintError),
    #[error(transparent)]
    Timeline(#[from] TimelineError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Everything one event produced.
#[derive(Debug, Clone)]
pub struct EventResult {
    pub cluster: Cluster,
    pub positions: PositionMap,
    pub segments: Vec<Segment>,
    pub qualities: Vec<SegmentQuality>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub index: FingerprintIndex,
    pub lists: Vec<MatchingList>,
    pub graph: MatchGraph,
    pub events: Vec<EventResult>,
    /// Repetition and cluster-confirmation samples, deduplicated.
    pub expansion: TrainingSet,
}

/// Run the whole pipeline over `clips`, optionally filtering primary
/// matches with `model` before clustering.
///
/// Every clip ends up in exactly one event, or in `unmatched` when it
/// yields no landmarks. Clips without any match are singleton events.
pub fn run_pipeline(
    clips: &[AudioClip],
    cfg: &PipelineConfig,
    model: Option<&TrainedModel>,
) -> Result<PipelineOutput, PipelineError> {
    let mut seen = HashSet::new();
    if let Some(dup) = clips.iter().find(|c| !seen.insert(c.id.as_str())) {
        return Err(PipelineError::DuplicateClip(dup.id.clone()));
    }
    let fp_cfg = &cfg.fingerprint;
    let clips: Vec<AudioClip> = clips.iter().map(|c| resample_mono(c, fp_cfg.rate)).collect();
    let by_id: HashMap<String, AudioClip> = clips.iter().map(|c| (c.id.clone(), c.clone())).collect();

    let mut unmatched = Vec::new();
    let mut fingerprints = Vec::new();
    for (clip, fp) in clips.iter().zip(fingerprint_all(&clips, fp_cfg)) {
        match fp {
            Ok(fp) if !fp.landmarks.is_empty() => fingerprints.push(fp),
            Ok(_) | Err(FingerprintError::TooShort { .. }) => unmatched.push(clip.id.clone()),
            Err(e) => return Err(e.into()),
        }
    }
    unmatched.sort();
    info!("fingerprinted {} clips, {} unusable", fingerprints.len(), unmatched.len());

    let (index, lists) = match_all(&fingerprints, fp_cfg)?;
    let filter = model.map(|m| m as &dyn MatchFilter);
    let graph = build_graph(&lists, filter);
    let clusters = connected_components(&graph);
    info!("{} matches form {} events", graph.edges().len() / 2, clusters.len());

    let durations: BTreeMap<String, f64> = fingerprints.iter().map(|f| (f.clip_id.clone(), f.duration)).collect();
    let hi_cfg = cfg.quality_config();
    let mut events = Vec::new();
    let mut event_reports = Vec::new();
    let mut expansion: TrainingSet = expand_from_repetitions(&lists).into_iter().collect();
    let repetition_samples = expansion.len();
    let mut confirmed_clusters = Vec::new();
    let mut confirmed: Vec<Sample> = Vec::new();
    for cluster in clusters {
        let positions = normalize_positions(&assign_offsets(&cluster, &graph)?);
        let segments = build_segments(&positions, &durations);
        let qualities = segments
            .iter()
            .map(|s| segment_quality(s, &by_id, &hi_cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let residuals = consistency_report(&cluster, &graph, &positions, cfg.consistency_eps);
        debug!("event {}: {} clips, {} segments", cluster.id, cluster.members.len(), segments.len());

        let new = confirm_cluster(&cluster, &graph, &qualities);
        if !new.is_empty() {
            confirmed_clusters.push(cluster.id.clone());
            confirmed.extend(new);
        }

        event_reports.push(EventReport {
            cluster_id: cluster.id.clone(),
            representative: positions.representative.clone(),
            earliest: positions.earliest.clone(),
            clips: cluster
                .members
                .iter()
                .map(|m| ClipPlacement {
                    clip_id: m.clone(),
                    position: positions.positions[m],
                    duration: durations[m],
                })
                .collect(),
            segments: segments
                .iter()
                .zip(&qualities)
                .map(|(s, q)| SegmentReport {
                    t_start: s.t_start,
                    t_end: s.t_end,
                    cuts: s.members.clone(),
                    ranking: q.ranking.clone(),
                })
                .collect(),
            residuals,
        });
        events.push(EventResult {
            cluster,
            positions,
            segments,
            qualities,
        });
    }
    let vacuous_samples = confirmed.iter().filter(|s| s.vacuous).count();
    let confirmed_samples = expansion.extend(confirmed);

    let classifier = model.map(|m| {
        let rejected = lists
            .iter()
            .flat_map(|l| split_repetitions(l).0)
            .filter(|e| !m.is_true_match(e))
            .count();
        ClassifierSummary {
            family: m.family,
            param: m.param,
            subset: m.subset,
            accuracy: m.cv.as_ref().map(|c| c.accuracy),
            validation_error: m.cv.as_ref().map(|c| c.validation_error),
            wrong_match_false_positives: m.cv.as_ref().map(|c| c.wrong_match_false_positives),
            degraded: m.degraded,
            rejected_matches: rejected,
        }
    });

    let report = PipelineReport {
        version: REPORT_VERSION,
        events: event_reports,
        unmatched,
        mutual_residuals: graph.residuals().to_vec(),
        classifier,
        expansion: ExpansionSummary {
            repetition_samples,
            confirmed_samples,
            vacuous_samples,
            confirmed_clusters,
        },
    };
    Ok(PipelineOutput {
        report,
        index,
        lists,
        graph,
        events,
        expansion,
    })
}

/// File name for one clip cut: `<clip_id>__<t_start_ms>_<t_end_ms>.wav`,
/// with times on the event timeline.
pub fn cut_file_name(clip_id: &str, t_start: f64, t_end: f64) -> String {
    let ms = |t: f64| (t * 1000.0).round() as i64;
    format!("{clip_id}__{}_{}.wav", ms(t_start), ms(t_end))
}

/// Write every segment cut of every event as 16-bit WAV into `dir`.
/// Returns the written paths.
pub fn write_cuts(output: &PipelineOutput, clips: &[AudioClip], dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let by_id: HashMap<&str, &AudioClip> = clips.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut written = Vec::new();
    for event in &output.events {
        for seg in &event.segments {
            for cut in &seg.members {
                let clip = by_id
                    .get(cut.clip_id.as_str())
                    .ok_or_else(|| TimelineError::MissingClip(cut.clip_id.clone()))?;
                let piece = AudioClip::new(
                    cut.clip_id.clone(),
                    clip.slice_seconds(cut.local_start, cut.local_end).to_vec(),
                    clip.rate,
                );
                let path = dir.join(cut_file_name(&cut.clip_id, seg.t_start, seg.t_end));
                std::fs::write(&path, encode_wav16(&piece)).map_err(io(&path))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
