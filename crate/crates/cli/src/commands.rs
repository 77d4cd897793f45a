use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};
use serde::{Deserialize, Serialize};

use ugc_core::audio_io::{encode_wav16, read_wav, read_wav_dir, resample_mono, synth_corpus, GroundTruth, SynthSpec};
use ugc_core::config::PipelineConfig;
use ugc_core::event_graph::split_repetitions;
use ugc_core::fingerprint::{fingerprint_all, match_all, FingerprintIndex, MatchingList};
use ugc_core::match_classifier::{
    autolabel, grid_search, select_model, CvResult, Family, FeatureSubset, Sample, Selection, TrainedModel, TrainingSet,
};
use ugc_core::persist::{load_index, save_index};
use ugc_core::pipeline::{run_pipeline, write_cuts};

use crate::{ClassifyArgs, IndexArgs, MatchArgs, PipelineArgs, SynthArgs, TrainArgs};

/// Marks errors caused by how the command was invoked (exit code 2).
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub const SEED_ENV: &str = "UGC_SEED";

/// `UGC_SEED` wins over the flag or config value.
fn seed(fallback: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(fallback),
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::load(p).map_err(|e| usage(format!("config {}: {e}", p.display()))),
    }
}

fn require_exists(path: &Path, what: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{what} {} does not exist", path.display())))
    }
}

/// Expand directories to their sorted `.wav` files.
fn wav_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        require_exists(p, "input")?;
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Pretty JSON with sorted keys.
fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
        }
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r.context("writing to stdout"),
        },
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    require_exists(path, what)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    spec: &'a SynthSpec,
    #[serde(flatten)]
    truth: &'a GroundTruth,
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        n_events: a.events,
        clips_per_event: a.clips,
        event_duration: a.event_duration,
        clip_duration_range: (a.clip_min, a.clip_max),
        min_overlap: a.min_overlap,
        snr_range_db: (a.snr_min, a.snr_max),
        seed: seed(a.seed)?,
        scale_pitches: a.scale_pitches,
        shared_passage: a.shared_passage,
        ..SynthSpec::default()
    };
    let (clips, truth) = synth_corpus(&spec)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for clip in &clips {
        let path = a.out.join(format!("{}.wav", clip.id));
        std::fs::write(&path, encode_wav16(clip)).with_context(|| format!("writing {}", path.display()))?;
    }
    write_out(Some(&a.out.join("manifest.json")), &to_json(&Manifest { spec: &spec, truth: &truth })?)?;
    info!("wrote {} clips to {}", clips.len(), a.out.display());
    Ok(())
}

pub fn index(a: IndexArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let fp_cfg = &cfg.fingerprint;
    let clips = wav_inputs(&a.inputs)?
        .iter()
        .map(|p| Ok(resample_mono(&read_wav(p)?, fp_cfg.rate)))
        .collect::<Result<Vec<_>>>()?;
    let mut index = FingerprintIndex::new(fp_cfg.clone());
    for (clip, fp) in clips.iter().zip(fingerprint_all(&clips, fp_cfg)) {
        match fp {
            Ok(fp) if !fp.landmarks.is_empty() => index.add_clip(&fp.clip_id, fp.duration, &fp.landmarks)?,
            Ok(_) => warn!("{}: no landmarks, not indexed", clip.id),
            Err(e) => warn!("{}: {e}, not indexed", clip.id),
        }
    }
    save_index(&index, &a.out)?;
    info!("indexed {} clips, {} postings", index.len(), index.posting_count());
    Ok(())
}

/// Matching lists plus the grid they were computed on.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatchesFile {
    pub version: u32,
    pub rate: u32,
    pub window: usize,
    pub hop: usize,
    pub match_threshold: u32,
    pub lists: Vec<MatchingList>,
}

pub fn match_files(a: MatchArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let paths = wav_inputs(&a.inputs)?;
    let (fp_cfg, lists) = match &a.index {
        Some(path) => {
            require_exists(path, "index")?;
            let index = load_index(path, &cfg.fingerprint)?;
            let fp_cfg = index.config().clone();
            let clips = paths
                .iter()
                .map(|p| Ok(resample_mono(&read_wav(p)?, fp_cfg.rate)))
                .collect::<Result<Vec<_>>>()?;
            let mut lists = Vec::new();
            for (clip, fp) in clips.iter().zip(fingerprint_all(&clips, &fp_cfg)) {
                let landmarks = fp.map(|f| f.landmarks).unwrap_or_default();
                lists.push(index.query(&clip.id, &landmarks, &fp_cfg)?);
            }
            (fp_cfg, lists)
        }
        None => {
            let fp_cfg = cfg.fingerprint.clone();
            let clips = paths
                .iter()
                .map(|p| Ok(resample_mono(&read_wav(p)?, fp_cfg.rate)))
                .collect::<Result<Vec<_>>>()?;
            let fps = fingerprint_all(&clips, &fp_cfg)
                .into_iter()
                .zip(&clips)
                .filter_map(|(fp, clip)| match fp {
                    Ok(fp) if !fp.landmarks.is_empty() => Some(fp),
                    _ => {
                        warn!("{}: no landmarks, skipped", clip.id);
                        None
                    }
                })
                .collect::<Vec<_>>();
            let (_, lists) = match_all(&fps, &fp_cfg)?;
            (fp_cfg, lists)
        }
    };
    let file = MatchesFile {
        version: 1,
        rate: fp_cfg.rate,
        window: fp_cfg.window,
        hop: fp_cfg.hop,
        match_threshold: fp_cfg.match_threshold,
        lists,
    };
    write_out(Some(&a.out), &to_json(&file)?)
}

fn load_model(path: &Path) -> Result<TrainedModel> {
    require_exists(path, "model")?;
    Ok(TrainedModel::load(path)?)
}

pub fn pipeline(a: PipelineArgs) -> Result<()> {
    let mut cfg = load_config(a.config.as_deref())?;
    cfg.seed = seed(cfg.seed)?;
    let corpus = a
        .corpus
        .or(cfg.input.clone())
        .ok_or_else(|| usage("no corpus directory given (argument or `input` in the config)"))?;
    require_exists(&corpus, "corpus")?;
    if !corpus.is_dir() {
        bail!(usage(format!("corpus {} is not a directory", corpus.display())));
    }
    let model = match a.model.or(cfg.model.clone()) {
        Some(p) => Some(load_model(&p)?),
        None => None,
    };
    let clips = read_wav_dir(&corpus)?;
    let out = run_pipeline(&clips, &cfg, model.as_ref())?;
    if let Some(dir) = a.emit_cuts.or(cfg.emit_cuts.clone()) {
        let written = write_cuts(&out, &clips, &dir)?;
        info!("wrote {} cuts to {}", written.len(), dir.display());
    }
    if let Some(path) = &a.expansion_out {
        write_out(Some(path), &to_json(&out.expansion.samples())?)?;
    }
    write_out(a.out.or(cfg.output.clone()).as_deref(), &out.report.to_json())
}

#[derive(Serialize)]
struct CvReport<'a> {
    rows: &'a [CvResult],
    selected: &'a Selection,
    samples: usize,
    songs: usize,
}

fn parse_list<T: std::str::FromStr>(v: &str, what: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| usage(format!("bad {what} value {s:?}"))))
        .collect()
}

pub fn train(a: TrainArgs) -> Result<()> {
    let manifest = a.manifest.ok_or_else(|| usage("--manifest is required to label matches"))?;
    require_exists(&manifest, "manifest")?;
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(f) = &a.family {
        cfg.families = match f.as_str() {
            "both" => vec![Family::LogReg, Family::Knn],
            other => vec![other.parse().map_err(|e| usage(format!("{e}")))?],
        };
    }
    if let Some(s) = &a.subset {
        cfg.subsets = vec![s.parse::<FeatureSubset>().map_err(|e| usage(format!("{e}")))?];
    }
    if let Some(g) = &a.c_grid {
        cfg.c_grid = Some(parse_list(g, "c")?);
    }
    if let Some(g) = &a.k_grid {
        cfg.k_grid = Some(parse_list(g, "k")?);
    }
    let seed = seed(a.seed.unwrap_or(cfg.seed))?;

    let truth: GroundTruth = read_json(&manifest, "manifest")?;
    let matches: MatchesFile = read_json(&a.matches, "matches file")?;
    let mut set: TrainingSet = autolabel(&matches.lists, Some(&truth)).into_iter().collect();
    for path in &a.extra_samples {
        let extra: Vec<Sample> = read_json(path, "samples file")?;
        let added = set.extend(extra);
        info!("{}: {added} new samples", path.display());
    }
    let samples = set.into_samples();

    let mut rows = Vec::new();
    for family in cfg.search_families() {
        rows.extend(grid_search(&samples, family, &cfg.grid(family), &cfg.subsets, seed)?);
    }
    let selection = select_model(&rows, cfg.require_clean_wrong && !a.allow_wrong)?;
    if selection.degraded {
        warn!("every model accepted at least one wrong match; keeping the lowest validation error");
    }
    let chosen = &selection.result;
    let mut model = TrainedModel::fit(&samples, chosen.family, chosen.param, chosen.subset, seed)?;
    model.cv = Some(chosen.clone());
    model.degraded = selection.degraded;
    model.save(&a.out)?;

    if let Some(path) = &a.cv_report {
        let report = CvReport {
            rows: &rows,
            selected: &selection,
            samples: samples.len(),
            songs: chosen.outer_iterations,
        };
        write_out(Some(path), &to_json(&report)?)?;
    }
    eprintln!(
        "selected {} param={} subset={} accuracy={:.4} validation_error={:.4} wrong_fp={}{}",
        chosen.family,
        chosen.param,
        chosen.subset,
        chosen.accuracy,
        chosen.validation_error,
        chosen.wrong_match_false_positives,
        if selection.degraded { " (degraded)" } else { "" }
    );
    Ok(())
}

#[derive(Serialize)]
struct Prediction<'a> {
    query_id: &'a str,
    clip_id: &'a str,
    offset_frames: i32,
    offset_seconds: f64,
    primary: bool,
    class: u8,
    score: f64,
}

pub fn classify(a: ClassifyArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let matches: MatchesFile = read_json(&a.matches, "matches file")?;
    let mut rows = Vec::new();
    let mut owned = Vec::new();
    for list in &matches.lists {
        let (primaries, repetitions) = split_repetitions(list);
        owned.extend(primaries.into_iter().map(|e| (e, true)));
        owned.extend(repetitions.into_iter().map(|e| (e, false)));
    }
    for (e, primary) in &owned {
        let (class, score) = model.predict(&ugc_core::match_classifier::featurize(e));
        rows.push(Prediction {
            query_id: &e.query_id,
            clip_id: &e.clip_id,
            offset_frames: e.offset_frames,
            offset_seconds: e.offset_seconds,
            primary: *primary,
            class,
            score,
        });
    }
    write_out(a.out.as_deref(), &to_json(&rows)?)
}
