//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ugc_core::audio_io::{add_white_noise, synth_corpus, AudioClip, ClipTruth, GroundTruth, SynthSpec};
use ugc_core::config::PipelineConfig;
use ugc_core::event_graph::{build_graph, connected_components, split_repetitions};
use ugc_core::fingerprint::{fingerprint_all, fingerprint_clip, match_all, FingerprintIndex, FpConfig, MatchEntry, MatchingList};
use ugc_core::match_classifier::{
    autolabel, confirm_cluster, grid_search, objective, select_model, songs, ClassifierError, Family, FeatureSubset,
    SampleKind, TrainedModel,
};
use ugc_core::persist::{decode_index, encode_index, PersistError, INDEX_VERSION};
use ugc_core::pipeline::run_pipeline;
use ugc_core::timeline::{
    assign_offsets, build_segments, normalize_positions, segment_quality, PositionMap, Segment, SegmentQuality,
};

/// Seeds of the default five-event corpus used by criteria 1 and 2.
const RECOVERY_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const REQUIRED_RAND_INDEX: f64 = 1.0;
const MAX_PIPELINE_SECONDS: f64 = 120.0;
/// Two STFT hops at the processing rate.
const MAX_ALIGNMENT_ERROR: f64 = 2.0 * 256.0 / 11025.0;
const SEGMENT_LAYOUTS: usize = 200;
const MAX_LAYOUT_CLIPS: usize = 10;
const SELF_MATCH_CLIPS: usize = 50;
const REPETITION_LISTS: usize = 10_000;
const MIN_LABELED_MATCHES: usize = 500;
const MIN_QUERY_SONGS: usize = 8;
const MIN_POOLED_ACCURACY: f64 = 0.90;
const GRADIENT_INSTANCES: usize = 20;
const MAX_GRADIENT_REL_ERROR: f64 = 1e-5;
const QUALITY_TRIALS: usize = 50;
const MIN_QUALITY_AGREEMENT: f64 = 0.90;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Fraction of clip pairs on which two partitions agree.
fn rand_index(a: &[Vec<String>], b: &[Vec<String>]) -> f64 {
    let label = |p: &[Vec<String>]| -> HashMap<String, usize> {
        p.iter().enumerate().flat_map(|(i, g)| g.iter().map(move |c| (c.clone(), i))).collect()
    };
    let (la, lb) = (label(a), label(b));
    let ids: Vec<&String> = la.keys().collect();
    if ids.len() != lb.len() || ids.iter().any(|id| !lb.contains_key(*id)) {
        return 0.0;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let same_a = la[ids[i]] == la[ids[j]];
            let same_b = lb[ids[i]] == lb[ids[j]];
            agree += (same_a == same_b) as usize;
            total += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

struct RecoveryRun {
    rand_index: f64,
    max_alignment_error: f64,
    elapsed: Duration,
}

fn recovery_runs() -> Vec<(u64, RecoveryRun)> {
    RECOVERY_SEEDS
        .iter()
        .map(|&seed| {
            let start = Instant::now();
            let (clips, truth) = synth_corpus(&SynthSpec { seed, ..SynthSpec::default() }).expect("synth");
            let out = run_pipeline(&clips, &PipelineConfig::default(), None).expect("pipeline");
            let elapsed = start.elapsed();

            let got: Vec<Vec<String>> = out
                .report
                .events
                .iter()
                .map(|e| e.clips.iter().map(|c| c.clip_id.clone()).collect())
                .chain(out.report.unmatched.iter().map(|u| vec![u.clone()]))
                .collect();
            let ri = rand_index(&got, &truth.partition());

            let mut max_err: f64 = 0.0;
            for e in &out.report.events {
                let base = e
                    .clips
                    .iter()
                    .map(|c| truth.get(&c.clip_id).unwrap().start)
                    .fold(f64::INFINITY, f64::min);
                for c in &e.clips {
                    max_err = max_err.max((c.position - (truth.get(&c.clip_id).unwrap().start - base)).abs());
                }
            }
            (
                seed,
                RecoveryRun {
                    rand_index: ri,
                    max_alignment_error: max_err,
                    elapsed,
                },
            )
        })
        .collect()
}

fn criterion_1(runs: &[(u64, RecoveryRun)]) -> Outcome {
    let worst_ri = runs.iter().map(|(_, r)| r.rand_index).fold(f64::INFINITY, f64::min);
    let slowest = runs.iter().map(|(_, r)| r.elapsed.as_secs_f64()).fold(0.0, f64::max);
    let per_seed: Vec<String> = runs.iter().map(|(s, r)| format!("seed {s}: {:.3}", r.rand_index)).collect();
    check(
        worst_ri >= REQUIRED_RAND_INDEX && slowest < MAX_PIPELINE_SECONDS,
        format!(
            "Rand index {} (required {REQUIRED_RAND_INDEX}); slowest run {slowest:.1} s (limit {MAX_PIPELINE_SECONDS} s)",
            per_seed.join(", ")
        ),
    )
}

fn criterion_2(runs: &[(u64, RecoveryRun)]) -> Outcome {
    let worst = runs.iter().map(|(_, r)| r.max_alignment_error).fold(0.0, f64::max);
    check(
        worst <= MAX_ALIGNMENT_ERROR,
        format!("max alignment error {:.4} s (limit {MAX_ALIGNMENT_ERROR:.4} s)", worst),
    )
}

/// Segments read off a 1 ms grid: consecutive milliseconds with the same
/// non-empty active set form one segment.
fn grid_oracle(layout: &[(String, i64, i64)]) -> Vec<(i64, i64, BTreeSet<String>)> {
    let end = layout.iter().map(|(_, p, d)| p + d).max().unwrap_or(0);
    let mut out: Vec<(i64, i64, BTreeSet<String>)> = Vec::new();
    for t in 0..end {
        let active: BTreeSet<String> =
            layout.iter().filter(|(_, p, d)| *p <= t && t < p + d).map(|(id, _, _)| id.clone()).collect();
        if active.is_empty() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 == t && last.2 == active => last.1 = t + 1,
            _ => out.push((t, t + 1, active)),
        }
    }
    out
}

fn random_layout(rng: &mut ChaCha8Rng) -> Vec<(String, i64, i64)> {
    let n = rng.random_range(1..=MAX_LAYOUT_CLIPS);
    let mut layout: Vec<(String, i64, i64)> = Vec::new();
    for i in 0..n {
        let d = rng.random_range(1..=20_000);
        // Reuse existing boundaries now and then so coincident cuts occur.
        let p = if !layout.is_empty() && rng.random_bool(0.3) {
            let (_, q, e) = &layout[rng.random_range(0..layout.len())];
            if rng.random_bool(0.5) {
                *q
            } else {
                q + e
            }
        } else {
            rng.random_range(0..=40_000)
        };
        layout.push((format!("c{i:02}"), p, d));
    }
    let min = layout.iter().map(|l| l.1).min().unwrap();
    layout.iter_mut().for_each(|l| l.1 -= min);
    layout
}

fn segments_in_ms(segs: &[Segment], layout: &[(String, i64, i64)]) -> Result<Vec<(i64, i64, BTreeSet<String>)>, String> {
    let pos: HashMap<&str, i64> = layout.iter().map(|(id, p, _)| (id.as_str(), *p)).collect();
    let ms = |t: f64| -> Result<i64, String> {
        let r = (t * 1000.0).round();
        if (t * 1000.0 - r).abs() > 1e-6 {
            return Err(format!("boundary {t} is off the millisecond grid"));
        }
        Ok(r as i64)
    };
    segs.iter()
        .map(|s| {
            let (a, b) = (ms(s.t_start)?, ms(s.t_end)?);
            for cut in &s.members {
                let p = pos[cut.clip_id.as_str()];
                if ms(cut.local_start)? != a - p || ms(cut.local_end)? != b - p {
                    return Err(format!("cut of {} has wrong local times", cut.clip_id));
                }
            }
            Ok((a, b, s.members.iter().map(|c| c.clip_id.clone()).collect()))
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..SEGMENT_LAYOUTS {
        let layout = random_layout(&mut rng);
        let positions: BTreeMap<String, f64> = layout.iter().map(|(id, p, _)| (id.clone(), *p as f64 / 1000.0)).collect();
        let durations: BTreeMap<String, f64> = layout.iter().map(|(id, _, d)| (id.clone(), *d as f64 / 1000.0)).collect();
        let earliest = layout.iter().find(|l| l.1 == 0).unwrap().0.clone();
        let pm = PositionMap {
            cluster_id: layout[0].0.clone(),
            representative: layout[0].0.clone(),
            earliest,
            raw: positions.clone(),
            positions,
        };
        let got = segments_in_ms(&build_segments(&pm, &durations), &layout).map_err(|e| format!("layout {trial}: {e}"))?;
        let want = grid_oracle(&layout);
        if got != want {
            return Err(format!("layout {trial}: {} segments, oracle {}", got.len(), want.len()));
        }
    }
    Ok(format!("{SEGMENT_LAYOUTS} layouts of up to {MAX_LAYOUT_CLIPS} clips match the 1 ms grid oracle exactly"))
}

fn criterion_4() -> Outcome {
    let cfg = FpConfig::default();
    let (clips, _) = synth_corpus(&SynthSpec {
        n_events: 10,
        clips_per_event: SELF_MATCH_CLIPS / 10,
        seed: 44,
        ..SynthSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let fps: Vec<_> = fingerprint_all(&clips, &cfg).into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut index = FingerprintIndex::new(cfg.clone());
    for fp in &fps {
        index.add_clip(&fp.clip_id, fp.duration, &fp.landmarks).map_err(|e| e.to_string())?;
    }
    let mut failures = Vec::new();
    for fp in &fps {
        let list = index.query("probe", &fp.landmarks, &cfg).map_err(|e| e.to_string())?;
        let (primaries, _) = split_repetitions(&list);
        let own = primaries.iter().find(|e| e.clip_id == fp.clip_id);
        match own {
            Some(e) if e.offset_frames == 0 && e.ml as usize == fp.landmarks.len() => {}
            Some(e) => failures.push(format!("{}: offset {} ml {} #L {}", fp.clip_id, e.offset_frames, e.ml, fp.landmarks.len())),
            None => failures.push(format!("{}: no self match", fp.clip_id)),
        }
    }
    let n = fps.len();
    check(
        failures.is_empty() && n == SELF_MATCH_CLIPS,
        format!("{}/{n} clips return offset 0 with ml = #L{}", n - failures.len(), failure_suffix(&failures)),
    )
}

fn failure_suffix(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!("; first failures: {}", failures.iter().take(3).cloned().collect::<Vec<_>>().join("; "))
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = Vec::new();
    let mut samples_checked = 0usize;
    for n in 0..REPETITION_LISTS {
        let n_clips = rng.random_range(1..=6);
        let events: Vec<u32> = (0..=n_clips).map(|_| rng.random_range(0..3)).collect();
        let truth = GroundTruth {
            rate: 11025,
            event_duration: 60.0,
            clips: (0..=n_clips)
                .map(|i| ClipTruth {
                    id: format!("k{i}"),
                    event: events[i],
                    start: 0.0,
                    duration: 10.0,
                    snr_db: 20.0,
                })
                .collect(),
        };
        let mut entries = Vec::new();
        for c in 1..=n_clips {
            let mut offsets = BTreeSet::new();
            for _ in 0..rng.random_range(1..=4) {
                offsets.insert(rng.random_range(-300..300));
            }
            for o in offsets {
                entries.push(MatchEntry {
                    query_id: "k0".into(),
                    clip_id: format!("k{c}"),
                    offset_frames: o,
                    offset_seconds: o as f64 * 256.0 / 11025.0,
                    ml: rng.random_range(5..40),
                    tml: 0,
                    lq: 500,
                    li: 500,
                });
            }
        }
        let list = MatchingList {
            query_id: "k0".into(),
            entries,
        };
        let (primaries, repetitions) = split_repetitions(&list);
        for c in 1..=n_clips {
            let id = format!("k{c}");
            let max_ml = list.entries.iter().filter(|e| e.clip_id == id).map(|e| e.ml).max().unwrap();
            let prim: Vec<_> = primaries.iter().filter(|e| e.clip_id == id).collect();
            if prim.len() != 1 || prim[0].ml != max_ml {
                violations.push(format!("list {n}: primary of {id} is not the ml argmax"));
            }
        }
        if primaries.len() + repetitions.len() != list.entries.len() {
            violations.push(format!("list {n}: entries lost in the split"));
        }
        let samples = autolabel(std::slice::from_ref(&list), Some(&truth));
        if samples.len() != list.entries.len() {
            violations.push(format!("list {n}: {} samples for {} entries", samples.len(), list.entries.len()));
        }
        for s in &samples {
            samples_checked += 1;
            let is_primary = primaries.iter().any(|p| p.clip_id == s.clip_id && p.offset_frames == s.offset_frames);
            let cross = events[0] != events[s.clip_id[1..].parse::<usize>().unwrap()];
            let expected = match (is_primary, cross) {
                (false, _) => SampleKind::Repetition,
                (true, true) => SampleKind::Wrong,
                (true, false) => SampleKind::True,
            };
            if s.kind != expected || s.class != expected.class() {
                violations.push(format!("list {n}: {} at {} labeled {:?}/{}", s.clip_id, s.offset_frames, s.kind, s.class));
            }
        }
    }
    check(
        violations.is_empty(),
        format!(
            "{} violations over {REPETITION_LISTS} lists ({samples_checked} samples){}",
            violations.len(),
            failure_suffix(&violations)
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let spec = SynthSpec {
        n_events: 12,
        clips_per_event: 8,
        scale_pitches: true,
        seed: 11,
        ..SynthSpec::default()
    };
    let (clips, truth) = synth_corpus(&spec).map_err(|e| e.to_string())?;
    let cfg = FpConfig::default();
    let fps: Vec<_> = fingerprint_all(&clips, &cfg).into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (_, lists) = match_all(&fps, &cfg).map_err(|e| e.to_string())?;
    let data = autolabel(&lists, Some(&truth));
    let n_songs = songs(&data).len();
    let wrong = data.iter().filter(|s| s.kind == SampleKind::Wrong).count();
    if data.len() < MIN_LABELED_MATCHES || n_songs < MIN_QUERY_SONGS {
        return Err(format!("corpus too small: {} samples over {n_songs} songs", data.len()));
    }
    let mut rows = Vec::new();
    for family in [Family::LogReg, Family::Knn] {
        rows.extend(grid_search(&data, family, &family.default_grid(), &FeatureSubset::ALL, 0).map_err(|e| e.to_string())?);
    }
    let sel = select_model(&rows, true).map_err(|e| e.to_string())?;
    let r = &sel.result;
    let iterations_ok = rows.iter().all(|row| row.outer_iterations == n_songs);
    check(
        !sel.degraded && r.wrong_match_false_positives == 0 && r.accuracy >= MIN_POOLED_ACCURACY && iterations_ok,
        format!(
            "{} samples ({wrong} wrong matches) over {n_songs} songs, {} grid cells; selected {} param {} {}: accuracy {:.4} (min {MIN_POOLED_ACCURACY}), wrong-match FP {}, degraded {}, outer iterations {}; {:.0} s",
            data.len(),
            rows.len(),
            r.family,
            r.param,
            r.subset,
            r.accuracy,
            r.wrong_match_false_positives,
            sel.degraded,
            r.outer_iterations,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for _ in 0..GRADIENT_INSTANCES {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(5..=200);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = rng.random_range(-1.0..1.0);
        let c = 2f64.powi(rng.random_range(0..20));
        let (_, gw, gb) = objective(&x, &y, &w, b, c);
        let h = 1e-5;
        for k in 0..=d {
            let f = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if k < d {
                    w2[k] += delta;
                } else {
                    b2 += delta;
                }
                objective(&x, &y, &w2, b2, c).0
            };
            let numeric = (f(h) - f(-h)) / (2.0 * h);
            let analytic = if k < d { gw[k] } else { gb };
            let rel = (numeric - analytic).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    check(
        worst <= MAX_GRADIENT_REL_ERROR,
        format!("worst relative error {worst:.2e} over {GRADIENT_INSTANCES} instances (limit {MAX_GRADIENT_REL_ERROR:.0e})"),
    )
}

fn criterion_8() -> Outcome {
    let hi = PipelineConfig::default().quality_config();
    let mut agree = 0usize;
    let mut noisiest_last = 0usize;
    for trial in 0..QUALITY_TRIALS as u64 {
        let (clips, _) = synth_corpus(&SynthSpec {
            n_events: 1,
            clips_per_event: 1,
            event_duration: 20.0,
            clip_duration_range: (10.0, 15.0),
            min_overlap: 0.0,
            snr_range_db: (200.0, 200.0),
            seed: 800 + trial,
            ..SynthSpec::default()
        })
        .map_err(|e| e.to_string())?;
        let clean = clips[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let noisy = |snr: f64, id: &str, rng: &mut ChaCha8Rng| {
            let mut s = clean.samples.clone();
            add_white_noise(&mut s, snr, rng);
            AudioClip::new(id.into(), s, clean.rate)
        };
        let copies = [clean.clone().with_id("a_clean"), noisy(20.0, "b_20db", &mut rng), noisy(5.0, "c_5db", &mut rng)];
        let d = clean.duration();
        let seg = Segment {
            t_start: 0.0,
            t_end: d,
            members: copies
                .iter()
                .map(|c| ugc_core::timeline::ClipCut {
                    clip_id: c.id.clone(),
                    local_start: 0.0,
                    local_end: d,
                })
                .collect(),
        };
        let by_id: HashMap<String, AudioClip> = copies.iter().map(|c| (c.id.clone(), c.clone())).collect();
        let q = segment_quality(&seg, &by_id, &hi).map_err(|e| e.to_string())?;
        let order: Vec<&str> = q.ranking.iter().map(|r| r.clip_id.as_str()).collect();
        agree += (order == ["a_clean", "b_20db", "c_5db"]) as usize;
        noisiest_last += (order[2] == "c_5db") as usize;
    }
    let rate = agree as f64 / QUALITY_TRIALS as f64;
    check(
        rate >= MIN_QUALITY_AGREEMENT,
        format!(
            "ranking follows SNR in {agree}/{QUALITY_TRIALS} trials (min {MIN_QUALITY_AGREEMENT}); 5 dB copy ranked last in {noisiest_last}/{QUALITY_TRIALS}"
        ),
    )
}

/// The offset-zero predicate evaluated directly on the pair table.
fn every_pair_aligned(qualities: &[SegmentQuality]) -> bool {
    qualities.iter().all(|q| {
        let ids: Vec<&str> = q.ranking.iter().map(|r| r.clip_id.as_str()).collect();
        (0..ids.len()).all(|i| (i + 1..ids.len()).all(|j| q.pair(ids[i], ids[j]).is_some_and(|p| p.matched_at_zero())))
    })
}

fn confirmation(clips: &[AudioClip], lists: &[MatchingList]) -> Result<(bool, usize, usize, bool), String> {
    let cfg = PipelineConfig::default();
    let graph = build_graph(lists, None);
    let clusters = connected_components(&graph);
    if clusters.len() != 1 {
        return Err(format!("expected one cluster, got {}", clusters.len()));
    }
    let cluster = &clusters[0];
    let pm = normalize_positions(&assign_offsets(cluster, &graph).map_err(|e| e.to_string())?);
    let durations: BTreeMap<String, f64> = clips.iter().map(|c| (c.id.clone(), c.duration())).collect();
    let by_id: HashMap<String, AudioClip> = clips.iter().map(|c| (c.id.clone(), c.clone())).collect();
    let qualities = build_segments(&pm, &durations)
        .iter()
        .map(|s| segment_quality(s, &by_id, &cfg.quality_config()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let samples = confirm_cluster(cluster, &graph, &qualities);
    let all_true = samples.iter().all(|s| s.class == 1 && s.kind == SampleKind::True && !s.vacuous);
    let edges = graph.edges().len() / 2;
    Ok((every_pair_aligned(&qualities), samples.len(), edges, all_true))
}

fn criterion_9() -> Outcome {
    let cfg = FpConfig::default();
    let (clips, _) = synth_corpus(&SynthSpec {
        n_events: 1,
        clips_per_event: 3,
        event_duration: 60.0,
        clip_duration_range: (20.0, 25.0),
        min_overlap: 12.0,
        snr_range_db: (25.0, 30.0),
        seed: 9,
        ..SynthSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let fps = clips.iter().map(|c| fingerprint_clip(c, &cfg)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let (_, lists) = match_all(&fps, &cfg).map_err(|e| e.to_string())?;

    let (holds, emitted, edges, all_true) = confirmation(&clips, &lists)?;
    let satisfying_ok = holds && emitted == edges && edges > 0 && all_true;

    // Misplace the last clip by 1.5 s in every match that involves it.
    let moved = clips[2].id.clone();
    let shift = 1.5;
    let skewed: Vec<MatchingList> = lists
        .iter()
        .map(|l| MatchingList {
            query_id: l.query_id.clone(),
            entries: l
                .entries
                .iter()
                .map(|e| {
                    let mut e = e.clone();
                    if e.clip_id == moved {
                        e.offset_seconds -= shift;
                    } else if e.query_id == moved {
                        e.offset_seconds += shift;
                    }
                    e
                })
                .collect(),
        })
        .collect();
    let (v_holds, v_emitted, _, _) = confirmation(&clips, &skewed)?;
    let violating_ok = !v_holds && v_emitted == 0;
    check(
        satisfying_ok && violating_ok,
        format!(
            "satisfying cluster: predicate {holds}, {emitted} class-1 samples for {edges} matches; violating cluster: predicate {v_holds}, {v_emitted} samples"
        ),
    )
}

fn criterion_10() -> Outcome {
    let cfg = FpConfig::default();
    let (clips, truth) = synth_corpus(&SynthSpec {
        n_events: 4,
        clips_per_event: 4,
        event_duration: 60.0,
        clip_duration_range: (15.0, 25.0),
        min_overlap: 8.0,
        scale_pitches: true,
        seed: 3,
        ..SynthSpec::default()
    })
    .map_err(|e| e.to_string())?;
    let fps: Vec<_> = fingerprint_all(&clips, &cfg).into_iter().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (index, _) = match_all(&fps, &cfg).map_err(|e| e.to_string())?;
    let bytes = encode_index(&index).map_err(|e| e.to_string())?;
    let again = encode_index(&decode_index(&bytes, &cfg).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let index_ok = bytes == again;
    let mut bumped = bytes.clone();
    bumped[4..6].copy_from_slice(&(INDEX_VERSION + 1).to_le_bytes());
    let index_refused = matches!(decode_index(&bumped, &cfg), Err(PersistError::UnsupportedVersion(_)));

    let low = FpConfig {
        match_threshold: 3,
        ..cfg.clone()
    };
    let (_, lists) = match_all(&fps, &low).map_err(|e| e.to_string())?;
    let data = autolabel(&lists, Some(&truth));
    let mut models_ok = true;
    let mut models_refused = true;
    for (family, param) in [(Family::LogReg, 4.0), (Family::Knn, 3.0)] {
        let model = TrainedModel::fit(&data, family, param, FeatureSubset::S2, 1).map_err(|e| e.to_string())?;
        let text = model.to_text();
        let back = TrainedModel::from_text(&text).map_err(|e| e.to_string())?;
        models_ok &= back.to_text() == text;
        let bumped = text.replacen("version = 1\n", "version = 2\n", 1);
        models_refused &= matches!(TrainedModel::from_text(&bumped), Err(ClassifierError::UnsupportedVersion(2)));
    }
    check(
        index_ok && index_refused && models_ok && models_refused,
        format!(
            "index round trip {index_ok} ({} bytes), newer index refused {index_refused}; model round trips {models_ok}, newer model refused {models_refused}",
            bytes.len()
        ),
    )
}

fn main() {
    let runs = recovery_runs();
    let criteria: Vec<Criterion> = vec![
        ("clustering recovery", Box::new(|| criterion_1(&runs))),
        ("alignment accuracy", Box::new(|| criterion_2(&runs))),
        ("segmentation oracle", Box::new(criterion_3)),
        ("self-match identity", Box::new(criterion_4)),
        ("repetition rule", Box::new(criterion_5)),
        ("classifier selection", Box::new(criterion_6)),
        ("gradient check", Box::new(criterion_7)),
        ("quality ordering", Box::new(criterion_8)),
        ("expansion by confirmation", Box::new(criterion_9)),
        ("persistence", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (tag, detail) = match run() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail}", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
