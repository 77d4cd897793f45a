use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::{train_knn, KnnModel, MAX_K};
use super::logreg::{train_logreg, LogRegModel, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};
use super::{balance_indices, ClassifierError, FeatureSubset, Sample, SampleKind, Standardizer};

pub const INNER_FOLDS: usize = 10;
pub const MIN_CV_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    LogReg,
    Knn,
}

impl Family {
    /// `c = 1, 2, 4, ..., 2^19` for logistic regression; odd `k` from 1 to
    /// 39 for kNN.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            Family::LogReg => (0..20).map(|i| 2f64.powi(i)).collect(),
            Family::Knn => (1..=MAX_K).step_by(2).map(|k| k as f64).collect(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::LogReg => "logreg",
            Family::Knn => "knn",
        })
    }
}

impl FromStr for Family {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logreg" | "lr" => Ok(Family::LogReg),
            "knn" => Ok(Family::Knn),
            _ => Err(ClassifierError::InvalidParam(format!("unknown classifier family {s:?}"))),
        }
    }
}

/// A fitted classifier of either family, operating on standardized input.
#[derive(Debug, Clone, PartialEq)]
pub enum Classifier {
    LogReg(LogRegModel),
    Knn(KnnModel),
}

impl Classifier {
    pub fn fit(family: Family, param: f64, x: &[Vec<f64>], y: &[u8]) -> Result<Self, ClassifierError> {
        match family {
            Family::LogReg => Ok(Classifier::LogReg(train_logreg(x, y, param, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE)?)),
            Family::Knn => {
                if param.fract() != 0.0 || param < 1.0 {
                    return Err(ClassifierError::InvalidParam(format!("k must be a positive integer, got {param}")));
                }
                Ok(Classifier::Knn(train_knn(x, y, param as usize)?))
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> (u8, f64) {
        match self {
            Classifier::LogReg(m) => m.predict(x),
            Classifier::Knn(m) => m.predict(x),
        }
    }
}

/// Cross-validated performance of one (family, parameter, subset) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub family: Family,
    pub param: f64,
    pub subset: FeatureSubset,
    pub train_error: f64,
    pub validation_error: f64,
    /// Accuracy over the pooled predictions for every left-out song.
    pub accuracy: f64,
    /// Wrong matches predicted class 1 in the pooled predictions.
    pub wrong_match_false_positives: usize,
    pub outer_iterations: usize,
    pub test_samples: usize,
}

struct Split {
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl Split {
    fn pick(&self, idx: &[usize]) -> Split {
        Split {
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

fn error_rate(model: &Classifier, std: &Standardizer, data: &Split) -> f64 {
    let wrong = data
        .rows
        .iter()
        .zip(&data.labels)
        .filter(|(x, &y)| model.predict(&std.apply(x)).0 != y)
        .count();
    wrong as f64 / data.rows.len().max(1) as f64
}

fn fit_scaled(family: Family, param: f64, train: &Split) -> Result<(Standardizer, Classifier), ClassifierError> {
    let std = Standardizer::fit(&train.rows);
    let model = Classifier::fit(family, param, &std.apply_all(&train.rows), &train.labels)?;
    Ok((std, model))
}

/// One left-out song: its test samples and the balanced training pool with
/// its inner fold assignment.
struct OuterFold {
    train: Split,
    folds: Vec<Vec<usize>>,
    test: Split,
    test_kinds: Vec<SampleKind>,
}

/// Distinct query songs, sorted.
pub fn songs(data: &[Sample]) -> Vec<String> {
    data.iter()
        .map(|s| s.query_song_id.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn outer_folds(data: &[Sample], subset: FeatureSubset, seed: u64) -> Result<Vec<OuterFold>, ClassifierError> {
    let songs = songs(data);
    if songs.len() < 2 {
        return Err(ClassifierError::TooFewSongs(songs.len()));
    }
    if data.len() < MIN_CV_SAMPLES {
        return Err(ClassifierError::TooFewSamples(data.len()));
    }
    songs
        .iter()
        .enumerate()
        .map(|(o, song)| {
            let (test, pool): (Vec<&Sample>, Vec<&Sample>) = data.iter().partition(|s| &s.query_song_id == song);
            let outer_seed = seed.wrapping_add(o as u64);
            let classes: Vec<u8> = pool.iter().map(|s| s.class).collect();
            let keep = balance_indices(&classes, outer_seed)?;
            let train = Split {
                rows: keep.iter().map(|&i| subset.project(&pool[i].features)).collect(),
                labels: keep.iter().map(|&i| pool[i].class).collect(),
            };
            let mut order: Vec<usize> = (0..train.rows.len()).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(outer_seed ^ 0x5eed_f01d));
            let k = INNER_FOLDS.min(order.len());
            let folds = (0..k)
                .map(|f| order.iter().skip(f).step_by(k).copied().collect())
                .collect();
            Ok(OuterFold {
                train,
                folds,
                test: Split {
                    rows: test.iter().map(|s| subset.project(&s.features)).collect(),
                    labels: test.iter().map(|s| s.class).collect(),
                },
                test_kinds: test.iter().map(|s| s.kind).collect(),
            })
        })
        .collect()
}

fn evaluate(family: Family, param: f64, subset: FeatureSubset, outer: &[OuterFold]) -> Result<CvResult, ClassifierError> {
    let mut train_err = 0.0;
    let mut val_err = 0.0;
    let mut correct = 0usize;
    let mut total = 0usize;
    let mut wrong_fp = 0usize;
    for of in outer {
        let n = of.train.rows.len();
        let (mut t, mut v) = (0.0, 0.0);
        for fold in &of.folds {
            let mut in_fold = vec![false; n];
            fold.iter().for_each(|&i| in_fold[i] = true);
            let rest: Vec<usize> = (0..n).filter(|&i| !in_fold[i]).collect();
            let (fit_on, held) = (of.train.pick(&rest), of.train.pick(fold));
            let (std, model) = fit_scaled(family, param, &fit_on)?;
            t += error_rate(&model, &std, &fit_on);
            v += error_rate(&model, &std, &held);
        }
        train_err += t / of.folds.len() as f64;
        val_err += v / of.folds.len() as f64;

        let (std, model) = fit_scaled(family, param, &of.train)?;
        for ((x, &y), kind) in of.test.rows.iter().zip(&of.test.labels).zip(&of.test_kinds) {
            let pred = model.predict(&std.apply(x)).0;
            correct += (pred == y) as usize;
            wrong_fp += (pred == 1 && *kind == SampleKind::Wrong) as usize;
            total += 1;
        }
    }
    let m = outer.len() as f64;
    Ok(CvResult {
        family,
        param,
        subset,
        train_error: train_err / m,
        validation_error: val_err / m,
        accuracy: correct as f64 / total.max(1) as f64,
        wrong_match_false_positives: wrong_fp,
        outer_iterations: outer.len(),
        test_samples: total,
    })
}

/// Leave-one-song-out outer loop with a seeded 10-fold inner loop on the
/// remaining songs' balanced samples. One result per grid value.
pub fn double_cv(
    data: &[Sample],
    family: Family,
    grid: &[f64],
    subset: FeatureSubset,
    seed: u64,
) -> Result<Vec<CvResult>, ClassifierError> {
    let outer = outer_folds(data, subset, seed)?;
    grid.par_iter()
        .map(|&p| evaluate(family, p, subset, &outer))
        .collect()
}

/// [`double_cv`] over several subsets, concatenated in subset order.
pub fn grid_search(
    data: &[Sample],
    family: Family,
    grid: &[f64],
    subsets: &[FeatureSubset],
    seed: u64,
) -> Result<Vec<CvResult>, ClassifierError> {
    let mut out = Vec::new();
    for &s in subsets {
        out.extend(double_cv(data, family, grid, s, seed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub result: CvResult,
    /// No result satisfied the wrong-match constraint; this is the best
    /// unconstrained one.
    pub degraded: bool,
}

fn preference(a: &CvResult, b: &CvResult) -> Ordering {
    a.validation_error
        .total_cmp(&b.validation_error)
        .then(a.family.cmp(&b.family))
        .then(a.param.total_cmp(&b.param))
        .then(a.subset.cmp(&b.subset))
}

/// Lowest validation error, optionally among results without wrong-match
/// false positives. Ties: smaller parameter, then subset order.
pub fn select_model(results: &[CvResult], require_clean_wrong: bool) -> Result<Selection, ClassifierError> {
    let best = |it: &mut dyn Iterator<Item = &CvResult>| it.min_by(|a, b| preference(a, b)).cloned();
    if require_clean_wrong {
        if let Some(r) = best(&mut results.iter().filter(|r| r.wrong_match_false_positives == 0)) {
            return Ok(Selection { result: r, degraded: false });
        }
    }
    let r = best(&mut results.iter()).ok_or(ClassifierError::NoResults)?;
    Ok(Selection {
        result: r,
        degraded: require_clean_wrong,
    })
}
