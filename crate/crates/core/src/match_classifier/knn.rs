use serde::{Deserialize, Serialize};

use super::ClassifierError;

/// k-nearest-neighbor vote over stored (standardized) training points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

pub const MAX_K: usize = 39;

pub fn train_knn(x: &[Vec<f64>], y: &[u8], k: usize) -> Result<KnnModel, ClassifierError> {
    if x.is_empty() {
        return Err(ClassifierError::EmptyModel);
    }
    if k.is_multiple_of(2) || k > MAX_K || k > x.len() {
        return Err(ClassifierError::InvalidParam(format!(
            "k must be odd, in 1..={MAX_K} and at most the training size ({}); got {k}",
            x.len()
        )));
    }
    Ok(KnnModel {
        k,
        points: x.to_vec(),
        labels: y.to_vec(),
    })
}

impl KnnModel {
    /// `(majority class, fraction of neighbors voting 1)`. Equal distances
    /// are ordered by training index.
    pub fn predict(&self, x: &[f64]) -> (u8, f64) {
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let k = self.k.min(d.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k - 1, by_distance);
        }
        let ones = d[..k].iter().filter(|&&(_, i)| self.labels[i] == 1).count();
        let score = ones as f64 / k as f64;
        ((2 * ones > k) as u8, score)
    }
}
