use serde::{Deserialize, Serialize};

use super::ClassifierError;

pub const DEFAULT_EPOCHS: usize = 2000;
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
const CONVERGED: f64 = 1e-8;

/// L2-regularized logistic regression. Larger `c` means weaker
/// regularization; the bias is not regularized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Row-major copy of the design matrix.
struct Flat {
    d: usize,
    data: Vec<f64>,
}

impl Flat {
    fn new(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        Flat {
            d,
            data: x.iter().flatten().copied().collect(),
        }
    }
}

/// Mean cross-entropy; writes the gradient with respect to `w` into `gw`
/// and returns `(loss, dCE/db)`.
fn cross_entropy(x: &Flat, y: &[u8], w: &[f64], b: f64, gw: &mut [f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let mut loss = 0.0;
    let mut gb = 0.0;
    gw.fill(0.0);
    for (xi, &yi) in x.data.chunks_exact(x.d.max(1)).zip(y) {
        let z = dot(w, xi) + b;
        // -[y ln s + (1-y) ln(1-s)] = softplus(z) - y z, sharing one exp
        let e = (-z.abs()).exp();
        let softplus = z.max(0.0) + e.ln_1p();
        let sigmoid = if z >= 0.0 { 1.0 / (1.0 + e) } else { e / (1.0 + e) };
        let yf = yi as f64;
        loss += softplus - yf * z;
        let r = sigmoid - yf;
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (loss / n, gb / n)
}

/// Objective `J = mean CE + |w|^2 / (2 c n)` and its analytic gradient
/// `(dJ/dw, dJ/db)`.
pub fn objective(x: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, c: f64) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let (ce, gb) = cross_entropy(&Flat::new(x), y, w, b, &mut gw);
    let penalty = 1.0 / (c * n);
    for (g, wi) in gw.iter_mut().zip(w) {
        *g += penalty * wi;
    }
    (ce + 0.5 * penalty * dot(w, w), gw, gb)
}

/// Full-batch gradient descent from zero, stopping after `max_epochs` or
/// once the objective changes by less than 1e-8.
///
/// The penalty term is applied as a proximal step,
/// `w <- (w - lr * dCE/dw) / (1 + lr / (c n))`, so tiny `c` shrinks the
/// weights toward zero instead of diverging.
pub fn train_logreg(
    x: &[Vec<f64>],
    y: &[u8],
    c: f64,
    max_epochs: usize,
    lr: f64,
) -> Result<LogRegModel, ClassifierError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(ClassifierError::InvalidParam(format!("c must be positive, got {c}")));
    }
    if x.is_empty() || x.len() != y.len() {
        return Err(ClassifierError::InvalidParam("empty or mismatched training data".into()));
    }
    let n = x.len() as f64;
    let shrink = 1.0 + lr / (c * n);
    let flat = Flat::new(x);
    let mut w = vec![0.0; flat.d];
    let mut gw = vec![0.0; w.len()];
    let mut b = 0.0;
    let mut prev = f64::INFINITY;
    // each pass evaluates J at the current point, then steps
    for epoch in 0..=max_epochs {
        let (ce, gb) = cross_entropy(&flat, y, &w, b, &mut gw);
        let j = ce + 0.5 * dot(&w, &w) / (c * n);
        if !j.is_finite() {
            return Err(ClassifierError::NonFiniteLoss);
        }
        if (prev - j).abs() < CONVERGED || epoch == max_epochs {
            break;
        }
        prev = j;
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi = (*wi - lr * g) / shrink;
        }
        b -= lr * gb;
    }
    Ok(LogRegModel { weights: w, bias: b, c })
}

impl LogRegModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }

    /// `(class, probability of class 1)`
    pub fn predict(&self, x: &[f64]) -> (u8, f64) {
        let p = self.probability(x);
        ((p >= 0.5) as u8, p)
    }
}
