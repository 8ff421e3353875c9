use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_finite, check_training_data, sigmoid, Prediction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub l1_strength: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l1_strength: 1e-3,
            max_iters: 500,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l1_strength: f64,
    /// Final penalized objective.
    pub objective: f64,
    pub iterations: usize,
    /// Penalized objective after each accepted step, starting from the
    /// zero model.
    pub trace: Vec<f64>,
}

impl LogisticModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Self {
        Self {
            weights,
            bias,
            l1_strength: 0.0,
            objective: f64::NAN,
            iterations: 0,
            trace: Vec::new(),
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction> {
        if x.ncols() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                got: x.ncols(),
            });
        }
        check_finite(x)?;
        let w = ArrayView1::from(&self.weights);
        let scores = x.dot(&w).iter().map(|&z| sigmoid(z + self.bias)).collect();
        Ok(Prediction::from_scores(scores))
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn mean_log_loss(x: ArrayView2<f64>, y: &[u8], w: ArrayView1<f64>, b: f64) -> f64 {
    let z = x.dot(&w);
    let total: f64 = z
        .iter()
        .zip(y)
        .map(|(&z, &t)| softplus(z + b) - t as f64 * (z + b))
        .sum();
    total / y.len() as f64
}

/// Mean log-loss and its gradient with respect to the weights and bias.
pub fn log_loss_gradient(
    x: ArrayView2<f64>,
    y: &[u8],
    weights: &[f64],
    bias: f64,
) -> (f64, Vec<f64>, f64) {
    let n = y.len() as f64;
    let w = ArrayView1::from(weights);
    let z = x.dot(&w);
    let mut loss = 0.0;
    let mut resid = Array1::zeros(y.len());
    for (i, (&zi, &t)) in z.iter().zip(y).enumerate() {
        let zb = zi + bias;
        loss += softplus(zb) - t as f64 * zb;
        resid[i] = sigmoid(zb) - t as f64;
    }
    let grad_w = x.t().dot(&resid) / n;
    let grad_b = resid.sum() / n;
    (loss / n, grad_w.to_vec(), grad_b)
}

/// Mean log-loss plus `l1 * ||weights||_1`. The bias is not penalized.
pub fn logistic_objective(
    x: ArrayView2<f64>,
    y: &[u8],
    weights: &[f64],
    bias: f64,
    l1: f64,
) -> f64 {
    mean_log_loss(x, y, ArrayView1::from(weights), bias) + l1 * l1_norm(weights)
}

fn l1_norm(w: &[f64]) -> f64 {
    w.iter().map(|v| v.abs()).sum()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Proximal gradient descent with backtracking from the zero model. Every
/// accepted step satisfies the quadratic upper-bound condition, so the
/// penalized objective never increases.
pub fn train_logistic(
    x: ArrayView2<f64>,
    y: &[u8],
    l1_strength: f64,
    max_iters: usize,
    tolerance: f64,
) -> Result<LogisticModel> {
    check_training_data(x, y)?;
    if l1_strength.is_nan() || l1_strength < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "l1 strength {l1_strength} < 0"
        )));
    }
    let d = x.ncols();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0;
    let mut objective = logistic_objective(x, y, &w, b, l1_strength);
    let mut trace = vec![objective];
    let mut iterations = 0;

    while iterations < max_iters {
        let (loss, gw, gb) = log_loss_gradient(x, y, &w, b);
        let (w_new, b_new, loss_new) = loop {
            let w_new: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(wi, gi)| soft_threshold(wi - step * gi, step * l1_strength))
                .collect();
            let b_new = b - step * gb;
            let mut lin = (b_new - b) * gb;
            let mut sq = (b_new - b).powi(2);
            for j in 0..d {
                let dj = w_new[j] - w[j];
                lin += dj * gw[j];
                sq += dj * dj;
            }
            let loss_new = mean_log_loss(x, y, ArrayView1::from(&w_new), b_new);
            if loss_new <= loss + lin + sq / (2.0 * step) || step < 1e-12 {
                break (w_new, b_new, loss_new);
            }
            step *= 0.5;
        };
        let new_objective = loss_new + l1_strength * l1_norm(&w_new);
        iterations += 1;
        if new_objective > objective {
            // step underflow; keep the previous iterate
            break;
        }
        let improvement = objective - new_objective;
        w = w_new;
        b = b_new;
        objective = new_objective;
        trace.push(objective);
        if improvement < tolerance {
            break;
        }
        step *= 2.0;
    }

    Ok(LogisticModel {
        weights: w,
        bias: b,
        l1_strength,
        objective,
        iterations,
        trace,
    })
}
