//! One-dimensional Gaussian-process regression with a unit RBF kernel, and the
//! uncertainty / dispersion / expected-score curves computed from it.

use crate::decision::{discrepancy_between, expected_loss, optimal_decision, uncertainty_with_limit, LossFunction};
use crate::dist::Belief;
use crate::error::{Error, Result};

/// Added to the diagonal when the first factorisation attempt fails.
const JITTER: f64 = 1e-12;

/// k(x, x′) = exp(−(x − x′)² / 2).
pub fn rbf(x: f64, y: f64) -> f64 {
    let d = x - y;
    (-0.5 * d * d).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    inputs: Vec<f64>,
    outputs: Vec<f64>,
    sigma: f64,
    /// Lower Cholesky factor of K + σ²I, row-major.
    chol: Vec<f64>,
    /// (K + σ²I)⁻¹ y
    alpha: Vec<f64>,
}

fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solve L x = b in place.
fn forward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Solve Lᵀ x = b in place.
fn backward(l: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Condition a GP(0, k) prior on noisy observations y = f(x) + Normal(0, σ²).
pub fn gp_fit(inputs: &[f64], outputs: &[f64], sigma: f64) -> Result<GpModel> {
    if inputs.len() != outputs.len() {
        return Err(Error::InvalidParameter(format!(
            "{} inputs but {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sd must be positive, got {sigma}")));
    }
    if let Some(bad) = inputs.iter().chain(outputs).find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite training value {bad}")));
    }
    for (i, &x) in inputs.iter().enumerate() {
        if inputs[..i].contains(&x) {
            return Err(Error::DuplicateInput(x));
        }
    }
    let n = inputs.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = rbf(inputs[i], inputs[j]);
        }
        gram[i * n + i] += sigma * sigma;
    }
    let chol = match cholesky(&gram, n) {
        Some(l) => l,
        None => {
            for i in 0..n {
                gram[i * n + i] += JITTER;
            }
            cholesky(&gram, n).ok_or(Error::SingularMatrix)?
        }
    };
    let mut alpha = outputs.to_vec();
    forward(&chol, n, &mut alpha);
    backward(&chol, n, &mut alpha);
    Ok(GpModel {
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
        sigma,
        chol,
        alpha,
    })
}

impl GpModel {
    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Posterior mean and variance of the latent function at `x`.
    pub fn latent(&self, x: f64) -> (f64, f64) {
        let n = self.inputs.len();
        let mut k: Vec<f64> = self.inputs.iter().map(|&xi| rbf(x, xi)).collect();
        let mean = k.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
        forward(&self.chol, n, &mut k);
        let explained: f64 = k.iter().map(|v| v * v).sum();
        (mean, (1.0 - explained).max(0.0))
    }

    /// Predictive distribution of a new observation at `x`, noise included.
    pub fn predict(&self, x: f64) -> Belief {
        let (mean, var) = self.latent(x);
        Belief::normal(mean, var + self.sigma * self.sigma).expect("variance is at least σ²")
    }
}

/// Free-function form of [`GpModel::predict`].
pub fn gp_predict(model: &GpModel, x: f64) -> Belief {
    model.predict(x)
}

/// One point of the uncertainty / dispersion / expected-score curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure2Row {
    pub x: f64,
    pub loss: LossFunction,
    /// U[p_model(z | x)]
    pub uncertainty: f64,
    /// U[p_eval(z | x)]
    pub dispersion: f64,
    /// E_eval[s(p_model, z)]
    pub expected_score: f64,
    /// E_eval[ℓ(a*_model, z) − ℓ(a*_eval, z)], integrated separately
    pub discrepancy: f64,
    /// Set when the weight annihilates the model or evaluation belief.
    pub degenerate: bool,
}

/// The default training set: x = ±2 labelled with tanh.
pub fn default_training() -> (Vec<f64>, Vec<f64>) {
    let xs = vec![-2.0, 2.0];
    let ys = xs.iter().map(|x: &f64| x.tanh()).collect();
    (xs, ys)
}

/// `points` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| if i + 1 == points { hi } else { lo + i as f64 * step }).collect()
        }
    }
}

/// Curves for every loss (outer) and grid point (inner), with the evaluation
/// belief at x given by `eval`.
pub fn figure2_curves(
    model: &GpModel,
    eval: impl Fn(f64) -> Belief,
    losses: &[LossFunction],
    grid: &[f64],
) -> Result<Vec<Figure2Row>> {
    let mut rows = Vec::with_capacity(losses.len() * grid.len());
    for &loss in losses {
        for &x in grid {
            rows.push(figure2_row(model.predict(x), eval(x), loss, x)?);
        }
    }
    Ok(rows)
}

/// A single curve point; the degenerate-weight limit convention applies.
pub fn figure2_row(model_belief: Belief, eval_belief: Belief, loss: LossFunction, x: f64) -> Result<Figure2Row> {
    let model_decision = optimal_decision(loss, &model_belief)?;
    let eval_decision = optimal_decision(loss, &eval_belief)?;
    let (uncertainty, model_limit) = uncertainty_with_limit(loss, &model_belief)?;
    let (dispersion, eval_limit) = uncertainty_with_limit(loss, &eval_belief)?;
    let expected_score = expected_loss(loss, &model_decision.action, &eval_belief)?;
    let discrepancy = discrepancy_between(loss, &model_decision.action, &eval_decision.action, &eval_belief)?;
    Ok(Figure2Row {
        x,
        loss,
        uncertainty,
        dispersion,
        expected_score,
        discrepancy,
        degenerate: model_limit || eval_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIGMA: f64 = 0.1;

    fn model() -> GpModel {
        let (xs, ys) = default_training();
        gp_fit(&xs, &ys, SIGMA).unwrap()
    }

    /// Explicit 2×2 inverse of K + σ²I.
    fn two_point_oracle(x: f64) -> (f64, f64) {
        let (a, b) = (-2.0f64, 2.0f64);
        let s2 = SIGMA * SIGMA;
        let (k11, k12, k22) = (1.0 + s2, rbf(a, b), 1.0 + s2);
        let det = k11 * k22 - k12 * k12;
        let inv = [k22 / det, -k12 / det, -k12 / det, k11 / det];
        let ks = [rbf(x, a), rbf(x, b)];
        let y = [a.tanh(), b.tanh()];
        let mean = ks[0] * (inv[0] * y[0] + inv[1] * y[1]) + ks[1] * (inv[2] * y[0] + inv[3] * y[1]);
        let quad = ks[0] * (inv[0] * ks[0] + inv[1] * ks[1]) + ks[1] * (inv[2] * ks[0] + inv[3] * ks[1]);
        (mean, 1.0 - quad + s2)
    }

    #[test]
    fn prediction_matches_linear_solve() {
        let m = model();
        for &x in &[-8.0, -3.1, -2.0, 0.0, 0.7, 2.0, 5.0, 8.0] {
            let p = m.predict(x);
            let (mean, var) = two_point_oracle(x);
            assert!((p.mean() - mean).abs() < 1e-14, "x={x}");
            assert!((p.variance() - var).abs() < 1e-14, "x={x}");
        }
        assert!(m.predict(2.0).variance() <= 0.02);
        assert!(m.predict(-2.0).variance() <= 0.02);
        let far = m.predict(8.0);
        assert!((far.variance() - 1.01).abs() < 1e-3 && far.mean().abs() < 1e-3);
        assert!(m.predict(0.0).mean().abs() < 1e-15);
    }

    #[test]
    fn fit_interpolates_within_noise() {
        let m = model();
        for (&x, &y) in m.inputs().iter().zip(m.outputs()) {
            assert!((m.predict(x).mean() - y).abs() < 2.0 * SIGMA * SIGMA);
        }
    }

    #[test]
    fn single_zero_observation() {
        let m = gp_fit(&[0.0], &[0.0], SIGMA).unwrap();
        for x in [-3.0, 0.0, 1.0] {
            assert_eq!(m.predict(x).mean(), 0.0);
        }
    }

    #[test]
    fn fit_errors() {
        assert_eq!(gp_fit(&[1.0, 1.0], &[0.0, 0.0], SIGMA), Err(Error::DuplicateInput(1.0)));
        assert!(gp_fit(&[1.0], &[0.0], 0.0).is_err());
        assert!(gp_fit(&[1.0, 2.0], &[0.0], SIGMA).is_err());
    }

    #[test]
    fn larger_training_sets_factorise() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let m = gp_fit(&xs, &ys, 1e-7).unwrap();
        assert!((m.predict(0.5).mean() - 0.5f64.sin()).abs() < 1e-4);
    }

    #[test]
    fn variance_grows_with_distance_from_data() {
        let m = model();
        let grid = linspace(2.0, 8.0, 61);
        let vars: Vec<f64> = grid.iter().map(|&x| m.predict(x).variance()).collect();
        assert!(vars.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(vars.iter().all(|&v| v > 0.0 && v <= 1.0 + SIGMA * SIGMA + 1e-15));
    }

    #[test]
    fn curve_rows() {
        let m = model();
        let grid = linspace(-8.0, 8.0, 401);
        let eval = |x: f64| Belief::normal(x.tanh(), SIGMA * SIGMA).unwrap();
        let losses = [LossFunction::Quadratic, LossFunction::WeightedQuadratic];
        let rows = figure2_curves(&m, eval, &losses, &grid).unwrap();
        assert_eq!(rows.len(), 802);
        for r in &rows {
            assert!((r.expected_score - r.discrepancy - r.dispersion).abs() < 1e-8, "{r:?}");
            assert!(r.expected_score - r.dispersion >= -1e-8);
            if r.loss == LossFunction::Quadratic {
                assert!((r.dispersion - 0.01).abs() < 1e-15);
                assert!(!r.degenerate);
            }
        }
        let weighted: Vec<&Figure2Row> = rows.iter().filter(|r| r.loss == LossFunction::WeightedQuadratic).collect();
        assert!(weighted.first().unwrap().dispersion < 1e-12);
        assert!(weighted.first().unwrap().degenerate);
        assert!(!weighted.last().unwrap().degenerate);
        let at2 = rows.iter().find(|r| r.x == 2.0 && r.loss == LossFunction::Quadratic).unwrap();
        let (mean, var) = two_point_oracle(2.0);
        let bias = mean - 2f64.tanh();
        assert!((at2.uncertainty - var).abs() < 1e-14);
        assert!(at2.expected_score < 0.02 && at2.uncertainty < 0.02);
        assert!((at2.expected_score - (bias * bias + 0.01)).abs() < 1e-14);
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(-8.0, 8.0, 401);
        assert_eq!((g[0], g[200], g[400]), (-8.0, 0.0, 8.0));
    }
}
