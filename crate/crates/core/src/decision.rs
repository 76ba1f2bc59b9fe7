//! Losses, Bayes-optimal actions, uncertainty, proper scores and discrepancies.
//!
//! A [`LossFunction`] fixes everything else: the optimal action under a belief
//! minimises subjective expected loss, the uncertainty of the belief is that
//! minimal expected loss, and the score of a belief at an outcome is the loss
//! of its optimal action there.

use crate::dist::special::HALF_LN_2PI;
use crate::dist::special::{std_normal_cdf, std_normal_pdf};
use crate::dist::Belief;
use crate::error::{Error, Result};

/// Below this E[w(z)] the weighted loss is treated as annihilating the belief.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossFunction {
    /// (a − z)²
    Quadratic,
    /// −ln a(z), with `a` a distribution
    NegLogLikelihood,
    /// max(0, z) (a − z)²
    WeightedQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionKind {
    Point,
    Distribution,
}

impl LossFunction {
    pub const ALL: [LossFunction; 3] = [
        LossFunction::Quadratic,
        LossFunction::NegLogLikelihood,
        LossFunction::WeightedQuadratic,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LossFunction::Quadratic => "quadratic",
            LossFunction::NegLogLikelihood => "log",
            LossFunction::WeightedQuadratic => "weighted_quadratic",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "quadratic" => Some(LossFunction::Quadratic),
            "log" | "nll" | "neg_log_likelihood" => Some(LossFunction::NegLogLikelihood),
            "weighted_quadratic" => Some(LossFunction::WeightedQuadratic),
            _ => None,
        }
    }

    pub fn action_kind(self) -> ActionKind {
        match self {
            LossFunction::NegLogLikelihood => ActionKind::Distribution,
            _ => ActionKind::Point,
        }
    }

    /// w(z); identically one for the plain quadratic loss.
    pub fn weight(self, z: f64) -> f64 {
        match self {
            LossFunction::WeightedQuadratic => z.max(0.0),
            _ => 1.0,
        }
    }

    /// ℓ(a, z).
    pub fn loss(self, action: &Action, z: f64) -> Result<f64> {
        match (self, action) {
            (LossFunction::NegLogLikelihood, Action::Distribution(q)) => Ok(-q.ln_pdf(z)),
            (LossFunction::Quadratic | LossFunction::WeightedQuadratic, Action::Point(a)) => {
                Ok(self.weight(z) * (a - z) * (a - z))
            }
            _ => Err(Error::ActionKind),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Point(f64),
    Distribution(Belief),
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Action::Point(_) => ActionKind::Point,
            Action::Distribution(_) => ActionKind::Distribution,
        }
    }

    pub fn point(&self) -> Option<f64> {
        match self {
            Action::Point(a) => Some(*a),
            Action::Distribution(_) => None,
        }
    }
}

/// An optimal action together with whether it came from the degenerate-weight
/// limit convention.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub degenerate: bool,
}

/// Partial moments E[z^k 1{z > 0}] for k = 0..=3.
///
/// Closed forms for every scalar variant except Student-t; a Normal uses the
/// truncated standard-normal recursion, bounded-below supports reduce to raw
/// moments, and mixtures are linear in their components.
pub fn positive_part_moments(belief: &Belief) -> Result<[f64; 4]> {
    match belief {
        Belief::Bernoulli(b) => Ok([b.p(); 4]),
        Belief::PointMass(pm) => {
            let v = pm.value();
            Ok(if v > 0.0 { [1.0, v, v * v, v * v * v] } else { [0.0; 4] })
        }
        Belief::Beta(b) => {
            let (a, s) = (b.alpha(), b.alpha() + b.beta());
            let m1 = a / s;
            let m2 = m1 * (a + 1.0) / (s + 1.0);
            Ok([1.0, m1, m2, m2 * (a + 2.0) / (s + 2.0)])
        }
        Belief::Gamma(g) => {
            let (a, r) = (g.shape(), g.rate());
            let m1 = a / r;
            let m2 = m1 * (a + 1.0) / r;
            Ok([1.0, m1, m2, m2 * (a + 2.0) / r])
        }
        Belief::Normal(n) => {
            let (mu, sd) = (n.mean(), n.std_dev());
            let t = mu / sd;
            // J_k = E[Z^k 1{Z > −t}], J_k = (−t)^{k−1} φ(t) + (k − 1) J_{k−2}
            let (phi, cdf) = (std_normal_pdf(t), std_normal_cdf(t));
            let j = [cdf, phi, cdf - t * phi, (t * t + 2.0) * phi];
            let m0 = j[0];
            let m1 = mu * j[0] + sd * j[1];
            let m2 = mu * mu * j[0] + 2.0 * mu * sd * j[1] + sd * sd * j[2];
            let m3 = mu.powi(3) * j[0] + 3.0 * mu * mu * sd * j[1] + 3.0 * mu * sd * sd * j[2] + sd.powi(3) * j[3];
            Ok([m0, m1.max(0.0), m2.max(0.0), m3.max(0.0)])
        }
        Belief::Mixture(m) => {
            let mut out = [0.0; 4];
            for (w, c) in m.weights().iter().zip(m.components()) {
                let part = positive_part_moments(c)?;
                for k in 0..4 {
                    out[k] += w * part[k];
                }
            }
            Ok(out)
        }
        Belief::StudentT(_) => Err(Error::Unsupported(
            "weighted quadratic loss under a Student-t belief".into(),
        )),
        Belief::NormalGamma(_) => Err(Error::NotScalar(belief.name())),
    }
}

fn require_scalar(belief: &Belief) -> Result<()> {
    if belief.is_scalar() {
        Ok(())
    } else {
        Err(Error::NotScalar(belief.name()))
    }
}

fn finite_mean(belief: &Belief) -> Result<f64> {
    let mean = belief.mean();
    if mean.is_finite() {
        Ok(mean)
    } else {
        Err(Error::NonFinite("mean"))
    }
}

/// Optimal action with the limit convention for a weight that annihilates the
/// belief: the action falls back to the belief mean and `degenerate` is set.
pub fn optimal_decision(loss: LossFunction, belief: &Belief) -> Result<Decision> {
    require_scalar(belief)?;
    let (action, degenerate) = match loss {
        LossFunction::Quadratic => (Action::Point(finite_mean(belief)?), false),
        LossFunction::NegLogLikelihood => (Action::Distribution(belief.clone()), false),
        LossFunction::WeightedQuadratic => {
            let m = positive_part_moments(belief)?;
            if m[1] < DEGENERATE_WEIGHT {
                (Action::Point(finite_mean(belief)?), true)
            } else {
                // stationarity of a² M1 − 2a M2 + M3
                (Action::Point(m[2] / m[1]), false)
            }
        }
    };
    Ok(Decision { action, degenerate })
}

/// a* = argmin_a E_belief[ℓ(a, z)]; errors when the weight annihilates the belief.
pub fn bayes_optimal_action(loss: LossFunction, belief: &Belief) -> Result<Action> {
    let d = optimal_decision(loss, belief)?;
    if d.degenerate {
        return Err(Error::DegenerateWeight(positive_part_moments(belief)?[1]));
    }
    Ok(d.action)
}

/// E_eval[ℓ(action, z)].
pub fn expected_loss(loss: LossFunction, action: &Action, eval: &Belief) -> Result<f64> {
    require_scalar(eval)?;
    match (loss, action) {
        (LossFunction::Quadratic, Action::Point(a)) => {
            let d = a - finite_mean(eval)?;
            Ok(d * d + eval.variance())
        }
        (LossFunction::WeightedQuadratic, Action::Point(a)) => {
            let m = positive_part_moments(eval)?;
            Ok(a * a * m[1] - 2.0 * a * m[2] + m[3])
        }
        (LossFunction::NegLogLikelihood, Action::Distribution(q)) => cross_entropy(eval, q),
        _ => Err(Error::ActionKind),
    }
}

fn check_supports(eval: &Belief, model: &Belief) -> Result<()> {
    require_scalar(model)?;
    if eval.is_discrete() != model.is_discrete() {
        return Err(Error::IncompatibleSupport(format!(
            "{} evaluation against {} model",
            eval.name(),
            model.name()
        )));
    }
    Ok(())
}

/// −E_eval[ln model(z)].
fn cross_entropy(eval: &Belief, model: &Belief) -> Result<f64> {
    check_supports(eval, model)?;
    let value = if let Some(atoms) = eval.atoms() {
        atoms.iter().map(|&(z, p)| -p * model.ln_pdf(z)).sum()
    } else if let Belief::Normal(q) = model {
        // −E[ln N(z; μ, s²)] = ½ ln(2π s²) + ((m − μ)² + v) / (2 s²)
        let d = finite_mean(eval)? - q.mean();
        HALF_LN_2PI + 0.5 * q.variance().ln() + (d * d + eval.variance()) / (2.0 * q.variance())
    } else {
        eval.expect(|z| -model.ln_pdf(z))?
    };
    if value.is_infinite() || value.is_nan() {
        return Err(Error::SupportViolation);
    }
    Ok(value)
}

/// KL(eval ‖ model) = E_eval[ln eval(z) − ln model(z)], computed from the
/// pointwise log ratio rather than from a difference of entropies.
pub fn kl_divergence(eval: &Belief, model: &Belief) -> Result<f64> {
    check_supports(eval, model)?;
    let value = match (eval, model) {
        (Belief::Normal(p), Belief::Normal(q)) => {
            let d = p.mean() - q.mean();
            let r = p.variance() / q.variance();
            0.5 * (r - 1.0 - r.ln() + d * d / q.variance())
        }
        _ => match eval.atoms() {
            Some(atoms) => atoms
                .iter()
                .map(|&(z, p)| p * (p.ln() - model.ln_pdf(z)))
                .sum(),
            None => eval.expect(|z| eval.ln_pdf(z) - model.ln_pdf(z))?,
        },
    };
    if value.is_infinite() || value.is_nan() {
        return Err(Error::SupportViolation);
    }
    Ok(value)
}

/// U[p] = E_p[ℓ(a*_p, z)]: the variance, the entropy, or the weighted closed form
/// M3 − M2² / M1.
pub fn uncertainty(loss: LossFunction, belief: &Belief) -> Result<f64> {
    bayes_optimal_action(loss, belief)?;
    Ok(uncertainty_with_limit(loss, belief)?.0)
}

/// Uncertainty under the limit convention: zero, flagged, when the weight
/// annihilates the belief.
pub fn uncertainty_with_limit(loss: LossFunction, belief: &Belief) -> Result<(f64, bool)> {
    require_scalar(belief)?;
    match loss {
        LossFunction::Quadratic => {
            finite_mean(belief)?;
            Ok((belief.variance(), false))
        }
        LossFunction::NegLogLikelihood => Ok((belief.entropy(), false)),
        LossFunction::WeightedQuadratic => {
            let m = positive_part_moments(belief)?;
            if m[1] < DEGENERATE_WEIGHT {
                Ok((0.0, true))
            } else {
                Ok(((m[3] - m[2] * m[2] / m[1]).max(0.0), false))
            }
        }
    }
}

/// s(p, z) = ℓ(a*_p, z).
pub fn score(loss: LossFunction, belief: &Belief, z: f64) -> Result<f64> {
    loss.loss(&bayes_optimal_action(loss, belief)?, z)
}

/// E_eval[s(model, z)].
pub fn expected_score(loss: LossFunction, model: &Belief, eval: &Belief) -> Result<f64> {
    if loss == LossFunction::NegLogLikelihood {
        check_supports(eval, model)?;
    }
    expected_loss(loss, &bayes_optimal_action(loss, model)?, eval)
}

/// E_eval[ℓ(a_model, z) − ℓ(a_eval, z)], integrated as a single pointwise
/// difference.
pub fn discrepancy_between(loss: LossFunction, model_action: &Action, eval_action: &Action, eval: &Belief) -> Result<f64> {
    match (model_action, eval_action) {
        (Action::Point(am), Action::Point(ae)) if loss != LossFunction::NegLogLikelihood => {
            // w (am − z)² − w (ae − z)² = w (am − ae)(am + ae − 2z)
            let [_, m1, m2, _] = match loss {
                LossFunction::Quadratic => {
                    let mean = finite_mean(eval)?;
                    [1.0, 1.0, mean, 0.0]
                }
                _ => positive_part_moments(eval)?,
            };
            Ok((am - ae) * ((am + ae) * m1 - 2.0 * m2))
        }
        (Action::Distribution(q), Action::Distribution(p)) if loss == LossFunction::NegLogLikelihood => {
            if p == eval {
                kl_divergence(eval, q)
            } else {
                let ce_q = cross_entropy(eval, q)?;
                Ok(ce_q - cross_entropy(eval, p)?)
            }
        }
        _ => Err(Error::ActionKind),
    }
}

/// d(model, eval) = E_eval[ℓ(a*_model, z) − ℓ(a*_eval, z)] ≥ 0.
pub fn discrepancy(loss: LossFunction, model: &Belief, eval: &Belief) -> Result<f64> {
    if loss == LossFunction::NegLogLikelihood {
        check_supports(eval, model)?;
    }
    let am = bayes_optimal_action(loss, model)?;
    let ae = bayes_optimal_action(loss, eval)?;
    discrepancy_between(loss, &am, &ae, eval)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticDecomposition {
    pub mse: f64,
    pub squared_bias: f64,
    pub variance: f64,
}

/// Mean squared error of the model mean under `eval`, split into squared bias
/// and evaluation variance. The MSE is integrated directly.
pub fn decompose_quadratic(model: &Belief, eval: &Belief) -> Result<QuadraticDecomposition> {
    require_scalar(model)?;
    require_scalar(eval)?;
    let a = finite_mean(model)?;
    let mean_eval = finite_mean(eval)?;
    let variance = eval.variance();
    if !variance.is_finite() {
        return Err(Error::NonFinite("variance"));
    }
    let mse = match eval.atoms() {
        Some(atoms) => atoms.iter().map(|&(z, p)| p * (a - z) * (a - z)).sum(),
        None => eval.expect(|z| (a - z) * (a - z))?,
    };
    Ok(QuadraticDecomposition {
        mse,
        squared_bias: (a - mean_eval) * (a - mean_eval),
        variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDecomposition {
    pub cross_entropy: f64,
    pub kl: f64,
    pub entropy: f64,
}

/// Cross-entropy of the model under `eval`, split into KL divergence and the
/// entropy of `eval`.
pub fn decompose_log(model: &Belief, eval: &Belief) -> Result<LogDecomposition> {
    Ok(LogDecomposition {
        cross_entropy: cross_entropy(eval, model)?,
        kl: kl_divergence(eval, model)?,
        entropy: eval.entropy(),
    })
}

/// Bayes estimator of a derived quantity under quadratic estimation loss: the
/// mean of its pushforward belief.
pub fn bayes_estimator_mean(pushforward: &Belief) -> Result<f64> {
    finite_mean(pushforward)
}

/// E_belief[f(θ)], the Bayes estimator of f(θ) without forming the pushforward.
pub fn bayes_estimator(belief: &Belief, f: impl Fn(f64) -> f64) -> Result<f64> {
    belief.expect(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn normal(m: f64, v: f64) -> Belief {
        Belief::normal(m, v).unwrap()
    }

    fn bern(p: f64) -> Belief {
        Belief::bernoulli(p).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn optimal_actions() {
        let a = bayes_optimal_action(LossFunction::Quadratic, &normal(3.0, 4.0)).unwrap();
        assert_eq!(a, Action::Point(3.0));
        let a = bayes_optimal_action(LossFunction::NegLogLikelihood, &bern(0.7)).unwrap();
        assert_eq!(a, Action::Distribution(bern(0.7)));
        let a = bayes_optimal_action(LossFunction::WeightedQuadratic, &normal(0.0, 1.0)).unwrap();
        assert!(close(a.point().unwrap(), (PI / 2.0).sqrt(), 1e-14));
    }

    #[test]
    fn degenerate_weight() {
        let b = Belief::point_mass(-1.0).unwrap();
        assert!(matches!(
            bayes_optimal_action(LossFunction::WeightedQuadratic, &b),
            Err(Error::DegenerateWeight(_))
        ));
        let d = optimal_decision(LossFunction::WeightedQuadratic, &normal(-1.0, 0.01)).unwrap();
        assert!(d.degenerate);
        assert_eq!(d.action, Action::Point(-1.0));
        assert_eq!(
            uncertainty_with_limit(LossFunction::WeightedQuadratic, &normal(-1.0, 0.01)).unwrap(),
            (0.0, true)
        );
    }

    #[test]
    fn uncertainty_examples() {
        assert_eq!(uncertainty(LossFunction::Quadratic, &normal(0.0, 1.0)).unwrap(), 1.0);
        assert!(close(uncertainty(LossFunction::NegLogLikelihood, &bern(0.5)).unwrap(), LN_2, 1e-15));
        let t = Belief::student_t(2.0, 0.0, 2f64.sqrt()).unwrap();
        assert!(close(uncertainty(LossFunction::NegLogLikelihood, &t).unwrap(), 2.3069, 1e-4));
    }

    #[test]
    fn score_examples() {
        assert_eq!(score(LossFunction::Quadratic, &normal(0.0, 1.0), 2.0).unwrap(), 4.0);
        assert!(close(score(LossFunction::NegLogLikelihood, &bern(0.5), 1.0).unwrap(), LN_2, 1e-15));
        assert!(close(
            score(LossFunction::NegLogLikelihood, &normal(0.0, 1.0), 0.0).unwrap(),
            HALF_LN_2PI,
            1e-15
        ));
    }

    #[test]
    fn expected_score_and_discrepancy_examples() {
        let (p, q) = (normal(0.0, 1.0), normal(1.0, 1.0));
        let nll = LossFunction::NegLogLikelihood;
        assert!(close(expected_score(nll, &bern(0.5), &bern(0.5)).unwrap(), LN_2, 1e-15));
        assert!(close(expected_score(LossFunction::Quadratic, &p, &q).unwrap(), 2.0, 1e-15));
        assert!(close(expected_score(nll, &p, &q).unwrap(), 1.918_938_533_204_672_7, 1e-12));
        assert!(close(discrepancy(LossFunction::Quadratic, &p, &q).unwrap(), 1.0, 1e-15));
        assert!(close(discrepancy(nll, &p, &q).unwrap(), 0.5, 1e-15));
        for loss in LossFunction::ALL {
            assert!(discrepancy(loss, &q, &q).unwrap().abs() < 1e-15, "{}", loss.id());
        }
    }

    #[test]
    fn incompatible_supports() {
        let nll = LossFunction::NegLogLikelihood;
        assert!(matches!(
            expected_score(nll, &normal(0.0, 1.0), &bern(0.5)),
            Err(Error::IncompatibleSupport(_))
        ));
        assert!(matches!(
            decompose_log(&bern(1.0), &bern(0.5)),
            Err(Error::SupportViolation)
        ));
        let beta = Belief::beta(2.0, 2.0).unwrap();
        assert!(matches!(expected_score(nll, &beta, &normal(0.0, 1.0)), Err(Error::SupportViolation)));
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_quadratic(&normal(0.0, 1.0), &normal(1.0, 1.0)).unwrap();
        assert!(close(d.mse, 2.0, 1e-12) && d.squared_bias == 1.0 && d.variance == 1.0);
        let d = decompose_quadratic(&normal(0.0, 4.0), &normal(0.0, 4.0)).unwrap();
        assert!(close(d.mse, 4.0, 1e-12) && d.squared_bias == 0.0);
        let d = decompose_quadratic(&bern(0.6), &bern(0.5)).unwrap();
        assert!(close(d.mse, 0.26, 1e-15) && close(d.squared_bias, 0.01, 1e-15) && d.variance == 0.25);

        let d = decompose_log(&bern(0.5), &bern(0.5)).unwrap();
        assert!(close(d.cross_entropy, LN_2, 1e-15) && d.kl.abs() < 1e-16);
        let d = decompose_log(&normal(0.0, 1.0), &normal(1.0, 1.0)).unwrap();
        assert!(close(d.kl, 0.5, 1e-15) && close(d.cross_entropy, d.kl + d.entropy, 1e-14));
        let d = decompose_log(&bern(0.9), &bern(0.5)).unwrap();
        assert!(close(d.cross_entropy, -0.5 * (0.9f64.ln() + 0.1f64.ln()), 1e-15));
        assert!(close(d.cross_entropy, 1.2040, 1e-4));
    }

    #[test]
    fn bayes_estimators() {
        assert_eq!(bayes_estimator_mean(&normal(2.0, 1.0)).unwrap(), 2.0);
        assert_eq!(bayes_estimator_mean(&Belief::point_mass(1.5).unwrap()).unwrap(), 1.5);
        let flat = Belief::beta(1.0, 1.0).unwrap();
        let h = bayes_estimator(&flat, crate::dist::special::binary_entropy).unwrap();
        assert!(close(h, 0.5, 1e-10));
    }

    #[test]
    fn positive_moments_against_quadrature() {
        let beliefs = [
            normal(0.3, 2.0),
            normal(-1.5, 0.5),
            Belief::beta(2.0, 5.0).unwrap(),
            Belief::gamma(2.5, 1.5).unwrap(),
            Belief::mixture(vec![0.3, 0.7], vec![normal(-1.0, 1.0), normal(2.0, 0.25)]).unwrap(),
        ];
        for b in &beliefs {
            let m = positive_part_moments(b).unwrap();
            // split the Normal integrals at the kink so the smooth rule stays accurate
            for k in 1..4 {
                let got = m[k];
                let want = match b {
                    Belief::Normal(_) | Belief::Mixture(_) => crude_positive_moment(b, k as i32),
                    _ => b.expect(|z| z.powi(k as i32)).unwrap(),
                };
                assert!(close(got, want, 1e-6 * want.abs().max(1.0)), "{} k={k}: {got} vs {want}", b.name());
            }
        }
    }

    /// Midpoint rule on the density over (0, mean + 12 sd).
    fn crude_positive_moment(b: &Belief, k: i32) -> f64 {
        let hi = b.mean() + 12.0 * b.variance().sqrt() + 12.0;
        let n = 400_000;
        let h = hi / n as f64;
        (0..n)
            .map(|i| {
                let z = (i as f64 + 0.5) * h;
                z.powi(k) * b.ln_pdf(z).exp() * h
            })
            .sum()
    }

    #[test]
    fn loss_rejects_wrong_action_kind() {
        assert_eq!(
            LossFunction::Quadratic.loss(&Action::Distribution(bern(0.5)), 1.0),
            Err(Error::ActionKind)
        );
        assert_eq!(LossFunction::NegLogLikelihood.loss(&Action::Point(0.5), 1.0), Err(Error::ActionKind));
    }
}
