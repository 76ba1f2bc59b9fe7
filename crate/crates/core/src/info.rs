//! Uncertainty reduction, expected information gain and the errors of BALD as
//! an estimator of the true one-step and infinite-step gains.

use crate::conjugate::{BetaBernoulliState, ConjugateState, NormalGammaState};
use crate::decision::{bayes_optimal_action, score, uncertainty, LossFunction};
use crate::dist::special::{digamma_unchecked as psi, lgamma_unchecked as lgamma, ln_beta};
use crate::dist::quadrature::gamma_log_grid;
use crate::dist::{Belief, RngStream, DEFAULT_TRAPEZOID_RESOLUTION};
use crate::error::{Error, Result};

/// Horizons up to this many binary steps are enumerated instead of sampled
/// (2¹⁶ leaves).
pub const EXHAUSTIVE_MAX_HORIZON: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingPolicy {
    Iid,
}

/// The true data-generating process and acquisition policy.
#[derive(Debug, Clone)]
pub struct DataSource {
    truth: Belief,
    policy: SamplingPolicy,
    rng: RngStream,
}

impl DataSource {
    pub fn new(truth: Belief, rng: RngStream) -> Result<Self> {
        if !truth.is_scalar() {
            return Err(Error::NotScalar(truth.name()));
        }
        Ok(Self {
            truth,
            policy: SamplingPolicy::Iid,
            rng,
        })
    }

    pub fn truth(&self) -> &Belief {
        &self.truth
    }

    pub fn policy(&self) -> SamplingPolicy {
        self.policy
    }

    pub fn seed(&self) -> u64 {
        self.rng.seed()
    }

    pub fn draw(&mut self, n: usize) -> Vec<f64> {
        self.truth
            .sample_values(&mut self.rng, n)
            .expect("checked scalar at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Exhaustive,
    MonteCarlo,
}

impl EstimateMethod {
    pub fn id(self) -> &'static str {
        match self {
            EstimateMethod::Exhaustive => "exhaustive",
            EstimateMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// A value with its Monte-Carlo standard error (zero for exact routes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
    pub method: EstimateMethod,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            standard_error: 0.0,
            method: EstimateMethod::Exhaustive,
        }
    }

    fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            value: mean,
            standard_error: (var / n).sqrt(),
            method: EstimateMethod::MonteCarlo,
        }
    }
}

fn predictive_uncertainty(loss: LossFunction, state: &ConjugateState) -> Result<f64> {
    let u = uncertainty(loss, &state.predictive())?;
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::NonFinite("predictive uncertainty"))
    }
}

/// UR = U[p_n(z)] − U[p_{n+m}(z)]; may be negative.
pub fn uncertainty_reduction(loss: LossFunction, before: &ConjugateState, data: &[f64]) -> Result<f64> {
    let after = before.update(data)?;
    if data.is_empty() {
        return Ok(0.0);
    }
    Ok(predictive_uncertainty(loss, before)? - predictive_uncertainty(loss, &after)?)
}

fn ln_binomial(m: usize, k: usize) -> f64 {
    lgamma(m as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((m - k) as f64 + 1.0)
}

/// Σ_k weight(k) · UR(k ones in m draws), the exact sum over the 2^m outcome
/// sequences grouped by their success count.
fn beta_count_sum(
    loss: LossFunction,
    s: &BetaBernoulliState,
    m: usize,
    ln_weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    let state = ConjugateState::BetaBernoulli(*s);
    let before = predictive_uncertainty(loss, &state)?;
    let mut total = 0.0;
    for k in 0..=m {
        let after = ConjugateState::BetaBernoulli(s.update_counts(k as u64, (m - k) as u64));
        total += ln_weight(k).exp() * (before - predictive_uncertainty(loss, &after)?);
    }
    Ok(total)
}

fn check_horizon(m: usize, reps: usize, exhaustive: bool) -> Result<()> {
    if !exhaustive && reps == 0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {m} needs Monte-Carlo sampling; reps must be at least 1"
        )));
    }
    Ok(())
}

/// EUR^true = E_{ỹ ~ p_train}[UR(ỹ_{1:m})].
///
/// Exact for a Beta–Bernoulli model against a Bernoulli truth when m ≤ 16;
/// otherwise averaged over `reps` batches drawn from `source`.
pub fn eur_true(
    loss: LossFunction,
    state: &ConjugateState,
    source: &mut DataSource,
    m: usize,
    reps: usize,
) -> Result<Estimate> {
    if m == 0 {
        return Ok(Estimate::exact(0.0));
    }
    if let (ConjugateState::BetaBernoulli(s), Belief::Bernoulli(b)) = (state, source.truth()) {
        if m <= EXHAUSTIVE_MAX_HORIZON {
            let p = b.p();
            let value = beta_count_sum(loss, s, m, |k| {
                let (ones, zeros) = (k as f64, (m - k) as f64);
                ln_binomial(m, k) + xlny(ones, p) + xlny(zeros, 1.0 - p)
            })?;
            return Ok(Estimate::exact(value));
        }
    }
    check_horizon(m, reps, false)?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let data = source.draw(m);
        samples.push(uncertainty_reduction(loss, state, &data)?);
    }
    Ok(Estimate::from_samples(&samples))
}

/// k ln p with 0 ln 0 = 0.
fn xlny(k: f64, p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * p.ln()
    }
}

/// EUR^est: ỹ_{1:m} simulated from the model's own sequentially updated
/// predictive, with the exact Bayesian update as q_{n+m}.
///
/// Beta–Bernoulli horizons up to 16 are enumerated with beta-binomial weights,
/// which equal the products of sequential predictive probabilities.
pub fn eur_estimate(
    loss: LossFunction,
    state: &ConjugateState,
    m: usize,
    reps: usize,
    rng: &mut RngStream,
) -> Result<Estimate> {
    if m == 0 {
        return Ok(Estimate::exact(0.0));
    }
    if let ConjugateState::BetaBernoulli(s) = state {
        if m <= EXHAUSTIVE_MAX_HORIZON {
            let (a, b) = (s.alpha(), s.beta());
            let value = beta_count_sum(loss, s, m, |k| {
                ln_binomial(m, k) + ln_beta(a + k as f64, b + (m - k) as f64) - ln_beta(a, b)
            })?;
            return Ok(Estimate::exact(value));
        }
    }
    check_horizon(m, reps, false)?;
    let before = predictive_uncertainty(loss, state)?;
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut current = *state;
        for _ in 0..m {
            let y = current.predictive().sample_values(rng, 1)?[0];
            current = current.update(&[y])?;
        }
        samples.push(before - predictive_uncertainty(loss, &current)?);
    }
    Ok(Estimate::from_samples(&samples))
}

/// BALD in predictive form: H[p_n(z)] − E_{p_n(θ)}[H[p(z | θ)]].
pub fn eig_theta(state: &ConjugateState) -> f64 {
    (state.predictive_entropy() - state.expected_conditional_entropy()).max(0.0)
}

/// How the outer expectation over the next outcome is taken.
#[derive(Debug, Clone)]
pub enum OuterExpectation {
    /// Closed form (Normal–Gamma) or enumeration (Beta–Bernoulli).
    Exact,
    /// Quadrature under the predictive.
    Quadrature,
    /// Average over draws from the predictive.
    MonteCarlo { draws: usize, rng: RngStream },
}

fn posterior_parameter_entropy(state: &ConjugateState, z: f64) -> f64 {
    match state {
        ConjugateState::BetaBernoulli(s) => {
            let (ones, zeros) = if z == 1.0 { (1, 0) } else { (0, 1) };
            s.update_counts(ones, zeros).parameter_entropy()
        }
        ConjugateState::NormalGamma(s) => s.update_one(z).parameter_entropy(),
    }
}

/// E_{z ~ outer}[H[p_n(θ | z)]] by the default rule for `outer`.
pub fn expected_posterior_parameter_entropy(state: &ConjugateState, outer: &Belief) -> Result<f64> {
    if state.is_discrete() {
        let atoms = outer.atoms().ok_or_else(|| {
            Error::IncompatibleSupport(format!("{} outcomes for a Beta–Bernoulli model", outer.name()))
        })?;
        if let Some(&(z, _)) = atoms.iter().find(|(z, _)| *z != 0.0 && *z != 1.0) {
            return Err(Error::OutOfSupport(z));
        }
        return Ok(atoms.iter().map(|&(z, p)| p * posterior_parameter_entropy(state, z)).sum());
    }
    if outer.is_discrete() {
        return Err(Error::IncompatibleSupport(format!(
            "{} outcomes for a Normal–Gamma model",
            outer.name()
        )));
    }
    outer.expect(|z| posterior_parameter_entropy(state, z))
}

/// E_{p_n(z)}[H[p_n(θ | z)]] for a Normal–Gamma state. After one observation
/// β′ = β(1 + T²/ν) with T ~ t_ν, and the entropy depends on z only through
/// −½ ln β′, so the expectation needs E[ln(1 + T²/ν)] = ψ(α + ½) − ψ(α).
fn ng_expected_posterior_entropy(s: &NormalGammaState) -> f64 {
    let shifted = NormalGammaState::new(s.m(), s.kappa() + 1.0, s.alpha() + 0.5, s.beta()).expect("valid");
    shifted.parameter_entropy() - 0.5 * (psi(s.alpha() + 0.5) - psi(s.alpha()))
}

/// BALD in parameter form: H[p_n(θ)] − E_{p_n(z)}[H[p_n(θ | z)]].
pub fn eig_theta_parameter_form(state: &ConjugateState, outer: OuterExpectation) -> Result<Estimate> {
    let h = state.parameter_entropy();
    let predictive = state.predictive();
    match outer {
        OuterExpectation::Exact | OuterExpectation::Quadrature => {
            let inner = match (state, &outer) {
                (ConjugateState::NormalGamma(s), OuterExpectation::Exact) => ng_expected_posterior_entropy(s),
                _ => expected_posterior_parameter_entropy(state, &predictive)?,
            };
            Ok(Estimate::exact(h - inner))
        }
        OuterExpectation::MonteCarlo { draws, mut rng } => {
            if draws == 0 {
                return Err(Error::InvalidParameter("Monte-Carlo draw count must be positive".into()));
            }
            let zs = predictive.sample_values(&mut rng, draws)?;
            let gains: Vec<f64> = zs.iter().map(|&z| h - posterior_parameter_entropy(state, z)).collect();
            Ok(Estimate::from_samples(&gains))
        }
    }
}

/// EIG^true_θ = H[p_n(θ)] − E_{p_train(z)}[H[p_n(θ | z)]]: exhaustive for a
/// Bernoulli truth, Gauss–Hermite for a Normal one.
pub fn eig_theta_true(state: &ConjugateState, truth: &Belief) -> Result<f64> {
    Ok(state.parameter_entropy() - expected_posterior_parameter_entropy(state, truth)?)
}

/// IG_z(∞) = H[p_n(z)] − H[p_train(z)], assuming the posterior collapses onto
/// the truth.
pub fn ig_z_infinity(state: &ConjugateState, truth: &Belief) -> f64 {
    state.predictive_entropy() - truth.entropy()
}

/// Per-(model, n, seed) accuracy of BALD as an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub model: &'static str,
    pub n: u64,
    pub seed: u64,
    pub eig_theta: f64,
    pub eig_theta_true: f64,
    pub ig_z_inf: f64,
    pub eps_theta: f64,
    pub eps_z: f64,
}

/// ε_θ = (EIG_θ − EIG^true_θ)² and ε_z = (EIG_θ − IG_z(∞))² for the current
/// state against the source's truth.
pub fn estimation_errors(state: &ConjugateState, source: &DataSource) -> Result<ErrorReport> {
    let truth = source.truth();
    let eig = state.predictive_entropy() - state.expected_conditional_entropy();
    let eig_true = eig_theta_true(state, truth)?;
    let ig = ig_z_infinity(state, truth);
    Ok(ErrorReport {
        model: state.model_id(),
        n: state.observations(),
        seed: source.seed(),
        eig_theta: eig,
        eig_theta_true: eig_true,
        ig_z_inf: ig,
        eps_theta: (eig - eig_true).powi(2),
        eps_z: (eig - ig).powi(2),
    })
}

/// Draw `n` training points from the source, update `prior` and report errors.
pub fn simulate_report(prior: &ConjugateState, source: &mut DataSource, n: usize) -> Result<ErrorReport> {
    let data = source.draw(n);
    let posterior = prior.update(&data)?;
    estimation_errors(&posterior, source)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalDecomposition {
    pub total: f64,
    pub reducible: f64,
    pub irreducible: f64,
}

/// Total predictive uncertainty split into the part the truth still carries
/// and the part more data would remove. The reducible part is not clipped.
pub fn decompose_total(loss: LossFunction, state: &ConjugateState, truth: &Belief) -> Result<TotalDecomposition> {
    let total = predictive_uncertainty(loss, state)?;
    let irreducible = uncertainty(loss, truth)?;
    Ok(TotalDecomposition {
        total,
        reducible: total - irreducible,
        irreducible,
    })
}

/// E_{p_n(θ)}[E_{p(z | θ)}[s(p_n, z)]], integrated over parameters and then
/// outcomes rather than against the predictive directly.
pub fn nested_expected_score(loss: LossFunction, state: &ConjugateState) -> Result<f64> {
    let predictive = state.predictive();
    bayes_optimal_action(loss, &predictive)?;
    let s = |z: f64| score(loss, &predictive, z).expect("action checked above");
    match state {
        ConjugateState::BetaBernoulli(b) => {
            let (s0, s1) = (s(0.0), s(1.0));
            b.parameter_belief().expect(|eta| eta * s1 + (1.0 - eta) * s0)
        }
        ConjugateState::NormalGamma(ng) => {
            let t = ng.predictive_t();
            if !bayes_scores_finite(loss, &predictive) {
                return Err(Error::NonFinite("predictive uncertainty"));
            }
            // μ | λ is integrated in closed form: z | λ ~ Normal(m, (κ + 1) / (κ λ)).
            let (lambdas, weights) = gamma_log_grid(ng.alpha(), ng.beta(), DEFAULT_TRAPEZOID_RESOLUTION);
            let inflate = (ng.kappa() + 1.0) / ng.kappa();
            Ok(lambdas
                .iter()
                .zip(&weights)
                .map(|(&lambda, &w)| w * radial_normal_expect(ng.m(), inflate / lambda, t.loc(), &s))
                .sum())
        }
    }
}

fn bayes_scores_finite(loss: LossFunction, predictive: &Belief) -> bool {
    uncertainty(loss, predictive).map(f64::is_finite).unwrap_or(false)
}

/// Step in u = ln|z − centre| for [`radial_normal_expect`].
const RADIAL_STEP: f64 = 0.05;

/// E[f(z)] for z ~ Normal(mean, var) by a trapezoid rule in u = ln|z − centre|
/// on each side of `centre`.
///
/// Unlike Gauss–Hermite this stays accurate when f has a logarithmic
/// near-singularity at `centre` and the Normal is much wider than that
/// feature, as happens for the heavy tail of a precision mixture.
fn radial_normal_expect(mean: f64, var: f64, centre: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let sd = var.sqrt();
    let ln_dens = |z: f64| -0.5 * (z - mean) * (z - mean) / var;
    // integrate from 1e-20 of the outer scale up to 40 sd beyond the mean
    let reach = (mean - centre).abs() + 40.0 * sd;
    let lo = (sd.min(1.0) * 1e-20).ln();
    let hi = reach.ln();
    let steps = ((hi - lo) / RADIAL_STEP).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let mut total = 0.0;
    for i in 0..=steps {
        let u = lo + i as f64 * h;
        let r = u.exp();
        let end = if i == 0 || i == steps { 0.5 } else { 1.0 };
        for z in [centre - r, centre + r] {
            total += end * r * ln_dens(z).exp() * f(z);
        }
    }
    total * h / (sd * (2.0 * std::f64::consts::PI).sqrt())
}
