//! Exact Bayesian inference for the Beta–Bernoulli and Normal–Gamma models.
//!
//! States carry posterior hyperparameters plus the number of observations
//! absorbed; updates are closed form and return new values.

use crate::dist::special::{binary_entropy, digamma_unchecked as psi, unit_normal_entropy};
use crate::dist::{Belief, Beta, NormalGamma, StudentT};
use crate::error::{Error, Result};

/// Beta(α, β) posterior over the Bernoulli success probability η.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBernoulliState {
    alpha: f64,
    beta: f64,
    n: u64,
}

impl BetaBernoulliState {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        Beta::new(alpha, beta)?;
        Ok(Self { alpha, beta, n: 0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Observations absorbed since the prior.
    pub fn observations(&self) -> u64 {
        self.n
    }

    /// Absorb `ones` successes and `zeros` failures.
    pub fn update_counts(&self, ones: u64, zeros: u64) -> Self {
        Self {
            alpha: self.alpha + ones as f64,
            beta: self.beta + zeros as f64,
            n: self.n + ones + zeros,
        }
    }

    /// Absorb a batch of outcomes, each exactly 0 or 1.
    pub fn update(&self, observations: &[f64]) -> Result<Self> {
        let mut ones = 0u64;
        for &y in observations {
            if y == 1.0 {
                ones += 1;
            } else if y != 0.0 {
                return Err(Error::OutOfSupport(y));
            }
        }
        Ok(self.update_counts(ones, observations.len() as u64 - ones))
    }

    /// Posterior mean of η, the predictive success probability.
    pub fn predictive_p(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn predictive(&self) -> Belief {
        Belief::bernoulli(self.predictive_p()).expect("posterior mean lies in [0, 1]")
    }

    pub fn parameter_belief(&self) -> Belief {
        Belief::beta(self.alpha, self.beta).expect("state invariants")
    }

    pub fn parameter_entropy(&self) -> f64 {
        Beta::new(self.alpha, self.beta).expect("state invariants").entropy()
    }

    /// E_{Beta(α,β)}[H[Bern(η)]] = ψ(α+β+1) − (α ψ(α+1) + β ψ(β+1)) / (α+β).
    pub fn expected_conditional_entropy(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        psi(a + b + 1.0) - (a * psi(a + 1.0) + b * psi(b + 1.0)) / (a + b)
    }

    pub fn predictive_entropy(&self) -> f64 {
        binary_entropy(self.predictive_p())
    }
}

/// Normal–Gamma posterior over (μ, λ) for Normal(μ, 1/λ) observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalGammaState {
    m: f64,
    kappa: f64,
    alpha: f64,
    beta: f64,
    n: u64,
}

impl NormalGammaState {
    pub fn new(m: f64, kappa: f64, alpha: f64, beta: f64) -> Result<Self> {
        NormalGamma::new(m, kappa, alpha, beta)?;
        Ok(Self {
            m,
            kappa,
            alpha,
            beta,
            n: 0,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn observations(&self) -> u64 {
        self.n
    }

    /// Absorb a batch through its sufficient statistics (count, mean, centred
    /// sum of squares).
    pub fn update(&self, observations: &[f64]) -> Result<Self> {
        if let Some(&bad) = observations.iter().find(|y| !y.is_finite()) {
            return Err(Error::OutOfSupport(bad));
        }
        if observations.is_empty() {
            return Ok(*self);
        }
        let count = observations.len() as f64;
        let mean = observations.iter().sum::<f64>() / count;
        let ss: f64 = observations.iter().map(|y| (y - mean) * (y - mean)).sum();
        Ok(self.update_stats(observations.len() as u64, mean, ss))
    }

    /// Single-observation update, the hot path inside quadratures.
    pub fn update_one(&self, y: f64) -> Self {
        self.update_stats(1, y, 0.0)
    }

    fn update_stats(&self, n: u64, mean: f64, ss: f64) -> Self {
        let nf = n as f64;
        let kappa = self.kappa + nf;
        let d = mean - self.m;
        Self {
            m: (self.kappa * self.m + nf * mean) / kappa,
            kappa,
            alpha: self.alpha + 0.5 * nf,
            beta: self.beta + 0.5 * ss + self.kappa * nf * d * d / (2.0 * kappa),
            n: self.n + n,
        }
    }

    /// Student-t with ν = 2α, location m and scale √(β(κ+1)/(ακ)).
    pub fn predictive_t(&self) -> StudentT {
        let scale = (self.beta * (self.kappa + 1.0) / (self.alpha * self.kappa)).sqrt();
        StudentT::new(2.0 * self.alpha, self.m, scale).expect("state invariants")
    }

    pub fn predictive(&self) -> Belief {
        Belief::StudentT(self.predictive_t())
    }

    pub fn parameter_belief(&self) -> Belief {
        Belief::NormalGamma(self.joint())
    }

    pub fn joint(&self) -> NormalGamma {
        NormalGamma::new(self.m, self.kappa, self.alpha, self.beta).expect("state invariants")
    }

    pub fn parameter_entropy(&self) -> f64 {
        self.joint().entropy()
    }

    /// E[H[Normal(μ, 1/λ)]] = ½ ln(2πe) − ½ (ψ(α) − ln β).
    pub fn expected_conditional_entropy(&self) -> f64 {
        unit_normal_entropy() - 0.5 * (psi(self.alpha) - self.beta.ln())
    }

    pub fn predictive_entropy(&self) -> f64 {
        self.predictive_t().entropy()
    }
}

/// Either conjugate family, for code that handles both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConjugateState {
    BetaBernoulli(BetaBernoulliState),
    NormalGamma(NormalGammaState),
}

impl ConjugateState {
    /// Beta(1, 1), the flat prior.
    pub fn default_beta_bernoulli() -> Self {
        ConjugateState::BetaBernoulli(BetaBernoulliState::new(1.0, 1.0).expect("valid"))
    }

    /// NG(m = 0, κ = 1, α = 1, β = 1).
    pub fn default_normal_gamma() -> Self {
        ConjugateState::NormalGamma(NormalGammaState::new(0.0, 1.0, 1.0, 1.0).expect("valid"))
    }

    pub fn model_id(&self) -> &'static str {
        match self {
            ConjugateState::BetaBernoulli(_) => "beta_bernoulli",
            ConjugateState::NormalGamma(_) => "normal_gamma",
        }
    }

    pub fn observations(&self) -> u64 {
        match self {
            ConjugateState::BetaBernoulli(s) => s.observations(),
            ConjugateState::NormalGamma(s) => s.observations(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, ConjugateState::BetaBernoulli(_))
    }

    pub fn update(&self, observations: &[f64]) -> Result<Self> {
        Ok(match self {
            ConjugateState::BetaBernoulli(s) => ConjugateState::BetaBernoulli(s.update(observations)?),
            ConjugateState::NormalGamma(s) => ConjugateState::NormalGamma(s.update(observations)?),
        })
    }

    /// p_n(z) = E_{p_n(θ)}[p(z | θ)].
    pub fn predictive(&self) -> Belief {
        match self {
            ConjugateState::BetaBernoulli(s) => s.predictive(),
            ConjugateState::NormalGamma(s) => s.predictive(),
        }
    }

    /// p_n(θ).
    pub fn parameter_belief(&self) -> Belief {
        match self {
            ConjugateState::BetaBernoulli(s) => s.parameter_belief(),
            ConjugateState::NormalGamma(s) => s.parameter_belief(),
        }
    }

    pub fn parameter_entropy(&self) -> f64 {
        match self {
            ConjugateState::BetaBernoulli(s) => s.parameter_entropy(),
            ConjugateState::NormalGamma(s) => s.parameter_entropy(),
        }
    }

    /// E_{p_n(θ)}[H[p(z | θ)]].
    pub fn expected_conditional_entropy(&self) -> f64 {
        match self {
            ConjugateState::BetaBernoulli(s) => s.expected_conditional_entropy(),
            ConjugateState::NormalGamma(s) => s.expected_conditional_entropy(),
        }
    }

    pub fn predictive_entropy(&self) -> f64 {
        match self {
            ConjugateState::BetaBernoulli(s) => s.predictive_entropy(),
            ConjugateState::NormalGamma(s) => s.predictive_entropy(),
        }
    }
}

impl From<BetaBernoulliState> for ConjugateState {
    fn from(s: BetaBernoulliState) -> Self {
        ConjugateState::BetaBernoulli(s)
    }
}

impl From<NormalGammaState> for ConjugateState {
    fn from(s: NormalGammaState) -> Self {
        ConjugateState::NormalGamma(s)
    }
}
