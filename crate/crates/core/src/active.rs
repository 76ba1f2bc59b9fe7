//! Pool-based acquisition over Bernoulli arms with Beta posteriors.
//!
//! Each arm hides a true success probability. Objectives only ever see the
//! posterior states; outcomes are drawn from the hidden biases.

use crate::conjugate::BetaBernoulliState;
use crate::decision::{expected_score, LossFunction};
use crate::dist::{Belief, RngStream};
use crate::error::{Error, Result};
use crate::info::eig_theta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    Bald,
    Entropy,
    Random,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Bald, Objective::Entropy, Objective::Random];

    pub fn id(self) -> &'static str {
        match self {
            Objective::Bald => "bald",
            Objective::Entropy => "entropy",
            Objective::Random => "random",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.id() == id)
    }

    /// Index of the arm to query next; ties go to the lowest index.
    pub fn select(self, arms: &[BetaBernoulliState], rng: &mut RngStream) -> usize {
        assert!(!arms.is_empty(), "cannot select from an empty pool");
        let value = |s: &BetaBernoulliState| match self {
            Objective::Bald => eig_theta(&(*s).into()),
            Objective::Entropy => s.predictive_entropy(),
            Objective::Random => 0.0,
        };
        if self == Objective::Random {
            return rng.index(arms.len());
        }
        let mut best = 0;
        let mut best_value = value(&arms[0]);
        for (i, s) in arms.iter().enumerate().skip(1) {
            let v = value(s);
            if v > best_value {
                best = i;
                best_value = v;
            }
        }
        best
    }
}

#[derive(Debug, Clone)]
pub struct Pool {
    states: Vec<BetaBernoulliState>,
    biases: Vec<f64>,
    distractor: Option<usize>,
}

impl Pool {
    /// Arms given as (prior, hidden bias) pairs.
    pub fn new(arms: Vec<(BetaBernoulliState, f64)>, distractor: Option<usize>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidParameter("pool needs at least one arm".into()));
        }
        if let Some(&(_, b)) = arms.iter().find(|(_, b)| !(0.0..=1.0).contains(b)) {
            return Err(Error::InvalidParameter(format!("arm bias {b} outside [0, 1]")));
        }
        if distractor.is_some_and(|d| d >= arms.len()) {
            return Err(Error::InvalidParameter("distractor index out of range".into()));
        }
        let (states, biases) = arms.into_iter().unzip();
        Ok(Self {
            states,
            biases,
            distractor,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The only view objectives get.
    pub fn posteriors(&self) -> &[BetaBernoulliState] {
        &self.states
    }

    pub fn distractor(&self) -> Option<usize> {
        self.distractor
    }

    /// Draw an outcome for `arm` from its hidden bias and update its posterior.
    pub fn observe(&mut self, arm: usize, rng: &mut RngStream) -> f64 {
        let y = f64::from(u8::from(rng.uniform() < self.biases[arm]));
        self.states[arm] = self.states[arm].update_counts(y as u64, 1 - y as u64);
        y
    }

    /// Pool average of the expected log score of each arm's predictive under
    /// its true Bernoulli.
    pub fn metric(&self) -> f64 {
        let total: f64 = self
            .states
            .iter()
            .zip(&self.biases)
            .map(|(s, &b)| {
                let truth = Belief::bernoulli(b).expect("bias checked");
                expected_score(LossFunction::NegLogLikelihood, &s.predictive(), &truth)
                    .expect("Beta predictive has full support")
            })
            .sum();
        total / self.len() as f64
    }
}

/// Select the next arm for `pool`.
pub fn acquire_step(pool: &Pool, objective: Objective, rng: &mut RngStream) -> usize {
    objective.select(pool.posteriors(), rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasSpec {
    Fixed(f64),
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmSpec {
    pub bias: BiasSpec,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolSpec {
    pub arms: Vec<ArmSpec>,
    pub distractor: Option<usize>,
}

impl PoolSpec {
    /// Arm 0 is a coin-flip distractor with a Beta(200, 200) prior; the other
    /// `arms − 1` have uniform biases and flat priors.
    pub fn distractor_benchmark(arms: usize) -> Self {
        let mut specs = vec![ArmSpec {
            bias: BiasSpec::Fixed(0.5),
            alpha: 200.0,
            beta: 200.0,
        }];
        specs.extend((1..arms.max(1)).map(|_| ArmSpec {
            bias: BiasSpec::Uniform,
            alpha: 1.0,
            beta: 1.0,
        }));
        Self {
            arms: specs,
            distractor: Some(0),
        }
    }

    pub fn build(&self, rng: &mut RngStream) -> Result<Pool> {
        let arms = self
            .arms
            .iter()
            .map(|a| {
                let prior = BetaBernoulliState::new(a.alpha, a.beta)?;
                let bias = match a.bias {
                    BiasSpec::Fixed(b) => b,
                    BiasSpec::Uniform => rng.uniform(),
                };
                Ok((prior, bias))
            })
            .collect::<Result<Vec<_>>>()?;
        Pool::new(arms, self.distractor)
    }
}

impl Default for PoolSpec {
    fn default() -> Self {
        Self::distractor_benchmark(8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub objective: Objective,
    pub seed: u64,
    pub initial_metric: f64,
    pub acquired: Vec<usize>,
    pub metrics: Vec<f64>,
    pub distractor: Option<usize>,
}

impl RunTrace {
    pub fn final_metric(&self) -> f64 {
        *self.metrics.last().unwrap_or(&self.initial_metric)
    }

    /// Fraction of steps spent on `arm`.
    pub fn share(&self, arm: usize) -> f64 {
        if self.acquired.is_empty() {
            return 0.0;
        }
        self.acquired.iter().filter(|&&a| a == arm).count() as f64 / self.acquired.len() as f64
    }

    pub fn distractor_share(&self) -> Option<f64> {
        self.distractor.map(|d| self.share(d))
    }
}

/// Sequential acquire → observe → update for `steps` rounds.
///
/// Child streams of `seed`: 0 draws the hidden biases, 1 drives the random
/// objective, 2 draws outcomes. Biases therefore match across objectives.
pub fn run(spec: &PoolSpec, objective: Objective, steps: usize, seed: u64) -> Result<RunTrace> {
    let root = RngStream::new(seed);
    let mut pool = spec.build(&mut root.child(0))?;
    let mut acquisition = root.child(1);
    let mut outcomes = root.child(2);
    let initial_metric = pool.metric();
    let mut acquired = Vec::with_capacity(steps);
    let mut metrics = Vec::with_capacity(steps);
    for _ in 0..steps {
        let arm = acquire_step(&pool, objective, &mut acquisition);
        pool.observe(arm, &mut outcomes);
        acquired.push(arm);
        metrics.push(pool.metric());
    }
    Ok(RunTrace {
        objective,
        seed,
        initial_metric,
        acquired,
        metrics,
        distractor: pool.distractor(),
    })
}

/// Median of a non-empty slice.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bb(a: f64, b: f64) -> BetaBernoulliState {
        BetaBernoulliState::new(a, b).unwrap()
    }

    #[test]
    fn selection_examples() {
        let mut rng = RngStream::new(0);
        assert_eq!(Objective::Bald.select(&[bb(1.0, 1.0), bb(100.0, 100.0)], &mut rng), 0);
        assert_eq!(Objective::Entropy.select(&[bb(100.0, 100.0), bb(3.0, 1.0)], &mut rng), 0);
        for o in Objective::ALL {
            assert_eq!(o.select(&[bb(2.0, 2.0)], &mut rng), 0);
        }
        // ties go to the lowest index
        assert_eq!(Objective::Bald.select(&[bb(2.0, 2.0), bb(2.0, 2.0)], &mut rng), 0);
    }

    #[test]
    fn initial_metric_is_prior_log_score() {
        let spec = PoolSpec {
            arms: vec![ArmSpec {
                bias: BiasSpec::Fixed(0.3),
                alpha: 2.0,
                beta: 1.0,
            }],
            distractor: None,
        };
        let t = run(&spec, Objective::Bald, 0, 4).unwrap();
        let want = -(0.3 * (2.0f64 / 3.0).ln() + 0.7 * (1.0f64 / 3.0).ln());
        assert!((t.initial_metric - want).abs() < 1e-15);
        assert!(t.acquired.is_empty() && t.final_metric() == t.initial_metric);
    }

    #[test]
    fn random_splits_identical_arms_evenly() {
        let arm = ArmSpec {
            bias: BiasSpec::Fixed(0.5),
            alpha: 1.0,
            beta: 1.0,
        };
        let spec = PoolSpec {
            arms: vec![arm, arm],
            distractor: None,
        };
        let t = run(&spec, Objective::Random, 1000, 9).unwrap();
        let zeros = t.acquired.iter().filter(|&&a| a == 0).count() as f64;
        // 3σ of Binomial(1000, ½) is about 47.4
        assert!((zeros - 500.0).abs() <= 47.5, "{zeros}");
    }

    #[test]
    fn traces_are_deterministic_and_finite() {
        let spec = PoolSpec::default();
        for o in Objective::ALL {
            let a = run(&spec, o, 50, 3).unwrap();
            assert_eq!(a, run(&spec, o, 50, 3).unwrap());
            assert_eq!(a.metrics.len(), 50);
            assert!(a.metrics.iter().all(|m| m.is_finite()));
        }
    }

    #[test]
    fn distractor_is_chased_by_entropy_only() {
        let spec = PoolSpec::default();
        let (mut bald, mut ent) = (0.0, 0.0);
        for seed in 0..5 {
            bald += run(&spec, Objective::Bald, 200, seed).unwrap().distractor_share().unwrap();
            ent += run(&spec, Objective::Entropy, 200, seed).unwrap().distractor_share().unwrap();
        }
        assert!(ent > bald);
    }

    #[test]
    fn pool_validation() {
        assert!(Pool::new(vec![], None).is_err());
        assert!(Pool::new(vec![(bb(1.0, 1.0), 1.5)], None).is_err());
        assert!(Pool::new(vec![(bb(1.0, 1.0), 0.5)], Some(1)).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
