//! Run configuration: a JSON file and command-line flags merged over
//! per-command defaults.

use crate::error::{CliError, CliResult};
use crate::output::{FloatFormat, Format};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "fig2")]
    Fig2,
    #[serde(rename = "fig3")]
    Fig3,
    #[serde(rename = "eur")]
    Eur,
    #[serde(rename = "active-learning")]
    ActiveLearning,
}

impl Command {
    pub fn id(self) -> &'static str {
        match self {
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Eur => "eur",
            Command::ActiveLearning => "active-learning",
        }
    }
}

/// Comma-separated values and half-open ranges: `0..50`, `0..=9,20,30`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct U64List(pub Vec<u64>);

impl FromStr for U64List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || format!("bad list entry {part:?}");
            if let Some((lo, hi)) = part.split_once("..=") {
                let (lo, hi): (u64, u64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
                out.extend(lo..=hi);
            } else if let Some((lo, hi)) = part.split_once("..") {
                let (lo, hi): (u64, u64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
                out.extend(lo..hi);
            } else {
                out.push(part.parse().map_err(|_| bad())?);
            }
        }
        Ok(U64List(out))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct F64List(pub Vec<f64>);

impl FromStr for F64List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| p.parse().map_err(|_| format!("bad number {p:?}")))
            .collect::<Result<_, _>>()
            .map(F64List)
    }
}

/// Every setting as an optional override. Used both for flags and for the
/// contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// Ignored on the command line; checked against the subcommand when read
    /// from a file.
    #[arg(skip)]
    pub command: Option<Command>,
    /// Seeds, e.g. `0..50` or `1,2,3`
    #[arg(long)]
    pub seeds: Option<U64List>,
    /// Training-set sizes, e.g. `1,10,100,1000`
    #[arg(long = "n")]
    pub n: Option<U64List>,
    /// Monte-Carlo repetitions
    #[arg(long, visible_alias = "reps")]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub m0: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Bernoulli truth
    #[arg(long)]
    pub truth_p: Option<f64>,
    /// Normal truth mean
    #[arg(long)]
    pub truth_mean: Option<f64>,
    /// Normal truth variance
    #[arg(long)]
    pub truth_var: Option<f64>,
    /// beta_bernoulli or normal_gamma
    #[arg(long)]
    pub model: Option<String>,
    /// quadratic, log or weighted_quadratic
    #[arg(long)]
    pub loss: Option<String>,
    /// Acquisition horizon
    #[arg(long = "m")]
    pub m: Option<usize>,
    /// Data to condition the prior on, comma-separated
    #[arg(long)]
    pub observations: Option<F64List>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub arms: Option<usize>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// csv or json
    #[arg(long)]
    pub format: Option<Format>,
    /// shortest or fixed:N
    #[arg(long)]
    pub float_format: Option<FloatFormat>,
}

impl Settings {
    /// `self` with every field that `over` sets replaced.
    pub fn overlay(self, over: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            command, seeds, n, mc_samples, alpha, beta, m0, kappa, truth_p, truth_mean, truth_var, model, loss, m,
            observations, steps, arms, grid_points, sigma, format, float_format
        )
    }

    pub fn load(path: &Path) -> CliResult<Settings> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Config {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Fully resolved settings; echoed as `config.json` next to the outputs.
/// The output directory and thread count are deliberately absent so the echo
/// is identical across machines and `--jobs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub seeds: Vec<u64>,
    pub n: Vec<u64>,
    pub mc_samples: usize,
    pub alpha: f64,
    pub beta: f64,
    pub m0: f64,
    pub kappa: f64,
    pub truth_p: Option<f64>,
    pub truth_mean: Option<f64>,
    pub truth_var: Option<f64>,
    pub model: String,
    pub loss: String,
    pub m: usize,
    pub observations: Vec<f64>,
    pub steps: usize,
    pub arms: usize,
    pub grid_points: usize,
    pub sigma: f64,
    pub format: Format,
    pub float_format: FloatFormat,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn resolve(command: Command, s: Settings, out: PathBuf, jobs: Option<usize>) -> CliResult<RunConfig> {
        if let Some(c) = s.command {
            if c != command {
                return Err(CliError::Usage(format!(
                    "config is for {:?}, not {:?}",
                    c.id(),
                    command.id()
                )));
            }
        }
        let default_seeds: Vec<u64> = match command {
            Command::ActiveLearning => (0..20).collect(),
            Command::Eur => vec![0],
            _ => (0..50).collect(),
        };
        let (truth_p, truth_mean, truth_var) = match command {
            Command::Fig3 => (
                Some(s.truth_p.unwrap_or(0.5)),
                Some(s.truth_mean.unwrap_or(1.0)),
                Some(s.truth_var.unwrap_or(1.0)),
            ),
            _ => (s.truth_p, s.truth_mean, s.truth_var),
        };
        let cfg = RunConfig {
            command,
            seeds: s.seeds.map(|l| l.0).unwrap_or(default_seeds),
            n: s.n.map(|l| l.0).unwrap_or_else(|| vec![1, 10, 100, 1000]),
            mc_samples: s.mc_samples.unwrap_or(10_000),
            alpha: s.alpha.unwrap_or(1.0),
            beta: s.beta.unwrap_or(1.0),
            m0: s.m0.unwrap_or(0.0),
            kappa: s.kappa.unwrap_or(1.0),
            truth_p,
            truth_mean,
            truth_var,
            model: s.model.unwrap_or_else(|| "beta_bernoulli".into()),
            loss: s.loss.unwrap_or_else(|| "log".into()),
            m: s.m.unwrap_or(1),
            observations: s.observations.map(|l| l.0).unwrap_or_default(),
            steps: s.steps.unwrap_or(200),
            arms: s.arms.unwrap_or(8),
            grid_points: s.grid_points.unwrap_or(401),
            sigma: s.sigma.unwrap_or(0.1),
            format: s.format.unwrap_or(Format::Csv),
            float_format: s.float_format.unwrap_or(FloatFormat::Shortest),
            out,
            jobs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        if self.seeds.is_empty() {
            return usage("at least one seed is required".into());
        }
        if self.command == Command::Fig3 && self.n.is_empty() {
            return usage("at least one n is required".into());
        }
        if self.command == Command::Fig2 && self.grid_points < 2 {
            return usage("grid_points must be at least 2".into());
        }
        if self.command == Command::ActiveLearning && self.arms < 2 {
            return usage("arms must be at least 2".into());
        }
        if self.jobs == Some(0) {
            return usage("jobs must be at least 1".into());
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("kappa", self.kappa), ("sigma", self.sigma)] {
            if !(v.is_finite() && v > 0.0) {
                return usage(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.m0.is_finite() {
            return usage("m0 must be finite".into());
        }
        if !["beta_bernoulli", "normal_gamma"].contains(&self.model.as_str()) {
            return usage(format!("unknown model {:?}", self.model));
        }
        if dtuq::decision::LossFunction::from_id(&self.loss).is_none() {
            return usage(format!("unknown loss {:?}", self.loss));
        }
        Ok(())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialises");
        s.push('\n');
        s
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}
