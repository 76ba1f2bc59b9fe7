//! The four experiments. Each returns its files in memory; writing them is
//! left to [`write_artifacts`].

use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{shortest, write_file, Table};
use crate::svg::{self, Chart, Series};
use dtuq::active::{self, median, Objective, PoolSpec, RunTrace};
use dtuq::conjugate::{BetaBernoulliState, ConjugateState, NormalGammaState};
use dtuq::decision::LossFunction;
use dtuq::dist::{Belief, RngStream};
use dtuq::gp::{default_training, figure2_curves, gp_fit, linspace};
use dtuq::info::{eur_estimate, eur_true, simulate_report, DataSource, ErrorReport, EXHAUSTIVE_MAX_HORIZON};
use rayon::prelude::*;
use std::path::Path;

/// Grid of inputs for the GP curves.
pub const FIG2_RANGE: (f64, f64) = (-8.0, 8.0);
pub const FIG2_LOSSES: [LossFunction; 2] = [LossFunction::Quadratic, LossFunction::WeightedQuadratic];
pub const FIG3_MODELS: [&str; 2] = ["beta_bernoulli", "normal_gamma"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Artifacts {
    /// (file name, contents), written in this order.
    pub files: Vec<(String, String)>,
    pub stdout: Option<String>,
}

impl Artifacts {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

pub fn execute(cfg: &RunConfig) -> CliResult<Artifacts> {
    match cfg.command {
        Command::Fig2 => fig2(cfg),
        Command::Fig3 => fig3(cfg),
        Command::Eur => eur(cfg),
        Command::ActiveLearning => active_learning(cfg),
    }
}

/// Create the output directory, write every artifact and echo the config.
pub fn write_artifacts(cfg: &RunConfig, artifacts: &Artifacts) -> CliResult<()> {
    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    for (name, contents) in &artifacts.files {
        write_file(&dir.join(name), contents)?;
    }
    write_file(&dir.join("config.json"), &cfg.to_json())
}

pub fn run_and_write(cfg: &RunConfig) -> CliResult<Artifacts> {
    let artifacts = execute(cfg)?;
    write_artifacts(cfg, &artifacts)?;
    Ok(artifacts)
}

/// Ordered parallel map on a pool capped at `jobs` threads.
fn par_map<T, R, F>(jobs: Option<usize>, items: &[T], f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> CliResult<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

fn rows_file(cfg: &RunConfig, stem: &str, table: &Table) -> CliResult<(String, String)> {
    table.check_finite(stem)?;
    Ok((
        format!("{stem}.{}", cfg.format.extension()),
        table.render(cfg.format, cfg.float_format),
    ))
}

fn loss(cfg: &RunConfig) -> CliResult<LossFunction> {
    LossFunction::from_id(&cfg.loss).ok_or_else(|| CliError::Usage(format!("unknown loss {:?}", cfg.loss)))
}

fn prior(cfg: &RunConfig, model: &str) -> CliResult<ConjugateState> {
    Ok(match model {
        "beta_bernoulli" => BetaBernoulliState::new(cfg.alpha, cfg.beta)?.into(),
        "normal_gamma" => NormalGammaState::new(cfg.m0, cfg.kappa, cfg.alpha, cfg.beta)?.into(),
        other => return Err(CliError::Usage(format!("unknown model {other:?}"))),
    })
}

/// The configured truth for `model`, if the needed fields are present.
fn truth(cfg: &RunConfig, model: &str) -> CliResult<Option<Belief>> {
    Ok(match model {
        "beta_bernoulli" => cfg.truth_p.map(Belief::bernoulli).transpose()?,
        _ => match (cfg.truth_mean, cfg.truth_var) {
            (Some(m), Some(v)) => Some(Belief::normal(m, v)?),
            (None, None) => None,
            _ => return Err(CliError::Usage("truth_mean and truth_var must be given together".into())),
        },
    })
}

pub fn fig2(cfg: &RunConfig) -> CliResult<Artifacts> {
    let (xs, ys) = default_training();
    let model = gp_fit(&xs, &ys, cfg.sigma)?;
    let grid = linspace(FIG2_RANGE.0, FIG2_RANGE.1, cfg.grid_points);
    let sigma2 = cfg.sigma * cfg.sigma;
    let chunks: Vec<(LossFunction, f64)> =
        FIG2_LOSSES.iter().flat_map(|&l| grid.iter().map(move |&x| (l, x))).collect();
    let rows = par_map(cfg.jobs, &chunks, |&(l, x)| {
        let eval = |x: f64| Belief::normal(x.tanh(), sigma2).expect("positive variance");
        Ok(figure2_curves(&model, eval, &[l], &[x])?.remove(0))
    })?;

    let mut table = Table::new(&["x", "loss", "uncertainty", "dispersion", "expected_score", "degenerate_flag"]);
    for r in &rows {
        table.push(vec![
            r.x.into(),
            r.loss.id().into(),
            r.uncertainty.into(),
            r.dispersion.into(),
            r.expected_score.into(),
            u64::from(r.degenerate).into(),
        ]);
    }
    let charts: Vec<Chart> = FIG2_LOSSES
        .iter()
        .map(|&l| {
            let mine: Vec<_> = rows.iter().filter(|r| r.loss == l).collect();
            let series = |name: &str, f: fn(&dtuq::gp::Figure2Row) -> f64| Series {
                name: name.into(),
                points: mine.iter().map(|r| (r.x, f(r))).collect(),
            };
            Chart {
                title: format!("{} loss", l.id().replace('_', " ")),
                x_label: "x".into(),
                y_label: "value".into(),
                series: vec![
                    series("uncertainty", |r| r.uncertainty),
                    series("dispersion", |r| r.dispersion),
                    series("expected score", |r| r.expected_score),
                ],
                ..Default::default()
            }
        })
        .collect();
    Ok(Artifacts {
        files: vec![rows_file(cfg, "fig2", &table)?, ("fig2.svg".into(), svg::render(&charts))],
        stdout: None,
    })
}

/// Per-(model, n, seed) error reports in that order.
pub fn fig3_reports(cfg: &RunConfig) -> CliResult<Vec<ErrorReport>> {
    let mut tasks = Vec::new();
    for (mi, model) in FIG3_MODELS.iter().enumerate() {
        let mut ns = cfg.n.clone();
        ns.sort_unstable();
        ns.dedup();
        for &n in &ns {
            let mut seeds = cfg.seeds.clone();
            seeds.sort_unstable();
            seeds.dedup();
            for seed in seeds {
                tasks.push((mi, *model, n, seed));
            }
        }
    }
    par_map(cfg.jobs, &tasks, |&(mi, model, n, seed)| {
        let prior = prior(cfg, model)?;
        let truth = truth(cfg, model)?.ok_or_else(|| CliError::Usage(format!("{model} needs a truth")))?;
        // one stream per task: the data for (model, n, seed) never depends on
        // which other tasks run
        let stream = RngStream::new(seed).child(((mi as u64) << 32) | n);
        let mut source = DataSource::new(truth, stream)?;
        let mut report = simulate_report(&prior, &mut source, n as usize)?;
        report.seed = seed;
        Ok(report)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Summary {
    pub model: &'static str,
    pub n: u64,
    pub seeds: usize,
    pub eig_theta: f64,
    pub eig_theta_true: f64,
    pub ig_z_inf: f64,
    pub eps_theta: f64,
    pub eps_z: f64,
}

pub fn fig3_summary(reports: &[ErrorReport]) -> Vec<Fig3Summary> {
    let mut out: Vec<Fig3Summary> = Vec::new();
    for r in reports {
        match out.last_mut() {
            Some(s) if s.model == r.model && s.n == r.n => {
                s.seeds += 1;
                s.eig_theta += r.eig_theta;
                s.eig_theta_true += r.eig_theta_true;
                s.ig_z_inf += r.ig_z_inf;
                s.eps_theta += r.eps_theta;
                s.eps_z += r.eps_z;
            }
            _ => out.push(Fig3Summary {
                model: r.model,
                n: r.n,
                seeds: 1,
                eig_theta: r.eig_theta,
                eig_theta_true: r.eig_theta_true,
                ig_z_inf: r.ig_z_inf,
                eps_theta: r.eps_theta,
                eps_z: r.eps_z,
            }),
        }
    }
    for s in &mut out {
        let k = s.seeds as f64;
        s.eig_theta /= k;
        s.eig_theta_true /= k;
        s.ig_z_inf /= k;
        s.eps_theta /= k;
        s.eps_z /= k;
    }
    out
}

pub fn fig3(cfg: &RunConfig) -> CliResult<Artifacts> {
    let reports = fig3_reports(cfg)?;
    let mut table = Table::new(&["model", "n", "seed", "eig_theta", "eig_theta_true", "ig_z_inf", "eps_theta", "eps_z"]);
    for r in &reports {
        table.push(vec![
            r.model.into(),
            r.n.into(),
            r.seed.into(),
            r.eig_theta.into(),
            r.eig_theta_true.into(),
            r.ig_z_inf.into(),
            r.eps_theta.into(),
            r.eps_z.into(),
        ]);
    }
    let summary = fig3_summary(&reports);
    let mut stable = Table::new(&[
        "model",
        "n",
        "seeds",
        "mean_eig_theta",
        "mean_eig_theta_true",
        "mean_ig_z_inf",
        "mean_eps_theta",
        "mean_eps_z",
    ]);
    for s in &summary {
        stable.push(vec![
            s.model.into(),
            s.n.into(),
            s.seeds.into(),
            s.eig_theta.into(),
            s.eig_theta_true.into(),
            s.ig_z_inf.into(),
            s.eps_theta.into(),
            s.eps_z.into(),
        ]);
    }
    let charts: Vec<Chart> = FIG3_MODELS
        .iter()
        .map(|&model| {
            let mine: Vec<&Fig3Summary> = summary.iter().filter(|s| s.model == model).collect();
            Chart {
                title: model.replace('_', "-"),
                x_label: "n".into(),
                y_label: "mean squared error (nats^2)".into(),
                log_x: true,
                log_y: true,
                series: vec![
                    Series {
                        name: "eps_theta".into(),
                        points: mine.iter().map(|s| (s.n as f64, s.eps_theta)).collect(),
                    },
                    Series {
                        name: "eps_z".into(),
                        points: mine.iter().map(|s| (s.n as f64, s.eps_z)).collect(),
                    },
                ],
            }
        })
        .collect();
    Ok(Artifacts {
        files: vec![
            rows_file(cfg, "fig3", &table)?,
            rows_file(cfg, "fig3_summary", &stable)?,
            ("fig3.svg".into(), svg::render(&charts)),
        ],
        stdout: None,
    })
}

pub fn eur(cfg: &RunConfig) -> CliResult<Artifacts> {
    if cfg.m == 0 {
        return Err(CliError::Usage("m must be at least 1".into()));
    }
    let loss = loss(cfg)?;
    let state = prior(cfg, &cfg.model)?.update(&cfg.observations)?;
    let exhaustive = matches!(state, ConjugateState::BetaBernoulli(_)) && cfg.m <= EXHAUSTIVE_MAX_HORIZON;
    if !exhaustive && cfg.mc_samples == 0 {
        return Err(CliError::Usage(format!(
            "{} with m = {} needs Monte-Carlo sampling; --mc-samples must be at least 1",
            cfg.model, cfg.m
        )));
    }
    let root = RngStream::new(cfg.seeds[0]);
    let est = eur_estimate(loss, &state, cfg.m, cfg.mc_samples, &mut root.child(0))?;

    let mut fields: Vec<(&str, String)> = vec![
        ("model", json_str(&cfg.model)),
        ("loss", json_str(loss.id())),
        ("m", cfg.m.to_string()),
    ];
    if let Some(t) = truth(cfg, &cfg.model)? {
        let mut source = DataSource::new(t, root.child(1))?;
        let tr = eur_true(loss, &state, &mut source, cfg.m, cfg.mc_samples)?;
        finite("eur_true", tr.value)?;
        fields.push(("eur_true", cfg.float_format.format(tr.value)));
        fields.push(("eur_true_standard_error", cfg.float_format.format(tr.standard_error)));
        fields.push(("eur_true_method", json_str(tr.method.id())));
    }
    finite("eur_estimate", est.value)?;
    fields.push(("eur_estimate", cfg.float_format.format(est.value)));
    fields.push(("standard_error", cfg.float_format.format(est.standard_error)));
    fields.push(("method", json_str(est.method.id())));

    let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
    let json = format!("{{\n{}\n}}\n", body.join(",\n"));
    Ok(Artifacts {
        files: vec![("eur.json".into(), json.clone())],
        stdout: Some(json),
    })
}

fn finite(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::NonFinite {
            row: format!("{name} = {}", shortest(v)),
        })
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialises")
}

/// Traces ordered by objective then seed.
pub fn al_traces(cfg: &RunConfig) -> CliResult<Vec<RunTrace>> {
    let spec = PoolSpec::distractor_benchmark(cfg.arms);
    let tasks: Vec<(Objective, u64)> = Objective::ALL
        .iter()
        .flat_map(|&o| cfg.seeds.iter().map(move |&s| (o, s)))
        .collect();
    par_map(cfg.jobs, &tasks, |&(o, seed)| Ok(active::run(&spec, o, cfg.steps, seed)?))
}

/// Seed-median metric at each step (index 0 is before any acquisition).
pub fn median_trajectory(traces: &[RunTrace], objective: Objective) -> Vec<f64> {
    let mine: Vec<&RunTrace> = traces.iter().filter(|t| t.objective == objective).collect();
    let steps = mine.first().map_or(0, |t| t.metrics.len());
    (0..=steps)
        .map(|k| {
            let xs: Vec<f64> = mine
                .iter()
                .map(|t| if k == 0 { t.initial_metric } else { t.metrics[k - 1] })
                .collect();
            median(&xs)
        })
        .collect()
}

pub fn active_learning(cfg: &RunConfig) -> CliResult<Artifacts> {
    let traces = al_traces(cfg)?;
    let mut table = Table::new(&["objective", "seed", "step", "acquired_arm", "metric"]);
    for t in &traces {
        for (k, (&arm, &metric)) in t.acquired.iter().zip(&t.metrics).enumerate() {
            table.push(vec![t.objective.id().into(), t.seed.into(), (k + 1).into(), arm.into(), metric.into()]);
        }
    }
    let mut summary = Table::new(&["objective", "median_final_metric", "mean_distractor_share"]);
    for o in Objective::ALL {
        let mine: Vec<&RunTrace> = traces.iter().filter(|t| t.objective == o).collect();
        let finals: Vec<f64> = mine.iter().map(|t| t.final_metric()).collect();
        let share = mine.iter().filter_map(|t| t.distractor_share()).sum::<f64>() / mine.len() as f64;
        summary.push(vec![o.id().into(), median(&finals).into(), share.into()]);
    }
    let chart = Chart {
        title: "median expected log score".into(),
        x_label: "acquisitions".into(),
        y_label: "nats".into(),
        series: Objective::ALL
            .iter()
            .map(|&o| Series {
                name: o.id().into(),
                points: median_trajectory(&traces, o).into_iter().enumerate().map(|(k, v)| (k as f64, v)).collect(),
            })
            .collect(),
        ..Default::default()
    };
    Ok(Artifacts {
        files: vec![
            rows_file(cfg, "al", &table)?,
            rows_file(cfg, "al_summary", &summary)?,
            ("al.svg".into(), svg::render(&[chart])),
        ],
        stdout: None,
    })
}

/// Used by the binary to report where things went.
pub fn describe(cfg: &RunConfig, artifacts: &Artifacts) -> String {
    let names: Vec<String> = artifacts
        .files
        .iter()
        .map(|(n, _)| n.clone())
        .chain(std::iter::once("config.json".to_string()))
        .map(|n| Path::new(&cfg.out).join(n).display().to_string())
        .collect();
    format!("wrote {}", names.join(", "))
}
