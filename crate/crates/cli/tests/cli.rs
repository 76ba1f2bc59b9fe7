use dtuq::active::Objective;
use dtuq_cli::commands::{al_traces, median_trajectory};
use dtuq_cli::config::{Command, RunConfig, Settings};
use std::process::{Command as Process, Output};

fn dtuq(args: &[&str]) -> Output {
    Process::new(env!("CARGO_BIN_EXE_dtuq")).args(args).output().unwrap()
}

fn lines(path: &std::path::Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().map(String::from).collect()
}

#[test]
fn default_row_counts_and_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = |name: &str| tmp.path().join(name);
    for cmd in ["fig2", "fig3", "active-learning"] {
        let o = dtuq(&[cmd, "--out", out(cmd).to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let fig2 = lines(&out("fig2").join("fig2.csv"));
    assert_eq!(fig2[0], "x,loss,uncertainty,dispersion,expected_score,degenerate_flag");
    assert_eq!(fig2.len() - 1, 802);
    for row in fig2.iter().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let (disp, score): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        assert!(score - disp >= -1e-8, "{row}");
        if f[1] == "quadratic" {
            assert!((disp - 0.01).abs() < 1e-12);
        }
    }

    let fig3 = lines(&out("fig3").join("fig3.csv"));
    assert_eq!(fig3[0], "model,n,seed,eig_theta,eig_theta_true,ig_z_inf,eps_theta,eps_z");
    assert_eq!(fig3.len() - 1, 400);
    let summary = lines(&out("fig3").join("fig3_summary.csv"));
    assert_eq!(summary.len() - 1, 8);
    for model in ["beta_bernoulli", "normal_gamma"] {
        let eps: Vec<f64> = summary
            .iter()
            .filter(|l| l.starts_with(model))
            .map(|l| l.split(',').nth(6).unwrap().parse().unwrap())
            .collect();
        assert!(eps[3] < eps[0], "{model}: {eps:?}");
    }
    assert!(out("fig3").join("fig3.svg").exists());

    let al = lines(&out("active-learning").join("al.csv"));
    assert_eq!(al[0], "objective,seed,step,acquired_arm,metric");
    assert_eq!(al.len() - 1, 3 * 20 * 200);
    let svg = std::fs::read_to_string(out("active-learning").join("al.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 3);
}

#[test]
fn identical_invocations_write_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = dtuq(&["fig3", "--seeds", "0..5", "--n", "1,10", "--out", dir.to_str().unwrap()]);
        assert!(o.status.success());
    }
    for f in ["fig3.csv", "fig3_summary.csv", "fig3.svg", "config.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn eur_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtuq(&["eur", "--alpha", "1", "--beta", "1", "--loss", "log", "--m", "1", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "exhaustive");
    assert!((v["eur_estimate"].as_f64().unwrap() - 0.0566).abs() < 5e-5);
    assert!(v.get("eur_true").is_none());

    let o = dtuq(&["eur", "--truth-p", "0.5", "--out", tmp.path().to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["eur_true"].as_f64().unwrap() - 0.0566).abs() < 5e-5);
    let file: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("eur.json")).unwrap()).unwrap();
    assert_eq!(file, v);
}

#[test]
fn monte_carlo_eur_reports_its_method() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtuq(&["eur", "--model", "normal_gamma", "--m", "2", "--mc-samples", "500", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["method"], "monte_carlo");
    assert!(v["standard_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let o = dtuq(&["eur", "--model", "normal_gamma", "--reps", "0", "--out", dir]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Monte-Carlo"));
    assert_eq!(dtuq(&["eur", "--m", "0", "--out", dir]).status.code(), Some(2));
    assert_eq!(dtuq(&["eur", "--model", "poisson", "--out", dir]).status.code(), Some(2));
    assert_eq!(dtuq(&["fig3", "--seeds", "x", "--out", dir]).status.code(), Some(2));
    assert_eq!(dtuq(&["fig2", "--alpha", "-1", "--out", dir]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "fig3", "seeds": [0, 1], "n": [1]}"#).unwrap();
    let out = tmp.path().join("o");
    let o = dtuq(&["fig3", "--config", cfg.to_str().unwrap(), "--n", "1,10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(lines(&out.join("fig3.csv")).len() - 1, 2 * 2 * 2);
    let echoed: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(echoed["n"], serde_json::json!([1, 10]));

    std::fs::write(&cfg, r#"{"seeds": [0], "bogus": 1}"#).unwrap();
    assert_eq!(dtuq(&["fig3", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn json_rows_and_fixed_floats() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dtuq(&["fig2", "--format", "json", "--float-format", "fixed:6", "--grid-points", "5", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("fig2.json")).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[0]["loss"], "quadratic");
    assert_eq!(rows[0]["dispersion"].as_f64().unwrap(), 0.01);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = dtuq(&["eur", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

fn smoothed(xs: &[f64]) -> Vec<f64> {
    xs.windows(20).map(|w| w.iter().sum::<f64>() / 20.0).collect()
}

/// The random objective's seed-median metric, smoothed over 20 steps, never
/// rises. On the default 20-seed run this does not hold: the smoothed median
/// first climbs by 3.6e-5 nats about 67 steps in.
#[test]
#[ignore = "fails on the default 20 seeds; the seed median is too noisy"]
fn random_objective_improves_in_smoothed_median() {
    let cfg = RunConfig::resolve(Command::ActiveLearning, Settings::default(), "unused".into(), None).unwrap();
    let traces = al_traces(&cfg).unwrap();
    let smooth = smoothed(&median_trajectory(&traces, Objective::Random));
    for (i, w) in smooth.windows(2).enumerate() {
        assert!(w[1] <= w[0] + 1e-12, "rises at window {i}: {} -> {}", w[0], w[1]);
    }
}

/// With enough seeds the same smoothed curve is monotone, so the rise above
/// is sampling noise and not a defect of the harness.
#[test]
fn random_objective_improves_over_many_seeds() {
    let settings = Settings {
        seeds: Some("0..1000".parse().unwrap()),
        ..Default::default()
    };
    let cfg = RunConfig::resolve(Command::ActiveLearning, settings, "unused".into(), None).unwrap();
    let traces = al_traces(&cfg).unwrap();
    let traces: Vec<_> = traces.into_iter().filter(|t| t.objective == Objective::Random).collect();
    let smooth = smoothed(&median_trajectory(&traces, Objective::Random));
    for (i, w) in smooth.windows(2).enumerate() {
        assert!(w[1] <= w[0] + 1e-12, "rises at window {i}: {} -> {}", w[0], w[1]);
    }
}
