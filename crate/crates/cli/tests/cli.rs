use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn saddlekit(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddlekit"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

fn assert_config_error(out: &Output, needle: &str) {
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error:"), "{err}");
    assert!(err.contains(needle), "{err}");
}

const OGDA_CONFIG: &str =
    r#"{"problem":{"id":"bilinear"},"method":{"id":"ogda","gamma":0.0625},"mode":"discrete","budget":{"steps":1000}}"#;

#[test]
fn ogda_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), OGDA_CONFIG);
    let out = saddlekit(dir.path(), &["run", "--config", &cfg]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.starts_with("step,time,queries,z_norm,dist_to_solution,v_norm\n"));
    let queries = csv_column(&csv, "queries");
    assert_eq!(queries.len(), 1001);
    assert!(queries.windows(2).all(|q| q[1] - q[0] == 1.0));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["diverged"], false);
    assert_eq!(summary["queries"], 1000);
}

#[test]
fn gda_drifts_away_without_tripping_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = saddlekit(dir.path(), &["run", "--set", "method.id=gda", "--set", "method.gamma=0.0625", "--set", "budget.steps=1000"]);
    assert!(out.status.success(), "{out:?}");
    let dist = csv_column(&fs::read_to_string(dir.path().join("trace.csv")).unwrap(), "dist_to_solution");
    assert!(dist.windows(2).all(|d| d[1] > d[0]));
    assert_eq!(read_json(&dir.path().join("summary.json"))["diverged"], false);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), OGDA_CONFIG);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(saddlekit(&a, &["run", "--config", &cfg]).status.success());
    assert!(saddlekit(&b, &["run", "--config", &cfg]).status.success());
    for f in ["trace.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"method":{"id":"gda","gamma":-1}}"#);
    assert_config_error(&saddlekit(dir.path(), &["run", "--config", &cfg]), "method.gamma");

    let cfg = write_config(dir.path(), r#"{"mode":"hrde","budget":{"steps":10}}"#);
    assert_config_error(&saddlekit(dir.path(), &["run", "--config", &cfg]), "t_end");

    let cfg = write_config(dir.path(), r#"{"method":{"id":"gda","gamma":0.1},"budget":{"steps":3},"colour":1}"#);
    assert_config_error(&saddlekit(dir.path(), &["run", "--config", &cfg]), "colour");

    assert_config_error(&saddlekit(dir.path(), &["run", "--set", "method"]), "KEY=VALUE");
    assert_config_error(&saddlekit(dir.path(), &["frobnicate"]), "frobnicate");
}

#[test]
fn strict_mode_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["run", "--set", "method.id=gda", "--set", "method.gamma=10", "--set", "budget.steps=40"];
    assert!(saddlekit(dir.path(), &args).status.success());
    assert_eq!(read_json(&dir.path().join("summary.json"))["diverged"], true);
    let mut strict = args.to_vec();
    strict.push("--strict");
    let out = saddlekit(dir.path(), &strict);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn figure_single_step_has_two_points_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = saddlekit(dir.path(), &["figure-bg", "--steps", "1"]);
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("figure_bg.csv")).unwrap();
    for label in ["GDA", "EG", "OGDA", "LA2-GDA", "LA3-GDA"] {
        let n = csv.lines().filter(|l| l.starts_with(&format!("{label},"))).count();
        assert_eq!(n, 2, "{label}");
    }
    let svg = fs::read_to_string(dir.path().join("figure_bg.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
}

#[test]
fn figure_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    assert!(saddlekit(&a, &["figure-bg", "--steps", "200", "--seed", "3"]).status.success());
    assert!(saddlekit(&b, &["figure-bg", "--steps", "200", "--seed", "3"]).status.success());
    assert!(saddlekit(&c, &["figure-bg", "--steps", "200", "--seed", "4"]).status.success());
    let svg = |d: &Path| fs::read(d.join("figure_bg.svg")).unwrap();
    assert_eq!(svg(&a), svg(&b));
    assert_ne!(svg(&a), svg(&c));
}

#[test]
fn stability_of_ogda_over_a_step_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"problem":{"id":"bilinear-random","seed":11,"params":{"d1":3,"d2":2}},
            "stability":{"methods":["ogda"],"gammas":[0.01,0.1,1,10]}}"#,
    );
    let out = saddlekit(dir.path(), &["stability", "--config", &cfg]);
    assert!(out.status.success(), "{out:?}");
    let report = read_json(&dir.path().join("stability.json"));
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert!(entries.iter().all(|e| e["abscissa_verdict"] == "stable" && e["agrees"] == true));
}

#[test]
fn stability_needs_a_bilinear_problem() {
    let dir = tempfile::tempdir().unwrap();
    assert_config_error(&saddlekit(dir.path(), &["stability", "--set", "problem.id=quartic"]), "problem.id");
}

#[test]
fn lyapunov_functionals_decrease_along_the_optimistic_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"method":{"id":"ogda-hrde","gamma":0.5},"mode":"hrde","budget":{"t_end":2,"dt":0.001},
            "lyapunov":["ogda_l1","ogda_l2"],"outputs":{"csv":"trace.csv"}}"#,
    );
    let out = saddlekit(dir.path(), &["lyapunov", "--config", &cfg]);
    assert!(out.status.success(), "{out:?}");
    let report = read_json(&dir.path().join("lyapunov.json"));
    for r in report["reports"].as_array().unwrap() {
        assert_eq!(r["violations"].as_array().unwrap().len(), 0, "{r}");
    }
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with(",lyap_ogda_l1,lyap_ogda_l2"));
}

#[test]
fn rates_bound_margins_are_nonnegative() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), OGDA_CONFIG);
    let out = saddlekit(dir.path(), &["rates", "--config", &cfg]);
    assert!(out.status.success(), "{out:?}");
    let report = read_json(&dir.path().join("rates.json"));
    let margins = report["best_iterate_bound"]["bound_margins"].as_array().unwrap();
    assert_eq!(margins.len(), 1001);
    assert!(margins.iter().all(|m| m.as_f64().unwrap() >= 0.0));
}

#[test]
fn catalog_lists_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let out = saddlekit(dir.path(), &["catalog"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for id in ["bilinear-random", "ogda-implicit", "ogda-hrde2-varstep", "ogda_g2_l", "la3-gda"] {
        assert!(text.contains(id), "{id}");
    }
}
