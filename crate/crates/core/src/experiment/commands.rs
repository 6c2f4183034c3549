use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Budget, ExperimentConfig, MethodSpec, DEFAULT_ALPHA};
use super::output::{format_float, to_json, trajectory_csv, write_output, RunSummary};
use super::svg::{LogPlot, Series};
use crate::catalog::PROBLEM_IDS;
use crate::discrete::{self, OptimizerKind, METHOD_IDS};
use crate::error::{Error, Result};
use crate::hrde::{self, HrdeKind, PhaseState, HRDE_IDS};
use crate::linalg::Vector;
use crate::lyapunov::{continuous_decrease_check, DecreaseTolerance, LYAPUNOV_IDS};
use crate::problem::{random_bilinear, Operator, DEFAULT_SIGMA_MIN};
use crate::rates::{
    apt_kappa_schedule, apt_window_check, best_iterate, field_ratios, fit_geometric, fit_power_law,
    sqrt_n_scaled_max, theoretical_rho, best_iterate_bound_check, AptConfig, DEFAULT_TAIL_FRACTION,
};
use crate::stability::{stability_scan, StabilityMethod};
use crate::trajectory::{names, Trajectory};

/// Files written by a command, plus the trajectory it ran.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Starting state of a configured run.
///
/// `z0` defaults to the all-ones vector. For continuous models the
/// auxiliary half defaults to rest (`ω = 0`); for the two-variable model it
/// defaults to the `w` that matches the second-order model at rest.
pub fn initial_state(op: &dyn Operator, method: &MethodSpec, cfg: &ExperimentConfig) -> Result<PhaseState> {
    let z0 = match &cfg.z0 {
        Some(z) if z.dim() != op.dim() => {
            return Err(Error::config("z0", format!("expected {} entries, got {}", op.dim(), z.dim())))
        }
        Some(z) => z.clone(),
        None => Vector::from_fn(op.dim(), |_| 1.0),
    };
    let aux = match (method, &cfg.aux0) {
        (MethodSpec::Discrete(_), Some(_)) => return Err(Error::config("aux0", "only continuous models take aux0")),
        (MethodSpec::Discrete(_), None) => Vector::zeros(op.dim()),
        (MethodSpec::Hrde { kind: HrdeKind::GdaOde, .. }, Some(_)) => {
            return Err(Error::config("aux0", "the first-order model has no auxiliary state"))
        }
        (_, Some(a)) => a.clone(),
        (MethodSpec::Hrde { kind, gamma }, None) => match kind {
            HrdeKind::Ogda2 { .. } | HrdeKind::Ogda2VarStep { .. } => {
                hrde::ogda2_w_from_omega(&z0, &Vector::zeros(op.dim()), *gamma, op)?
            }
            _ => Vector::zeros(op.dim()),
        },
    };
    PhaseState::new(z0, aux, 0.0)
}

/// Builds the problem and runs the configured method with its monitors.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Box<dyn Operator>, MethodSpec, Trajectory)> {
    let (method, budget) = cfg.run_plan()?;
    let op = cfg.problem.build()?;
    let monitors = cfg.monitors()?;
    let s0 = initial_state(op.as_ref(), &method, cfg)?;
    let traj = match (method, budget) {
        (MethodSpec::Discrete(kind), Budget::Steps(n)) => discrete::run(op.as_ref(), &kind, &s0.z, n, &monitors)?,
        (MethodSpec::Hrde { kind, .. }, Budget::Time(ic)) => hrde::integrate(&kind, op.as_ref(), &s0, &ic, &monitors)?,
        _ => return Err(Error::config("budget", "does not match the method's mode")),
    };
    Ok((op, method, traj))
}

fn monitor_ids(cfg: &ExperimentConfig) -> Vec<&str> {
    cfg.lyapunov.iter().map(String::as_str).collect()
}

/// Runs the experiment and writes its trace, summary and optional plot.
pub fn cmd_run(cfg: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    let (_, method, traj) = execute(cfg)?;
    let summary = RunSummary::of(&traj);
    let mut files = Vec::new();
    let csv = cfg.outputs.csv.as_deref().unwrap_or("trace.csv");
    files.push(write_output(out, csv, &trajectory_csv(&traj, &monitor_ids(cfg)))?);
    let json = cfg.outputs.json.as_deref().unwrap_or("summary.json");
    files.push(write_output(out, json, &to_json(&summary))?);
    if let Some(svg) = cfg.outputs.svg.as_deref() {
        let x = match method {
            MethodSpec::Discrete(_) => traj.records.iter().map(|r| r.step as f64).collect(),
            MethodSpec::Hrde { .. } => traj.times(),
        };
        let plot = LogPlot {
            title: format!("{} on {}", traj.method, traj.problem),
            x_label: if matches!(method, MethodSpec::Discrete(_)) { "step" } else { "time" }.into(),
            y_label: "distance to solution".into(),
            series: vec![Series { label: traj.method.clone(), x, y: traj.metric(names::DIST) }],
        };
        files.push(write_output(out, svg, &plot.render())?);
    }
    Ok(RunOutcome { trajectory: traj, summary, files })
}

fn write_trace(cfg: &ExperimentConfig, traj: &Trajectory, out: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    if let Some(csv) = cfg.outputs.csv.as_deref() {
        files.push(write_output(out, csv, &trajectory_csv(traj, &monitor_ids(cfg)))?);
    }
    Ok(())
}

/// Checks that every listed functional decreases along the configured run.
pub fn cmd_lyapunov(cfg: &ExperimentConfig, out: &Path) -> Result<(Value, Vec<PathBuf>)> {
    if cfg.lyapunov.is_empty() {
        return Err(Error::config("lyapunov", "list at least one functional to check"));
    }
    let (op, _, traj) = execute(cfg)?;
    let tol = DecreaseTolerance::default();
    let mut reports = Vec::new();
    let mut all_hold = true;
    for kind in cfg.monitors()? {
        let r = continuous_decrease_check(&kind, op.as_ref(), &traj, tol)?;
        all_hold &= r.holds();
        reports.push(json!({
            "kind": r.kind,
            "holds": r.holds(),
            "violations": r.violations,
            "max_increase": r.max_increase,
            "samples": r.samples,
        }));
    }
    let report = json!({
        "method": traj.method,
        "problem": traj.problem,
        "tolerance": { "abs": tol.abs, "rel": tol.rel },
        "diverged": traj.diverged(),
        "all_hold": all_hold,
        "reports": reports,
    });
    let mut files = Vec::new();
    write_trace(cfg, &traj, out, &mut files)?;
    let name = cfg.outputs.json.as_deref().unwrap_or("lyapunov.json");
    files.push(write_output(out, name, &to_json(&report))?);
    Ok((report, files))
}

/// Positive, finite samples on a positive time axis, as fits need.
fn fit_samples(traj: &Trajectory, metric: &str) -> (Vec<f64>, Vec<f64>) {
    traj.records
        .iter()
        .filter_map(|r| {
            let v = r.metric(metric)?;
            (r.time > 0.0 && v > 0.0 && v.is_finite()).then_some((r.time, v))
        })
        .unzip()
}

#[derive(Serialize)]
struct FitReport {
    slope: f64,
    rms: f64,
    samples: usize,
}

/// Rate diagnostics for the configured run.
///
/// Always reports power-law and geometric fits of `‖V‖` and the distance
/// to the solution. Adds the explicit best-iterate bound for eligible
/// optimistic runs, step ratios and `√n`-scaled field norms for discrete
/// runs, the guaranteed exponential rate for the optimistic model on
/// strongly monotone problems, and the window check for decreasing steps.
pub fn cmd_rates(cfg: &ExperimentConfig, out: &Path) -> Result<(Value, Vec<PathBuf>)> {
    let (op, method, traj) = execute(cfg)?;
    let fit = |metric: &str, geometric: bool| -> Value {
        let (t, v) = fit_samples(&traj, metric);
        let r = if geometric {
            fit_geometric(&t, &v, DEFAULT_TAIL_FRACTION)
        } else {
            fit_power_law(&t, &v, DEFAULT_TAIL_FRACTION)
        };
        match r {
            Ok(f) => serde_json::to_value(FitReport { slope: f.slope, rms: f.rms, samples: f.window.1 - f.window.0 })
                .expect("fit serializes"),
            Err(_) => Value::Null,
        }
    };
    let best = best_iterate(&traj)?;
    let mut report = json!({
        "method": traj.method,
        "problem": traj.problem,
        "diverged": traj.diverged(),
        "final_best_v_norm": best.last().copied(),
        "v_norm_power_law": fit(names::V_NORM, false),
        "dist_power_law": fit(names::DIST, false),
        "v_norm_geometric": fit(names::V_NORM, true),
        "dist_geometric": fit(names::DIST, true),
    });
    let mu = op.strong_monotonicity().unwrap_or(0.0);
    match method {
        MethodSpec::Discrete(kind) => {
            let ratios = field_ratios(&traj, 1e-14);
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(*r), b.max(*r)));
            report["field_ratio_range"] = if ratios.is_empty() { Value::Null } else { json!([lo, hi]) };
            report["sqrt_n_scaled_max"] = json!(sqrt_n_scaled_max(&traj));
            if let (OptimizerKind::Ogda { gamma }, Some(l)) = (kind, op.lipschitz()) {
                let z0_norm = traj.first().metric(names::DIST).unwrap_or(f64::NAN);
                report["best_iterate_bound"] = match best_iterate_bound_check(&traj, gamma, l, z0_norm) {
                    Ok(check) => json!({
                        "holds": check.holds(),
                        "min_margin": check.min_margin(),
                        "violations": check.violations,
                        "bound_margins": check.bound.iter().zip(&check.observed).map(|(b, o)| b - o).collect::<Vec<_>>(),
                    }),
                    Err(e) => json!({ "skipped": e.to_string() }),
                };
            }
            if let (OptimizerKind::OgdaVarStep { schedule }, true) = (kind, mu > 0.0) {
                let flow = apt_kappa_schedule(&schedule)?;
                report["apt"] = match apt_window_check(&traj, &flow, op.as_ref(), mu, &AptConfig::default()) {
                    Ok(apt) => json!({
                        "anchors": apt.anchors,
                        "sup_differences": apt.sup_differences,
                        "last_below_first": apt.last_below_first(),
                        "precondition_holds": apt.precondition_holds,
                    }),
                    Err(e) => json!({ "skipped": e.to_string() }),
                };
            }
        }
        MethodSpec::Hrde { kind, .. } => {
            if let (HrdeKind::Ogda { beta }, true) = (kind, mu > 0.0) {
                report["theoretical_rho"] = json!(theoretical_rho(mu, beta));
            }
        }
    }
    let mut files = Vec::new();
    write_trace(cfg, &traj, out, &mut files)?;
    let name = cfg.outputs.json.as_deref().unwrap_or("rates.json");
    files.push(write_output(out, name, &to_json(&report))?);
    Ok((report, files))
}

/// Linear stability of the continuous models over a step-size grid.
pub fn cmd_stability(cfg: &ExperimentConfig, out: &Path) -> Result<(Value, Vec<PathBuf>)> {
    let game = cfg
        .problem
        .bilinear_game()?
        .ok_or_else(|| Error::config("problem.id", "stability analysis needs a bilinear problem"))?;
    let spec = &cfg.stability;
    let mut entries = Vec::new();
    for m in &spec.methods {
        let alpha = m.uses_alpha().then_some(spec.alpha);
        entries.extend(stability_scan(*m, &game, &spec.gammas, alpha)?);
    }
    let report = json!({
        "problem": cfg.problem.id(),
        "smallest_singular_value": game.smallest_singular_value(),
        "all_agree": entries.iter().all(|e| e.agrees),
        "entries": entries,
    });
    let name = cfg.outputs.json.as_deref().unwrap_or("stability.json");
    let file = write_output(out, name, &to_json(&report))?;
    Ok((report, vec![file]))
}

/// Method labels and instances compared in the bilinear figure.
pub fn figure_methods(gamma: f64) -> Vec<(&'static str, OptimizerKind)> {
    vec![
        ("GDA", OptimizerKind::Gda { gamma }),
        ("EG", OptimizerKind::Eg { gamma }),
        ("OGDA", OptimizerKind::Ogda { gamma }),
        ("LA2-GDA", OptimizerKind::LaGda { gamma, k: 2, alpha: DEFAULT_ALPHA }),
        ("LA3-GDA", OptimizerKind::LaGda { gamma, k: 3, alpha: DEFAULT_ALPHA }),
    ]
}

/// Labels of [`figure_methods`], in plotting order.
pub const FIGURE_METHODS: [&str; 5] = ["GDA", "EG", "OGDA", "LA2-GDA", "LA3-GDA"];

#[derive(Clone, Debug)]
pub struct FigureOutcome {
    pub curves: Vec<(&'static str, Trajectory)>,
    pub files: Vec<PathBuf>,
}

/// Distance to the solution against gradient queries for every method in
/// [`figure_methods`], on one seeded `1×1` bilinear game from `z0 = (1, 1)`.
pub fn cmd_figure_bg(gamma: f64, steps: usize, seed: u64, out: &Path, svg: &str, csv: &str) -> Result<FigureOutcome> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::config("gamma", format!("must be positive, got {gamma}")));
    }
    if steps == 0 {
        return Err(Error::config("steps", "must be at least 1"));
    }
    let game = random_bilinear(seed, 1, 1, DEFAULT_SIGMA_MIN)?;
    let z0 = Vector::from_fn(game.dim(), |_| 1.0);
    let mut curves = Vec::new();
    for (label, kind) in figure_methods(gamma) {
        curves.push((label, discrete::run(&game, &kind, &z0, steps, &[])?));
    }

    let mut table = String::from("method,step,queries,dist_to_solution\n");
    for (label, traj) in &curves {
        for r in &traj.records {
            let d = r.metric(names::DIST).unwrap_or(f64::NAN);
            table.push_str(&format!("{label},{},{},{}\n", r.step, r.queries, format_float(d)));
        }
    }
    let plot = LogPlot {
        title: format!("Bilinear game, gamma = {gamma}"),
        x_label: "gradient queries".into(),
        y_label: "distance to solution".into(),
        series: curves
            .iter()
            .map(|(label, traj)| Series {
                label: label.to_string(),
                x: traj.records.iter().map(|r| r.queries as f64).collect(),
                y: traj.metric(names::DIST),
            })
            .collect(),
    };
    let files = vec![write_output(out, svg, &plot.render())?, write_output(out, csv, &table)?];
    Ok(FigureOutcome { curves, files })
}

/// Human-readable list of every identifier the configuration accepts.
pub fn catalog_listing() -> String {
    let section = |title: &str, ids: &[&str]| format!("{title}:\n{}\n", ids.iter().map(|i| format!("  {i}\n")).collect::<String>());
    let stability: Vec<&str> = StabilityMethod::ALL.iter().map(|m| m.id()).collect();
    [
        section("problems", &PROBLEM_IDS),
        section("discrete methods", &METHOD_IDS),
        section("continuous models", &HRDE_IDS),
        section("lyapunov functionals", &LYAPUNOV_IDS),
        section("stability methods", &stability),
    ]
    .join("\n")
}
