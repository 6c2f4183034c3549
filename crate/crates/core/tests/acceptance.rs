//! Acceptance gate. Every criterion prints one `PASS` or `FAIL` line, and
//! the binary exits nonzero if any of them failed.

use std::panic;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use saddlekit::catalog::ProblemSpec;
use saddlekit::discrete::{self, OptimizerKind, StepSchedule};
use saddlekit::experiment::{self, parse_config};
use saddlekit::hrde::{self, HrdeKind, IntegratorConfig, KappaSchedule, PhaseState};
use saddlekit::linalg::Vector;
use saddlekit::lyapunov::{
    continuous_decrease_check, discrete_ogda_i_decrease, schedule_precondition, DecreaseTolerance, LyapunovKind,
};
use saddlekit::problem::{eval_jacobian, fd_jacobian, random_bilinear, Operator, ScaledIdentityOperator, DEFAULT_FD_STEP, DEFAULT_SIGMA_MIN};
use saddlekit::rates::{
    apt_kappa_schedule, apt_window_check, field_ratios, fit_geometric, sqrt_n_scaled_max, theoretical_rho,
    best_iterate_bound_check, AptConfig,
};
use saddlekit::stability::{
    analyze, eg_hrde_spurious_fixed_point, fixed_point_residual, routh_quartic_gda, routh_quartic_ogda, StabilityMethod,
};
use saddlekit::trajectory::names;

static FAILED: AtomicUsize = AtomicUsize::new(0);

fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    println!("{} criterion {id:>2} ({title}): {detail}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        FAILED.fetch_add(1, Ordering::SeqCst);
    }
}

fn ones(d: usize) -> Vector {
    Vector::from_fn(d, |_| 1.0)
}

fn c01_bilinear_stability_split() {
    let start = Instant::now();
    let gammas = [1e-2, 1e-1, 1.0, 10.0];
    let alphas = [0.25, 0.5, 0.75];
    let mut cases = 0;
    let mut failures: Vec<String> = Vec::new();
    for seed in 0..50u64 {
        let d1 = 1 + (seed % 4) as usize;
        let d2 = 1 + ((seed / 4) % 4) as usize;
        let game = random_bilinear(seed, d1, d2, DEFAULT_SIGMA_MIN).unwrap();
        for &g in &gammas {
            for m in StabilityMethod::ALL {
                let alpha_grid: Vec<Option<f64>> = if m.uses_alpha() { alphas.iter().copied().map(Some).collect() } else { vec![None] };
                for alpha in alpha_grid {
                    cases += 1;
                    let v = match analyze(m, &game, g, alpha) {
                        Ok(v) => v,
                        Err(e) => {
                            failures.push(format!("{} seed {seed} gamma {g} alpha {alpha:?}: {e}", m.id()));
                            continue;
                        }
                    };
                    let sign_ok = if m == StabilityMethod::Gda { v.spectral_abscissa > 0.0 } else { v.spectral_abscissa < 0.0 };
                    if !sign_ok || !v.agrees {
                        failures.push(format!(
                            "{}{} seed {seed} gamma {g}: abscissa {:.3e}, tests agree {}",
                            m.id(),
                            alpha.map(|a| format!(" alpha {a}")).unwrap_or_default(),
                            v.spectral_abscissa,
                            v.agrees
                        ));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mut by_kind: std::collections::BTreeMap<String, usize> = Default::default();
    for f in &failures {
        let key = f.split(" seed").next().unwrap().to_string();
        *by_kind.entry(key).or_default() += 1;
    }
    for f in failures.iter().filter(|f| f.contains("alpha Some") || f.starts_with("gda")) {
        println!("  {f}");
    }
    let detail = format!("{cases} cases in {secs:.2}s, {} off-sign or disagreeing: {by_kind:?}", failures.len());
    verdict(1, "bilinear stability split", failures.is_empty() && secs < 30.0, &detail);
}

fn c02_routh_fixtures() {
    let gda = routh_quartic_gda(2.0, -1.0).unwrap();
    let ogda = routh_quartic_ogda(2.0, -1.0).unwrap();
    let close = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12);
    let gda_ok = close(&gda.first_column, &[1.0, 4.0, 4.0, -4.0, 4.0]) && gda.sign_changes == 2;
    let ogda_expected = [1.0, 4.0, 6.0, 32.0 / 3.0, 128.0 / 3.0];
    let ogda_ok = close(&ogda.first_column, &ogda_expected) && ogda.sign_changes == 0;
    let detail = format!(
        "gda column {:?} ({} changes); ogda column {:?} ({} changes), expected {:?}",
        gda.first_column, gda.sign_changes, ogda.first_column, ogda.sign_changes, ogda_expected
    );
    verdict(2, "Routh fixtures", gda_ok && ogda_ok, &detail);
}

fn c03_figure_reproduction() {
    let start = Instant::now();
    let game = random_bilinear(0, 1, 1, DEFAULT_SIGMA_MIN).unwrap();
    let z0 = ones(2);
    let mut notes = Vec::new();
    let mut ok = true;
    for (label, kind) in experiment::figure_methods(0.05) {
        let traj = discrete::run(&game, &kind, &z0, 2000, &[]).unwrap();
        let dist = traj.metric(names::DIST);
        if label == "GDA" {
            let increasing = dist.windows(2).all(|d| d[1] > d[0]);
            ok &= increasing;
            notes.push(format!("GDA increasing {increasing}"));
        } else {
            let target = 1e-3 * dist[0];
            let hit = traj.records.iter().find(|r| r.queries <= 4000 && r.metric(names::DIST).unwrap() <= target);
            let best = traj
                .records
                .iter()
                .filter(|r| r.queries <= 4000)
                .map(|r| r.metric(names::DIST).unwrap() / dist[0])
                .fold(f64::INFINITY, f64::min);
            ok &= hit.is_some();
            notes.push(format!("{label} best ratio {best:.3e}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    let a = game.matrix().row(0)[0];
    verdict(3, "figure reproduction", ok, &format!("a = {a:.5}, {}; {secs:.2}s", notes.join(", ")));
}

fn gamma_for(spec: &ProblemSpec) -> f64 {
    match spec {
        ProblemSpec::Quartic => 0.01,
        _ => 0.05,
    }
}

fn c04_ogda_matches_two_variable_form() {
    let mut worst: f64 = 0.0;
    let mut names_seen = Vec::new();
    for spec in ProblemSpec::defaults() {
        let op = spec.build().unwrap();
        let gamma = gamma_for(&spec);
        let z0 = ones(op.dim());
        let a = discrete::run(op.as_ref(), &OptimizerKind::Ogda { gamma }, &z0, 1000, &[]).unwrap();
        let b = discrete::run(op.as_ref(), &OptimizerKind::OgdaS { gamma }, &z0, 1001, &[]).unwrap();
        for m in 0..=1000 {
            let (za, zb) = (&a.records[m].z, &b.records[m + 1].z);
            for i in 0..za.dim() {
                worst = worst.max((za[i] - zb[i]).abs());
            }
        }
        names_seen.push(spec.id());
    }
    verdict(4, "OGDA = OGDA-S", worst <= 1e-12, &format!("max coordinate gap {worst:.3e} over {names_seen:?}"));
}

fn c05_second_order_and_two_variable_models_coincide() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cfg = IntegratorConfig::rk4(1e-4, 1.0).with_record_every(100);
    let mut worst: f64 = 0.0;
    for i in 0..20u64 {
        let op: Box<dyn Operator> = if i % 2 == 0 {
            Box::new(random_bilinear(i, 1 + (i % 3) as usize, 1 + (i % 2) as usize, DEFAULT_SIGMA_MIN).unwrap())
        } else {
            Box::new(ScaledIdentityOperator::new(rng.random_range(0.2..2.0), 2).unwrap())
        };
        let d = op.dim();
        let gamma = rng.random_range(0.2..1.0);
        let z0 = Vector::from_fn(d, |_| rng.random_range(-1.0..1.0));
        let omega0 = Vector::from_fn(d, |_| rng.random_range(-1.0..1.0));
        let w0 = hrde::ogda2_w_from_omega(&z0, &omega0, gamma, op.as_ref()).unwrap();
        let second = HrdeKind::from_id("ogda-hrde", gamma, 0.25, None).unwrap();
        let two_var = HrdeKind::from_id("ogda-hrde2", gamma, 0.25, None).unwrap();
        let a = hrde::integrate(&second, op.as_ref(), &PhaseState::new(z0.clone(), omega0, 0.0).unwrap(), &cfg, &[]).unwrap();
        let b = hrde::integrate(&two_var, op.as_ref(), &PhaseState::new(z0, w0, 0.0).unwrap(), &cfg, &[]).unwrap();
        assert_eq!(a.len(), b.len());
        for (ra, rb) in a.records.iter().zip(&b.records) {
            worst = worst.max((&ra.z - &rb.z).norm_inf());
        }
    }
    verdict(5, "second-order vs two-variable model", worst <= 1e-6, &format!("sup-norm gap {worst:.3e} over 20 tuples"));
}

fn c06_lyapunov_decrease() {
    let tol = DecreaseTolerance { abs: 1e-7, rel: 0.0 };
    let ic = IntegratorConfig::rk4(1e-3, 2.0);
    let gamma = 0.5;
    let problems = [
        ProblemSpec::unit_bilinear(),
        ProblemSpec::BilinearRandom { seed: 7, d1: 2, d2: 3, sigma_min: 0.1 },
        ProblemSpec::ScaledIdentity { mu: 1.0, dim: 2 },
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for spec in &problems {
        let op = spec.build().unwrap();
        let mu = op.strong_monotonicity().unwrap_or(0.0);
        let z0 = ones(op.dim());
        let rest = PhaseState::at_rest(z0.clone());
        let w0 = hrde::ogda2_w_from_omega(&z0, &Vector::zeros(op.dim()), gamma, op.as_ref()).unwrap();
        let schedule = if mu > 0.0 {
            KappaSchedule::PowerLaw { kappa0: 0.5, rate: 1.0, exponent: 0.1 }
        } else {
            KappaSchedule::PowerLaw { kappa0: 0.5, rate: 0.1, exponent: -1.0 }
        };
        assert!(schedule_precondition(&schedule, mu, (0.0, 2.0)), "schedule must satisfy the precondition");
        let w0_var = hrde::ogda2_w_from_omega(&z0, &Vector::zeros(op.dim()), 1.0 / schedule.value(0.0), op.as_ref()).unwrap();
        let runs = [
            ("ogda-hrde", HrdeKind::from_id("ogda-hrde", gamma, 0.25, None).unwrap(), rest.clone(), vec!["ogda_l1", "ogda_l2"]),
            ("ogda-hrde2", HrdeKind::from_id("ogda-hrde2", gamma, 0.25, None).unwrap(), PhaseState::new(z0.clone(), w0, 0.0).unwrap(), vec!["ogda2_l3", "ogda2_l4"]),
            (
                "ogda-hrde2-varstep",
                HrdeKind::Ogda2VarStep { schedule },
                PhaseState::new(z0.clone(), w0_var, 0.0).unwrap(),
                vec!["ogda_g2_l"],
            ),
        ];
        for (model, kind, s0, ids) in runs {
            let traj = hrde::integrate(&kind, op.as_ref(), &s0, &ic, &[]).unwrap();
            for id in ids {
                let lk = LyapunovKind::for_hrde(id, &kind).unwrap();
                let r = continuous_decrease_check(&lk, op.as_ref(), &traj, tol).unwrap();
                ok &= r.holds();
                notes.push(format!("{}/{model}/{id}: {}", spec.id(), r.violations.len()));
            }
        }
    }
    verdict(6, "Lyapunov decrease", ok, &format!("violations {}", notes.join(", ")));
}

fn bound_runs() -> Vec<(&'static str, Box<dyn Operator>, f64)> {
    vec![
        ("bilinear", ProblemSpec::unit_bilinear().build().unwrap(), 1.0),
        ("scaled-identity", Box::new(ScaledIdentityOperator::new(1.0, 2).unwrap()), 1.0),
    ]
}

/// Step budget within which the last iterate must reach `‖V‖ < 1e-6`.
const LAST_ITERATE_BUDGET: usize = 10_000;

fn c07_explicit_best_iterate_bound() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, op, l) in bound_runs() {
        let gamma = 1.0 / (16.0 * l);
        let z0 = ones(op.dim());
        let traj = discrete::run(op.as_ref(), &OptimizerKind::Ogda { gamma }, &z0, 10_000, &[]).unwrap();
        let check = best_iterate_bound_check(&traj, gamma, l, z0.norm()).unwrap();
        let hit = traj.records.iter().find(|r| r.metric(names::V_NORM).unwrap() < 1e-6).map(|r| r.step);
        ok &= check.holds() && hit.is_some_and(|n| n <= LAST_ITERATE_BUDGET);
        notes.push(format!("{name}: min margin {:.3e}, |V| < 1e-6 at step {hit:?}", check.min_margin()));
    }
    verdict(7, "explicit best-iterate bound", ok, &notes.join("; "));
}

fn c08_consecutive_field_ratio() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, op, l) in bound_runs() {
        let gamma = 1.0 / (16.0 * l);
        let traj = discrete::run(op.as_ref(), &OptimizerKind::Ogda { gamma }, &ones(op.dim()), 10_000, &[]).unwrap();
        let r = field_ratios(&traj, 1e-14);
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        ok &= lo >= 0.5 && hi <= 1.5;
        notes.push(format!("{name}: [{lo:.4}, {hi:.4}] over {} steps", r.len()));
    }
    verdict(8, "consecutive field ratio", ok, &notes.join("; "));
}

fn c09_strongly_monotone_rate() {
    let op = ScaledIdentityOperator::new(1.0, 2).unwrap();
    let beta = 2.0;
    let kind = HrdeKind::Ogda { beta };
    let traj = hrde::integrate(&kind, &op, &PhaseState::at_rest(ones(2)), &IntegratorConfig::rk4(1e-3, 30.0).with_record_every(10), &[])
        .unwrap();
    let fit = fit_geometric(&traj.times(), &traj.metric(names::Z_NORM), 0.5).unwrap();
    let rho = theoretical_rho(1.0, beta);
    let ok = fit.rho() >= rho - 0.01;
    verdict(9, "strongly monotone rate", ok, &format!("fitted rho {:.5} vs guaranteed {rho:.5}", fit.rho()));
}


fn c10_implicit_scheme_rate_and_decrease() {
    let op = ScaledIdentityOperator::new(1.0, 2).unwrap();
    let gamma = 0.5;
    let traj = discrete::run(&op, &OptimizerKind::implicit(gamma), &ones(2), 10_000, &[]).unwrap();
    assert!(traj.halted.is_none());
    let scaled = sqrt_n_scaled_max(&traj);
    // The `‖z0‖/√n` rate with unit constant.
    let bound = ones(2).norm();
    let (mut d1, mut d2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for w in traj.records.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (x, y) = discrete_ogda_i_decrease(&op, (&a.z, a.aux.as_ref().unwrap()), (&b.z, b.aux.as_ref().unwrap()), gamma).unwrap();
        d1 = d1.max(x);
        d2 = d2.max(y);
    }
    let ok = scaled <= bound && d1 <= 1e-10 && d2 <= 1e-10;
    verdict(
        10,
        "implicit scheme",
        ok,
        &format!("max |V|*sqrt(n) = {scaled:.5} (bound {bound:.5}), max dL1 {d1:.3e}, max dL2 {d2:.3e}"),
    );
}

fn c11_spurious_equilibria_of_extragradient_model() {
    let mut ok = true;
    let mut notes = Vec::new();
    for beta in [6.0, 24.0, 96.0] {
        let z = eg_hrde_spurious_fixed_point(beta).unwrap();
        let eg = fixed_point_residual(&HrdeKind::Eg { beta }, &z).unwrap();
        let og = fixed_point_residual(&HrdeKind::Ogda { beta }, &z).unwrap();
        ok &= z.norm() > 0.0 && eg <= 1e-10 && og > 1e-6;
        notes.push(format!("beta {beta}: |z| {:.4}, eg rhs {eg:.1e}, ogda rhs {og:.3e}", z.norm()));
    }
    verdict(11, "spurious equilibria", ok, &notes.join("; "));
}

fn c12_numerical_hygiene() {
    // Jacobians.
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst_jac: f64 = 0.0;
    for spec in ProblemSpec::defaults() {
        let op = spec.build().unwrap();
        for _ in 0..10 {
            let z = Vector::from_fn(op.dim(), |_| rng.random_range(-2.0..2.0));
            let j = eval_jacobian(op.as_ref(), &z).unwrap();
            let fd = fd_jacobian(op.as_ref(), &z, DEFAULT_FD_STEP).unwrap();
            let err = saddlekit::linalg::DenseMatrix::lincomb(1.0, &j, -1.0, &fd).frobenius_norm();
            worst_jac = worst_jac.max(err / (1e-4 * (1.0 + j.frobenius_norm())));
        }
    }
    // RK4 order.
    let op = random_bilinear(3, 2, 2, DEFAULT_SIGMA_MIN).unwrap();
    let kind = HrdeKind::Ogda { beta: 4.0 };
    let s0 = PhaseState::at_rest(ones(4));
    let end = |dt: f64| hrde::integrate(&kind, &op, &s0, &IntegratorConfig::rk4(dt, 1.0), &[]).unwrap().last().z.clone();
    let (z1, z2, z3) = (end(0.05), end(0.025), end(0.0125));
    let ratio = (&z1 - &z2).norm() / (&z2 - &z3).norm();
    // Determinism of written outputs.
    let cfg = parse_config(
        r#"{"problem":{"id":"bilinear-random","seed":5,"params":{"d1":2,"d2":2}},"method":{"id":"eg","gamma":0.1},"budget":{"steps":300},"outputs":{"svg":"plot.svg"}}"#,
    )
    .unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = experiment::cmd_run(&cfg, a.path()).unwrap().files;
    let fb = experiment::cmd_run(&cfg, b.path()).unwrap().files;
    let identical = fa.iter().zip(&fb).all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());
    let ok = worst_jac <= 1.0 && ratio >= 8.0 && identical && fa.len() == 3;
    verdict(
        12,
        "numerical hygiene",
        ok,
        &format!("jacobian error / tolerance {worst_jac:.3e}, rk4 halving ratio {ratio:.2}, identical outputs {identical}"),
    );
}

fn c13_asymptotic_pseudotrajectory() {
    let op = ScaledIdentityOperator::new(1.0, 2).unwrap();
    let schedule = StepSchedule::new(0.1, 0.6).unwrap();
    let traj = discrete::run(&op, &OptimizerKind::OgdaVarStep { schedule }, &ones(2), 20_000, &[]).unwrap();
    let flow = apt_kappa_schedule(&schedule).unwrap();
    let report = apt_window_check(&traj, &flow, &op, 1.0, &AptConfig::default()).unwrap();
    let first = report.sup_differences[0];
    let last = *report.sup_differences.last().unwrap();
    verdict(
        13,
        "asymptotic pseudotrajectory",
        report.sup_differences.len() == 8 && report.last_below_first(),
        &format!("first window {first:.3e}, last window {last:.3e}"),
    );
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 13] = [
        ("c01_bilinear_stability_split", c01_bilinear_stability_split),
        ("c02_routh_fixtures", c02_routh_fixtures),
        ("c03_figure_reproduction", c03_figure_reproduction),
        ("c04_ogda_matches_two_variable_form", c04_ogda_matches_two_variable_form),
        ("c05_second_order_and_two_variable_models_coincide", c05_second_order_and_two_variable_models_coincide),
        ("c06_lyapunov_decrease", c06_lyapunov_decrease),
        ("c07_explicit_best_iterate_bound", c07_explicit_best_iterate_bound),
        ("c08_consecutive_field_ratio", c08_consecutive_field_ratio),
        ("c09_strongly_monotone_rate", c09_strongly_monotone_rate),
        ("c10_implicit_scheme_rate_and_decrease", c10_implicit_scheme_rate_and_decrease),
        ("c11_spurious_equilibria_of_extragradient_model", c11_spurious_equilibria_of_extragradient_model),
        ("c12_numerical_hygiene", c12_numerical_hygiene),
        ("c13_asymptotic_pseudotrajectory", c13_asymptotic_pseudotrajectory),
    ];
    for (name, check) in criteria {
        if panic::catch_unwind(check).is_err() {
            println!("FAIL {name}: panicked before reaching a verdict");
            FAILED.fetch_add(1, Ordering::SeqCst);
        }
    }
    let failed = FAILED.load(Ordering::SeqCst);
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
