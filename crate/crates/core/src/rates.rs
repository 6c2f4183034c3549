//! Convergence-rate diagnostics over computed trajectories.

use serde::Serialize;

use crate::discrete::StepSchedule;
use crate::error::{Error, Result};
use crate::hrde::{integrate, HrdeKind, IntegratorConfig, KappaSchedule, PhaseState};
use crate::linalg::Vector;
use crate::lyapunov::schedule_precondition;
use crate::problem::Operator;
use crate::trajectory::{names, StateShape, Trajectory};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Running minimum `m_n = min_{i≤n} x_i`.
pub fn running_min(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut m = f64::INFINITY;
    for &v in values {
        m = m.min(v);
        out.push(m);
    }
    out
}

/// Running minimum of `‖V(z_n)‖` along a trajectory.
pub fn best_iterate(traj: &Trajectory) -> Result<Vec<f64>> {
    let v = traj.metric(names::V_NORM);
    if v.iter().any(|x| x.is_nan()) && !traj.diverged() {
        return Err(Error::invalid("trajectory", "records lack the field norm"));
    }
    Ok(running_min(&v))
}

/// Least-squares line through `(x, ln y)` on a tail of the samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual on the log scale.
    pub rms: f64,
    /// Half-open index range the fit used.
    pub window: (usize, usize),
}

impl RateFit {
    /// Power-law exponent (for fits against `ln t`).
    pub fn exponent(&self) -> f64 {
        self.slope
    }

    /// Geometric rate `ρ̂ = −slope` (for fits against `t`).
    pub fn rho(&self) -> f64 {
        -self.slope
    }
}

fn tail_window(n: usize, tail_fraction: f64) -> Result<(usize, usize)> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::invalid("tail_fraction", "must lie in (0, 1]"));
    }
    let len = ((n as f64) * tail_fraction).ceil() as usize;
    if len < 2 {
        return Err(Error::invalid("samples", "need at least two samples in the window"));
    }
    Ok((n - len, n))
}

fn log_fit(xs: &[f64], values: &[f64], window: (usize, usize)) -> Result<RateFit> {
    let (a, b) = window;
    let mut pts = Vec::with_capacity(b - a);
    for i in a..b {
        let (x, y) = (xs[i], values[i]);
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(Error::invalid("values", format!("non-positive or non-finite sample at index {i}")));
        }
        pts.push((x, y.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("times", "window has no spread"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit { slope, intercept, rms, window })
}

fn check_lengths(times: &[f64], values: &[f64]) -> Result<()> {
    Error::check_dim(times.len(), values.len())
}

/// Slope of `ln(value)` against `ln(time)` over the last `tail_fraction`
/// of the samples.
pub fn fit_power_law(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<RateFit> {
    check_lengths(times, values)?;
    let window = tail_window(times.len(), tail_fraction)?;
    if times[window.0..window.1].iter().any(|t| !(*t > 0.0)) {
        return Err(Error::invalid("times", "power-law fits need positive times"));
    }
    let logt: Vec<f64> = times.iter().map(|t| if *t > 0.0 { t.ln() } else { f64::NAN }).collect();
    log_fit(&logt, values, window)
}

/// Slope of `ln(value)` against time over the last `tail_fraction` of the
/// samples; [`RateFit::rho`] is the decay rate.
pub fn fit_geometric(times: &[f64], values: &[f64], tail_fraction: f64) -> Result<RateFit> {
    check_lengths(times, values)?;
    let window = tail_window(times.len(), tail_fraction)?;
    log_fit(times, values, window)
}

/// Guaranteed exponential rate of the optimistic model on a μ-strongly
/// monotone problem: `1/ρ = 1/μ + 9/(2β)`.
pub fn theoretical_rho(mu: f64, beta: f64) -> f64 {
    1.0 / (1.0 / mu + 9.0 / (2.0 * beta))
}

/// `(8 + 36γ²L²)‖z₀‖² / (2γ²n)`
pub fn ogda_best_iterate_bound(gamma: f64, lipschitz: f64, z0_norm: f64, n: usize) -> f64 {
    (8.0 + 36.0 * gamma * gamma * lipschitz * lipschitz) * z0_norm * z0_norm / (2.0 * gamma * gamma * n as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    /// `n` for each checked record.
    pub n: Vec<usize>,
    /// `min_{i≤n} ‖V(z_i)‖²`
    pub observed: Vec<f64>,
    pub bound: Vec<f64>,
    /// Indices into the vectors above where the bound failed.
    pub violations: Vec<usize>,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest `bound − observed`.
    pub fn min_margin(&self) -> f64 {
        self.observed
            .iter()
            .zip(&self.bound)
            .fold(f64::INFINITY, |m, (o, b)| m.min(b - o))
    }
}

/// Explicit best-iterate bound for OGDA started with `z₁ = z₀`.
///
/// Record `k` of an OGDA run holds `z_{k+1}`, so it is checked with
/// `n = k + 1` against the minimum over records `0..=k`.
pub fn best_iterate_bound_check(traj: &Trajectory, gamma: f64, lipschitz: f64, z0_norm: f64) -> Result<BoundCheck> {
    if traj.method != "ogda" {
        return Err(Error::invalid("trajectory", format!("expected an ogda run, got `{}`", traj.method)));
    }
    if !(lipschitz > 0.0) || !(gamma > 0.0) || gamma * 16.0 * lipschitz > 1.0 + 1e-15 {
        return Err(Error::invalid("gamma", "the bound needs 0 < gamma <= 1/(16L)"));
    }
    let best = best_iterate(traj)?;
    let mut out = BoundCheck { n: Vec::new(), observed: Vec::new(), bound: Vec::new(), violations: Vec::new() };
    for (k, m) in best.iter().enumerate() {
        let n = k + 1;
        let b = ogda_best_iterate_bound(gamma, lipschitz, z0_norm, n);
        let o = m * m;
        if !(o <= b) {
            out.violations.push(k);
        }
        out.n.push(n);
        out.observed.push(o);
        out.bound.push(b);
    }
    Ok(out)
}

/// Ratios `‖V(z_{n+1})‖ / ‖V(z_n)‖` over records with `‖V(z_n)‖ > floor`.
pub fn field_ratios(traj: &Trajectory, floor: f64) -> Vec<f64> {
    let v = traj.metric(names::V_NORM);
    v.windows(2).filter(|p| p[0] > floor).map(|p| p[1] / p[0]).collect()
}

/// `max_{n≥1} ‖V(z_n)‖·√n` over the records of a discrete run.
pub fn sqrt_n_scaled_max(traj: &Trajectory) -> f64 {
    traj.records
        .iter()
        .filter(|r| r.step >= 1)
        .filter_map(|r| r.metric(names::V_NORM).map(|v| v * (r.step as f64).sqrt()))
        .fold(0.0, f64::max)
}

/// Flow matching a decreasing-step run on the effective time axis.
///
/// With `τ_n = Σ_{k<n} γ_k`, the smooth interpolation
/// `n + 1 = (1 + (1−p)τ/γ₀)^{1/(1−p)}` gives `γ(τ) = γ₀ (1 + (1−p)τ/γ₀)^{−p/(1−p)}`
/// and the rate `κ(τ) = 1/(2γ(τ))`.
pub fn apt_kappa_schedule(schedule: &StepSchedule) -> Result<KappaSchedule> {
    schedule.validate()?;
    let p = schedule.power;
    if !(p < 1.0) {
        return Err(Error::invalid("power", "the continuous counterpart needs p < 1"));
    }
    Ok(KappaSchedule::PowerLaw {
        kappa0: 1.0 / (2.0 * schedule.gamma0),
        rate: (1.0 - p) / schedule.gamma0,
        exponent: p / (1.0 - p),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AptConfig {
    /// Horizon `T` of each window.
    pub horizon: f64,
    pub windows: usize,
    /// Effective time of the first anchor. Later anchors are spaced
    /// geometrically up to the end of the run minus the horizon.
    pub first_anchor: f64,
    /// Cap on the RK4 step; also limited to `γ(τ)/20` at the window end.
    pub max_dt: f64,
}

impl Default for AptConfig {
    fn default() -> Self {
        AptConfig { horizon: 1.0, windows: 8, first_anchor: 0.5, max_dt: 1e-3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AptReport {
    pub anchors: Vec<f64>,
    /// `sup_{0≤h≤T} ‖z̄(τ + h) − Φ_h(z̄(τ))‖` per window.
    pub sup_differences: Vec<f64>,
    /// Whether `ββ̇ < 2μ` holds along the flow over the checked range.
    pub precondition_holds: bool,
}

impl AptReport {
    pub fn last_below_first(&self) -> bool {
        match (self.sup_differences.first(), self.sup_differences.last()) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        }
    }

    /// Non-increasing across the second half of the windows.
    pub fn tail_non_increasing(&self) -> bool {
        let n = self.sup_differences.len();
        self.sup_differences[n / 2..].windows(2).all(|p| p[1] <= p[0])
    }
}

/// Piecewise-linear interpolation of the `z` iterates on their time axis.
fn interpolate(times: &[f64], traj: &Trajectory, t: f64) -> Vector {
    let k = times.partition_point(|&s| s <= t);
    if k == 0 {
        return traj.records[0].z.clone();
    }
    if k >= times.len() {
        return traj.last().z.clone();
    }
    let (t0, t1) = (times[k - 1], times[k]);
    let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
    Vector::lincomb(1.0 - s, &traj.records[k - 1].z, s, &traj.records[k].z)
}

/// Windowed distance between a discrete run and the flow of the
/// time-varying optimistic system with rate `flow`, started from the run's
/// own `(z_n, w_n)` at each anchor.
///
/// Anchors snap to the first record at or after each geometric target. The
/// precondition of the decrease estimate is reported, not enforced: it
/// fails for every decreasing step size.
pub fn apt_window_check(
    traj: &Trajectory,
    flow: &KappaSchedule,
    op: &dyn Operator,
    mu: f64,
    cfg: &AptConfig,
) -> Result<AptReport> {
    flow.validate()?;
    if traj.shape != StateShape::Midpoint {
        return Err(Error::invalid("trajectory", "needs (z, w) records"));
    }
    if cfg.windows == 0 || !(cfg.horizon > 0.0) || !(cfg.first_anchor >= 0.0) || !(cfg.max_dt > 0.0) {
        return Err(Error::invalid("apt config", "needs windows >= 1 and positive horizon and step"));
    }
    let times = traj.times();
    let end = *times.last().unwrap();
    let last_anchor = end - cfg.horizon;
    if !(last_anchor > cfg.first_anchor) {
        return Err(Error::invalid("trajectory", "too short for the requested windows"));
    }
    let targets: Vec<f64> = if cfg.windows == 1 {
        vec![cfg.first_anchor]
    } else {
        let lo = cfg.first_anchor.max(1e-3 * cfg.horizon);
        let ratio = (last_anchor / lo).powf(1.0 / (cfg.windows - 1) as f64);
        (0..cfg.windows).map(|j| lo * ratio.powi(j as i32)).collect()
    };

    let mut anchors = Vec::with_capacity(cfg.windows);
    let mut sups = Vec::with_capacity(cfg.windows);
    for target in targets {
        let k = times.partition_point(|&s| s < target - 1e-12).min(times.len() - 1);
        let tau = times[k];
        let rec = &traj.records[k];
        let w = rec
            .aux
            .clone()
            .ok_or_else(|| Error::invalid("trajectory", "record lacks w"))?;
        let local_gamma = 1.0 / (2.0 * flow.value(tau + cfg.horizon));
        let dt = cfg.max_dt.min(local_gamma / 20.0);
        let icfg = IntegratorConfig::rk4(dt, cfg.horizon);
        let s0 = PhaseState::new(rec.z.clone(), w, tau)?;
        let path = integrate(&HrdeKind::Ogda2VarStep { schedule: *flow }, op, &s0, &icfg, &[])?;
        let sup = path
            .records
            .iter()
            .map(|r| (&interpolate(&times, traj, r.time) - &r.z).norm())
            .fold(0.0, f64::max);
        anchors.push(tau);
        sups.push(sup);
    }
    let precondition_holds = schedule_precondition(flow, mu, (anchors[0], end));
    Ok(AptReport { anchors, sup_differences: sups, precondition_holds })
}
