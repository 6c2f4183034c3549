//! High-resolution ODE models of the discrete methods and a fixed-step
//! integrator for them.
//!
//! Second-order models are written in phase space as `ż = ω` plus an
//! equation for `ω̇` in which `β = 2/γ`. The optimistic method also has a
//! first-order two-variable form in `(z, w)` with `κ = 1/γ`, optionally with
//! a time-varying `κ(t)`.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::lyapunov::LyapunovKind;
use crate::problem::Operator;
use crate::trajectory::{names, Record, StateShape, Trajectory};

/// A positive rate `κ(t)` for the time-varying optimistic system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KappaSchedule {
    Constant(f64),
    /// `κ(t) = kappa0 · (1 + rate·t)^exponent`
    PowerLaw { kappa0: f64, rate: f64, exponent: f64 },
}

impl KappaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KappaSchedule::Constant(k) if !(k > 0.0 && k.is_finite()) => {
                Err(Error::invalid("kappa", "must be positive"))
            }
            KappaSchedule::PowerLaw { kappa0, rate, exponent }
                if !(kappa0 > 0.0 && rate >= 0.0 && exponent.is_finite()) =>
            {
                Err(Error::invalid("kappa schedule", "needs kappa0 > 0 and rate >= 0"))
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            KappaSchedule::Constant(k) => k,
            KappaSchedule::PowerLaw { kappa0, rate, exponent } => {
                kappa0 * (1.0 + rate * t).powf(exponent)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            KappaSchedule::Constant(_) => 0.0,
            KappaSchedule::PowerLaw { kappa0, rate, exponent } => {
                kappa0 * exponent * rate * (1.0 + rate * t).powf(exponent - 1.0)
            }
        }
    }

    /// `β(t) = 2κ(t)`
    pub fn beta(&self, t: f64) -> f64 {
        2.0 * self.value(t)
    }

    pub fn beta_dot(&self, t: f64) -> f64 {
        2.0 * self.derivative(t)
    }
}

/// The continuous-time models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HrdeKind {
    Gda { beta: f64 },
    Eg { beta: f64 },
    Ogda { beta: f64 },
    La2 { beta: f64, alpha: f64 },
    La3 { beta: f64, alpha: f64 },
    /// Two-variable optimistic system with constant `κ`.
    Ogda2 { kappa: f64 },
    Ogda2VarStep { schedule: KappaSchedule },
    /// `ż = −V(z)`, the common low-resolution limit.
    GdaOde,
}

/// Identifiers accepted by [`HrdeKind::from_id`].
pub const HRDE_IDS: [&str; 8] = [
    "gda-hrde",
    "eg-hrde",
    "ogda-hrde",
    "la2-gda-hrde",
    "la3-gda-hrde",
    "ogda-hrde2",
    "ogda-hrde2-varstep",
    "gda-ode",
];

impl HrdeKind {
    /// Builds a model from an identifier and the step size it models,
    /// using `β = 2/γ` and `κ = 1/γ`.
    pub fn from_id(id: &str, gamma: f64, alpha: f64, schedule: Option<KappaSchedule>) -> Result<Self> {
        let beta = 2.0 / gamma;
        let kind = match id {
            "gda-hrde" => HrdeKind::Gda { beta },
            "eg-hrde" => HrdeKind::Eg { beta },
            "ogda-hrde" => HrdeKind::Ogda { beta },
            "la2-gda-hrde" => HrdeKind::La2 { beta, alpha },
            "la3-gda-hrde" => HrdeKind::La3 { beta, alpha },
            "ogda-hrde2" => HrdeKind::Ogda2 { kappa: 1.0 / gamma },
            "ogda-hrde2-varstep" => HrdeKind::Ogda2VarStep {
                schedule: schedule.unwrap_or(KappaSchedule::Constant(1.0 / gamma)),
            },
            "gda-ode" => HrdeKind::GdaOde,
            other => return Err(Error::invalid("hrde id", format!("unknown model `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn id(&self) -> &'static str {
        match self {
            HrdeKind::Gda { .. } => "gda-hrde",
            HrdeKind::Eg { .. } => "eg-hrde",
            HrdeKind::Ogda { .. } => "ogda-hrde",
            HrdeKind::La2 { .. } => "la2-gda-hrde",
            HrdeKind::La3 { .. } => "la3-gda-hrde",
            HrdeKind::Ogda2 { .. } => "ogda-hrde2",
            HrdeKind::Ogda2VarStep { .. } => "ogda-hrde2-varstep",
            HrdeKind::GdaOde => "gda-ode",
        }
    }

    pub fn shape(&self) -> StateShape {
        match self {
            HrdeKind::Ogda2 { .. } | HrdeKind::Ogda2VarStep { .. } => StateShape::Midpoint,
            HrdeKind::GdaOde => StateShape::Plain,
            _ => StateShape::Velocity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be positive and finite"))
            }
        };
        let unit = |a: f64| {
            if a > 0.0 && a <= 1.0 {
                Ok(())
            } else {
                Err(Error::invalid("alpha", "must lie in (0, 1]"))
            }
        };
        match *self {
            HrdeKind::Gda { beta } | HrdeKind::Eg { beta } | HrdeKind::Ogda { beta } => {
                positive("beta", beta)
            }
            HrdeKind::La2 { beta, alpha } | HrdeKind::La3 { beta, alpha } => {
                positive("beta", beta)?;
                unit(alpha)
            }
            HrdeKind::Ogda2 { kappa } => positive("kappa", kappa),
            HrdeKind::Ogda2VarStep { schedule } => schedule.validate(),
            HrdeKind::GdaOde => Ok(()),
        }
    }
}

/// A point in phase space. `aux` is `ω` or `w` depending on the model.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState {
    pub z: Vector,
    pub aux: Vector,
    pub t: f64,
}

impl PhaseState {
    pub fn new(z: Vector, aux: Vector, t: f64) -> Result<Self> {
        Error::check_dim(z.dim(), aux.dim())?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid("t", "time must be finite and nonnegative"));
        }
        Ok(PhaseState { z, aux, t })
    }

    /// State at rest: `aux = 0`.
    pub fn at_rest(z: Vector) -> Self {
        let aux = Vector::zeros(z.dim());
        PhaseState { z, aux, t: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Euler,
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_end: f64) -> Self {
        IntegratorConfig {
            scheme: Scheme::Rk4,
            dt,
            t_end,
            record_every: 1,
        }
    }

    /// RK4 with `dt = min(1e-3, γ/20)`, which keeps `β·dt ≤ 0.1`.
    pub fn default_for_gamma(gamma: f64, t_end: f64) -> Self {
        Self::rk4(default_dt(gamma), t_end)
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be positive"));
        }
        if self.dt > self.t_end {
            return Err(Error::invalid("dt", "must not exceed t_end"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every", "must be at least 1"));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }
}

pub fn default_dt(gamma: f64) -> f64 {
    (gamma / 20.0).min(1e-3)
}

fn check_state(op: &dyn Operator, s: &PhaseState) -> Result<()> {
    Error::check_dim(op.dim(), s.z.dim())?;
    Error::check_dim(op.dim(), s.aux.dim())?;
    if !s.z.is_finite() || !s.aux.is_finite() {
        return Err(Error::NonFinite("phase state"));
    }
    Ok(())
}

/// Right-hand side `(ż, d aux/dt)` of the selected model.
pub fn rhs(kind: &HrdeKind, op: &dyn Operator, s: &PhaseState) -> Result<(Vector, Vector)> {
    kind.validate()?;
    check_state(op, s)?;
    let (dz, da) = rhs_raw(kind, op, &s.z, &s.aux, s.t);
    if !dz.is_finite() || !da.is_finite() {
        return Err(Error::NonFinite("hrde right-hand side"));
    }
    Ok((dz, da))
}

/// Right-hand side of the two-variable optimistic system with `κ(t)`.
pub fn rhs_varstep(schedule: &KappaSchedule, op: &dyn Operator, s: &PhaseState) -> Result<(Vector, Vector)> {
    rhs(&HrdeKind::Ogda2VarStep { schedule: *schedule }, op, s)
}

/// `ż = −V(z)`.
pub fn low_resolution_ode_rhs(op: &dyn Operator, z: &Vector) -> Result<Vector> {
    Ok(-&crate::problem::eval_field(op, z)?)
}

pub(crate) fn rhs_raw(kind: &HrdeKind, op: &dyn Operator, z: &Vector, aux: &Vector, t: f64) -> (Vector, Vector) {
    let v = op.field(z);
    match *kind {
        HrdeKind::Gda { beta } => (aux.clone(), velocity_rhs(aux, &v, beta, beta, None)),
        HrdeKind::Eg { beta } => {
            let jv = op.jacobian(z).mul_vec(&v);
            (aux.clone(), velocity_rhs(aux, &v, beta, beta, Some((2.0, &jv))))
        }
        HrdeKind::Ogda { beta } => {
            let jw = op.jacobian(z).mul_vec(aux);
            (aux.clone(), velocity_rhs(aux, &v, beta, beta, Some((-2.0, &jw))))
        }
        HrdeKind::La2 { beta, alpha } => {
            let jv = op.jacobian(z).mul_vec(&v);
            let dw = velocity_rhs(aux, &v, beta, 2.0 * alpha * beta, Some((2.0 * alpha, &jv)));
            (aux.clone(), dw)
        }
        HrdeKind::La3 { beta, alpha } => {
            let jv = op.jacobian(z).mul_vec(&v);
            let dw = velocity_rhs(aux, &v, beta, 3.0 * alpha * beta, Some((6.0 * alpha, &jv)));
            (aux.clone(), dw)
        }
        HrdeKind::Ogda2 { kappa } => midpoint_rhs(z, aux, &v, kappa),
        HrdeKind::Ogda2VarStep { schedule } => midpoint_rhs(z, aux, &v, schedule.value(t)),
        HrdeKind::GdaOde => (-&v, Vector::zeros(z.dim())),
    }
}

/// `−damping·ω − gain·V + coef·extra`
fn velocity_rhs(omega: &Vector, v: &Vector, damping: f64, gain: f64, extra: Option<(f64, &Vector)>) -> Vector {
    let mut out = Vector::lincomb(-damping, omega, -gain, v);
    if let Some((c, e)) = extra {
        out.axpy(c, e);
    }
    out
}

fn midpoint_rhs(z: &Vector, w: &Vector, v: &Vector, kappa: f64) -> (Vector, Vector) {
    let dw = Vector::lincomb(-kappa, z, -kappa, w);
    let mut dz = dw.clone();
    dz.axpy(-2.0, v);
    (dz, dw)
}

/// Initial `w0` for the two-variable system so that its `z(t)` coincides
/// with the second-order optimistic model started at `(z0, ω0)`:
/// `w0 = −γω0 − 2γV(z0) − z0`.
pub fn ogda2_w_from_omega(z0: &Vector, omega0: &Vector, gamma: f64, op: &dyn Operator) -> Result<Vector> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    Error::check_dim(z0.dim(), omega0.dim())?;
    let v = crate::problem::eval_field(op, z0)?;
    let mut w = Vector::lincomb(-gamma, omega0, -2.0 * gamma, &v);
    w.axpy(-1.0, z0);
    Ok(w)
}

/// One explicit Euler step of size `γ` on the two-variable system with
/// `κ = 1/(2γ)`. This is the same update as
/// [`step_ogda_s`](crate::discrete::step_ogda_s).
pub fn euler_ogda2(op: &dyn Operator, z: &Vector, w: &Vector, gamma: f64) -> Result<(Vector, Vector)> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    let kind = HrdeKind::Ogda2 { kappa: 1.0 / (2.0 * gamma) };
    let s = PhaseState::new(z.clone(), w.clone(), 0.0)?;
    check_state(op, &s)?;
    Ok(euler_step(&kind, op, &s.z, &s.aux, 0.0, gamma))
}

fn euler_step(kind: &HrdeKind, op: &dyn Operator, z: &Vector, a: &Vector, t: f64, h: f64) -> (Vector, Vector) {
    let (dz, da) = rhs_raw(kind, op, z, a, t);
    let mut z1 = z.clone();
    for (zi, dzi) in z1.as_mut_slice().iter_mut().zip(dz.iter()) {
        *zi += h * dzi;
    }
    let mut a1 = a.clone();
    for (ai, dai) in a1.as_mut_slice().iter_mut().zip(da.iter()) {
        *ai += h * dai;
    }
    (z1, a1)
}

fn rk4_step(kind: &HrdeKind, op: &dyn Operator, z: &Vector, a: &Vector, t: f64, h: f64) -> (Vector, Vector) {
    let (k1z, k1a) = rhs_raw(kind, op, z, a, t);
    let shift = |base: &Vector, k: &Vector, c: f64| Vector::lincomb(1.0, base, c, k);
    let (k2z, k2a) = rhs_raw(kind, op, &shift(z, &k1z, h / 2.0), &shift(a, &k1a, h / 2.0), t + h / 2.0);
    let (k3z, k3a) = rhs_raw(kind, op, &shift(z, &k2z, h / 2.0), &shift(a, &k2a, h / 2.0), t + h / 2.0);
    let (k4z, k4a) = rhs_raw(kind, op, &shift(z, &k3z, h), &shift(a, &k3a, h), t + h);
    let combine = |base: &Vector, k1: &Vector, k2: &Vector, k3: &Vector, k4: &Vector| {
        let mut out = base.clone();
        let s = out.as_mut_slice();
        for i in 0..s.len() {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    };
    (
        combine(z, &k1z, &k2z, &k3z, &k4z),
        combine(a, &k1a, &k2a, &k3a, &k4a),
    )
}

/// Fixed-step integration from `s0` to `cfg.t_end`.
///
/// The initial state and every `record_every`-th step are recorded, and so is
/// the final state. The last step is shortened if `dt` does not divide
/// `t_end`. Each right-hand side evaluation counts as one gradient query.
pub fn integrate(
    kind: &HrdeKind,
    op: &dyn Operator,
    s0: &PhaseState,
    cfg: &IntegratorConfig,
    monitors: &[LyapunovKind],
) -> Result<Trajectory> {
    kind.validate()?;
    cfg.validate()?;
    check_state(op, s0)?;
    for m in monitors {
        m.check_shape(kind.shape())?;
    }
    let steps = cfg.steps();
    let per_step: u64 = match cfg.scheme {
        Scheme::Euler => 1,
        Scheme::Rk4 => 4,
    };
    let mut traj = Trajectory::new(kind.id().to_string(), op.label(), kind.shape());
    let solution = op.solution();

    let (mut z, mut a) = (s0.z.clone(), s0.aux.clone());
    let t0 = s0.t;
    traj.push(continuous_record(kind, op, &solution, 0, t0, 0, &z, &a, monitors));
    for k in 1..=steps {
        let t_prev = t0 + (k - 1) as f64 * cfg.dt;
        let t_next = if k == steps { t0 + cfg.t_end } else { t0 + k as f64 * cfg.dt };
        let h = t_next - t_prev;
        (z, a) = match cfg.scheme {
            Scheme::Euler => euler_step(kind, op, &z, &a, t_prev, h),
            Scheme::Rk4 => rk4_step(kind, op, &z, &a, t_prev, h),
        };
        if k % cfg.record_every == 0 || k == steps {
            let queries = k as u64 * per_step;
            traj.push(continuous_record(kind, op, &solution, k, t_next, queries, &z, &a, monitors));
        }
    }
    Ok(traj)
}

#[allow(clippy::too_many_arguments)]
fn continuous_record(
    kind: &HrdeKind,
    op: &dyn Operator,
    solution: &Vector,
    step: usize,
    t: f64,
    queries: u64,
    z: &Vector,
    a: &Vector,
    monitors: &[LyapunovKind],
) -> Record {
    let mut metrics = std::collections::BTreeMap::new();
    metrics.insert(names::Z_NORM.to_string(), z.norm());
    metrics.insert(names::DIST.to_string(), (z - solution).norm());
    metrics.insert(names::V_NORM.to_string(), op.field(z).norm());
    let (aux, aux_norm) = match kind.shape() {
        StateShape::Plain => (None, None),
        StateShape::Velocity => (Some(a.clone()), Some(a.norm())),
        StateShape::Midpoint => (Some(a.clone()), Some((z + a).norm())),
    };
    if let Some(n) = aux_norm {
        metrics.insert(names::AUX_NORM.to_string(), n);
    }
    let state = PhaseState {
        z: z.clone(),
        aux: a.clone(),
        t,
    };
    for m in monitors {
        metrics.insert(names::lyapunov(m.id()), m.eval_raw(op, &state));
    }
    Record {
        step,
        time: t,
        queries,
        z: z.clone(),
        aux,
        metrics,
    }
}
