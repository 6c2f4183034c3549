//! Discrete-time first-order methods for monotone games and the run loop
//! that records their trajectories.
//!
//! The public `step_*` functions are checked wrappers. They validate inputs
//! and report a non-finite result as an error. [`run`] uses the unchecked
//! versions so that a diverging method still produces a full trajectory.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hrde::PhaseState;
use crate::linalg::Vector;
use crate::lyapunov::LyapunovKind;
use crate::problem::Operator;
use crate::trajectory::{is_diverged, names, Record, StateShape, Trajectory};

pub const DEFAULT_FP_TOL: f64 = 1e-12;
pub const DEFAULT_FP_MAX_ITER: usize = 200;
pub const DEFAULT_STEP_POWER: f64 = 0.6;

/// Decreasing step sizes `γₙ = γ₀ / (n+1)^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub gamma0: f64,
    pub power: f64,
}

impl StepSchedule {
    pub fn new(gamma0: f64, power: f64) -> Result<Self> {
        let s = StepSchedule { gamma0, power };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::invalid("gamma0", "must be positive"));
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::invalid("power", "must be non-negative"));
        }
        Ok(())
    }

    /// Step size used by the `n`-th update (counting from zero).
    pub fn gamma(&self, n: usize) -> f64 {
        self.gamma0 / ((n + 1) as f64).powf(self.power)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizerKind {
    Gda { gamma: f64 },
    Eg { gamma: f64 },
    Ogda { gamma: f64 },
    /// Two-variable form of OGDA in `(z, w)`.
    OgdaS { gamma: f64 },
    /// Lookahead with `k` inner GDA steps and interpolation weight `alpha`.
    LaGda { gamma: f64, k: usize, alpha: f64 },
    OgdaVarStep { schedule: StepSchedule },
    OgdaImplicit { gamma: f64, fp_tol: f64, fp_max_iter: usize },
}

pub const METHOD_IDS: [&str; 7] = [
    "gda",
    "eg",
    "ogda",
    "ogda-s",
    "la-gda",
    "ogda-varstep",
    "ogda-implicit",
];

impl OptimizerKind {
    pub fn implicit(gamma: f64) -> Self {
        OptimizerKind::OgdaImplicit {
            gamma,
            fp_tol: DEFAULT_FP_TOL,
            fp_max_iter: DEFAULT_FP_MAX_ITER,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            OptimizerKind::Gda { .. } => "gda",
            OptimizerKind::Eg { .. } => "eg",
            OptimizerKind::Ogda { .. } => "ogda",
            OptimizerKind::OgdaS { .. } => "ogda-s",
            OptimizerKind::LaGda { .. } => "la-gda",
            OptimizerKind::OgdaVarStep { .. } => "ogda-varstep",
            OptimizerKind::OgdaImplicit { .. } => "ogda-implicit",
        }
    }

    /// Step size of the first update.
    pub fn gamma(&self) -> f64 {
        match *self {
            OptimizerKind::Gda { gamma }
            | OptimizerKind::Eg { gamma }
            | OptimizerKind::Ogda { gamma }
            | OptimizerKind::OgdaS { gamma }
            | OptimizerKind::LaGda { gamma, .. }
            | OptimizerKind::OgdaImplicit { gamma, .. } => gamma,
            OptimizerKind::OgdaVarStep { schedule } => schedule.gamma0,
        }
    }

    pub fn shape(&self) -> StateShape {
        match self {
            OptimizerKind::Gda { .. } | OptimizerKind::Eg { .. } | OptimizerKind::LaGda { .. } => StateShape::Plain,
            OptimizerKind::Ogda { .. } | OptimizerKind::OgdaS { .. } | OptimizerKind::OgdaVarStep { .. } => {
                StateShape::Midpoint
            }
            OptimizerKind::OgdaImplicit { .. } => StateShape::Velocity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let OptimizerKind::OgdaVarStep { schedule } = self {
            return schedule.validate();
        }
        check_gamma(self.gamma())?;
        match *self {
            OptimizerKind::LaGda { k, alpha, .. } => check_lookahead(k, alpha),
            OptimizerKind::OgdaImplicit { fp_tol, fp_max_iter, .. } => {
                if !(fp_tol > 0.0) {
                    return Err(Error::invalid("fp_tol", "must be positive"));
                }
                if fp_max_iter == 0 {
                    return Err(Error::invalid("fp_max_iter", "must be at least 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Gradient queries consumed by one update. `None` for the implicit scheme,
/// whose cost depends on the solve and is recorded per step.
pub fn gradient_queries(kind: &OptimizerKind) -> Option<usize> {
    match *kind {
        OptimizerKind::Gda { .. } | OptimizerKind::Ogda { .. } | OptimizerKind::OgdaS { .. } => Some(1),
        OptimizerKind::OgdaVarStep { .. } => Some(1),
        OptimizerKind::Eg { .. } => Some(2),
        OptimizerKind::LaGda { k, .. } => Some(k),
        OptimizerKind::OgdaImplicit { .. } => None,
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("gamma", "must be positive"))
    }
}

fn check_lookahead(k: usize, alpha: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", "must lie in (0, 1]"));
    }
    Ok(())
}

fn check_point(op: &dyn Operator, z: &Vector) -> Result<()> {
    Error::check_dim(op.dim(), z.dim())?;
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("iterate"))
    }
}

fn finite(v: Vector, what: &'static str) -> Result<Vector> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn step_gda(op: &dyn Operator, z: &Vector, gamma: f64) -> Result<Vector> {
    check_gamma(gamma)?;
    check_point(op, z)?;
    finite(gda_raw(op, z, gamma), "gda iterate")
}

pub fn step_eg(op: &dyn Operator, z: &Vector, gamma: f64) -> Result<Vector> {
    check_gamma(gamma)?;
    check_point(op, z)?;
    finite(eg_raw(op, z, gamma), "eg iterate")
}

/// Returns `(z_{n+1}, V(z_n))`; feed the second component back as `v_prev`.
pub fn step_ogda(op: &dyn Operator, z: &Vector, v_prev: &Vector, gamma: f64) -> Result<(Vector, Vector)> {
    check_gamma(gamma)?;
    check_point(op, z)?;
    check_point(op, v_prev)?;
    let (z1, v) = ogda_raw(op, z, v_prev, gamma);
    Ok((finite(z1, "ogda iterate")?, v))
}

/// Initial `w₀ = −z₀ − 4γV(z₀)`, which makes the two-variable form reproduce
/// OGDA started with `z₁ = z₀`.
pub fn ogda_s_initial_w(op: &dyn Operator, z0: &Vector, gamma: f64) -> Result<Vector> {
    check_gamma(gamma)?;
    check_point(op, z0)?;
    let v = op.field(z0);
    Ok(Vector::lincomb(-1.0, z0, -4.0 * gamma, &v))
}

/// Returns `(z_{n+1}, w_{n+1})` with `z_{n+1} = ½(z_n − w_n) − 2γV(z_n)` and
/// `w_{n+1} = ½(w_n − z_n)`.
pub fn step_ogda_s(op: &dyn Operator, z: &Vector, w: &Vector, gamma: f64) -> Result<(Vector, Vector)> {
    check_gamma(gamma)?;
    check_point(op, z)?;
    check_point(op, w)?;
    let (z1, w1) = step_ogda_s_raw(op, z, w, gamma);
    Ok((finite(z1, "ogda-s iterate")?, finite(w1, "ogda-s memory")?))
}

pub fn step_la_gda(op: &dyn Operator, z: &Vector, gamma: f64, k: usize, alpha: f64) -> Result<Vector> {
    check_gamma(gamma)?;
    check_lookahead(k, alpha)?;
    check_point(op, z)?;
    finite(la_gda_raw(op, z, gamma, k, alpha), "lookahead iterate")
}

/// Result of one implicit step.
#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitStep {
    pub z: Vector,
    pub omega: Vector,
    /// `V(z)` at the returned point, reusable by the next step.
    pub field: Vector,
    /// Field and Jacobian evaluations spent by the solve.
    pub queries: u64,
    /// Max-norm residual of the reduced equation at the returned point.
    pub residual: f64,
}

/// One step of the implicit scheme
/// `z' = z + (γ/2)(ω' + ω)`, `ω' = −V(z') − ½(V(z') − V(z))`.
///
/// Returns `(z', ω')`. Fails with [`Error::NoConvergence`] if the solve
/// does not reach `fp_tol` within `fp_max_iter` iterations.
pub fn step_ogda_implicit(
    op: &dyn Operator,
    z: &Vector,
    omega: &Vector,
    gamma: f64,
    fp_tol: f64,
    fp_max_iter: usize,
) -> Result<(Vector, Vector)> {
    OptimizerKind::OgdaImplicit { gamma, fp_tol, fp_max_iter }.validate()?;
    check_point(op, z)?;
    check_point(op, omega)?;
    let v = op.field(z);
    let s = implicit_raw(op, z, omega, &v, gamma, fp_tol, fp_max_iter)?;
    Ok((s.z, s.omega))
}

/// Max-norm residual of both implicit equations for the pair of states
/// `(z, ω) → (z', ω')`.
pub fn implicit_residual(
    op: &dyn Operator,
    z: &Vector,
    omega: &Vector,
    z_next: &Vector,
    omega_next: &Vector,
    gamma: f64,
) -> f64 {
    let v0 = op.field(z);
    let v1 = op.field(z_next);
    let mut position = z_next - z;
    position.axpy(-0.5 * gamma, omega_next);
    position.axpy(-0.5 * gamma, omega);
    let mut velocity = omega_next.clone();
    velocity.axpy(1.5, &v1);
    velocity.axpy(-0.5, &v0);
    position.norm_inf().max(velocity.norm_inf())
}

fn gda_raw(op: &dyn Operator, z: &Vector, gamma: f64) -> Vector {
    Vector::lincomb(1.0, z, -gamma, &op.field(z))
}

fn eg_raw(op: &dyn Operator, z: &Vector, gamma: f64) -> Vector {
    let mid = gda_raw(op, z, gamma);
    Vector::lincomb(1.0, z, -gamma, &op.field(&mid))
}

fn ogda_raw(op: &dyn Operator, z: &Vector, v_prev: &Vector, gamma: f64) -> (Vector, Vector) {
    let v = op.field(z);
    let mut z1 = Vector::lincomb(1.0, z, -2.0 * gamma, &v);
    z1.axpy(gamma, v_prev);
    (z1, v)
}

/// The update is carried out with exactly the arithmetic of an explicit
/// Euler step of size `γ` on the two-variable system with `κ = 1/(2γ)`, so the
/// two agree to the last bit.
pub(crate) fn step_ogda_s_raw(op: &dyn Operator, z: &Vector, w: &Vector, gamma: f64) -> (Vector, Vector) {
    let kappa = 1.0 / (2.0 * gamma);
    let v = op.field(z);
    let dw = Vector::lincomb(-kappa, z, -kappa, w);
    let mut dz = dw.clone();
    dz.axpy(-2.0, &v);
    let mut z1 = z.clone();
    for (zi, d) in z1.as_mut_slice().iter_mut().zip(dz.iter()) {
        *zi += gamma * d;
    }
    let mut w1 = w.clone();
    for (wi, d) in w1.as_mut_slice().iter_mut().zip(dw.iter()) {
        *wi += gamma * d;
    }
    (z1, w1)
}

fn la_gda_raw(op: &dyn Operator, z: &Vector, gamma: f64, k: usize, alpha: f64) -> Vector {
    let mut inner = z.clone();
    for _ in 0..k {
        inner = gda_raw(op, &inner, gamma);
    }
    Vector::lincomb(1.0 - alpha, z, alpha, &inner)
}

/// Eliminating `ω'` leaves `F(x) = x − c + (3γ/4)V(x) = 0` with
/// `c = z + (γ/2)ω + (γ/4)V(z)`. Plain fixed-point iteration contracts when
/// `(3γ/4)L < 1`; Newton on `F` takes over when `γL ≥ 1` or the fixed-point
/// iteration stalls.
fn implicit_raw(
    op: &dyn Operator,
    z: &Vector,
    omega: &Vector,
    v: &Vector,
    gamma: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ImplicitStep> {
    let a = 0.75 * gamma;
    let mut c = Vector::lincomb(1.0, z, 0.5 * gamma, omega);
    c.axpy(0.25 * gamma, v);
    let finish = |x: Vector, vx: Vector, queries: u64, residual: f64| {
        let omega1 = Vector::lincomb(-1.5, &vx, 0.5, v);
        ImplicitStep { z: x, omega: omega1, field: vx, queries, residual }
    };
    let residual_at = |x: &Vector, vx: &Vector| {
        let mut r = x - &c;
        r.axpy(a, vx);
        r
    };

    let mut queries = 0u64;
    let mut best = f64::INFINITY;
    let prefer_newton = op.lipschitz().is_some_and(|l| gamma * l >= 1.0);
    if !prefer_newton {
        let mut x = z.clone();
        for _ in 0..max_iter {
            let vx = op.field(&x);
            queries += 1;
            let r = residual_at(&x, &vx).norm_inf();
            if r <= tol {
                return Ok(finish(x, vx, queries, r));
            }
            if !r.is_finite() {
                break;
            }
            best = best.min(r);
            x = Vector::lincomb(1.0, &c, -a, &vx);
        }
    }

    let mut x = z.clone();
    for _ in 0..max_iter {
        let vx = op.field(&x);
        queries += 1;
        let f = residual_at(&x, &vx);
        let r = f.norm_inf();
        if r <= tol {
            return Ok(finish(x, vx, queries, r));
        }
        if !r.is_finite() {
            break;
        }
        best = best.min(r);
        let mut jf = op.jacobian(&x).scaled(a);
        queries += 1;
        for i in 0..jf.rows() {
            jf[(i, i)] += 1.0;
        }
        let delta = match jf.solve(&f) {
            Ok(d) => d,
            Err(_) => break,
        };
        x.axpy(-1.0, &delta);
    }
    Err(Error::NoConvergence {
        what: "implicit optimistic step",
        iterations: max_iter,
        residual: best,
    })
}

/// Memory carried between updates.
#[derive(Clone, Debug, PartialEq)]
pub enum Memory {
    None,
    /// `V(z_{n−1})`.
    PrevField(Vector),
    /// The second variable of the two-variable form.
    W(Vector),
    /// Velocity estimate and the cached `V(z_n)`.
    Omega { omega: Vector, field: Vector },
}

/// Full state of a discrete method between updates.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub z: Vector,
    pub memory: Memory,
    pub step: usize,
    pub queries: u64,
    /// Elapsed step size `Σγ` over performed updates.
    pub time: f64,
}

impl OptimizerState {
    /// Starting state at `z0`. OGDA uses `z₁ = z₀`; the two-variable form
    /// uses the matching `w₀`; the implicit scheme starts with `ω₀ = 0`.
    /// Evaluations made here are not counted as queries.
    pub fn new(op: &dyn Operator, kind: &OptimizerKind, z0: &Vector) -> Result<Self> {
        kind.validate()?;
        check_point(op, z0)?;
        let memory = match *kind {
            OptimizerKind::Gda { .. } | OptimizerKind::Eg { .. } | OptimizerKind::LaGda { .. } => Memory::None,
            OptimizerKind::Ogda { .. } | OptimizerKind::OgdaVarStep { .. } => Memory::PrevField(op.field(z0)),
            OptimizerKind::OgdaS { gamma } => Memory::W(ogda_s_initial_w(op, z0, gamma)?),
            OptimizerKind::OgdaImplicit { .. } => Memory::Omega {
                omega: Vector::zeros(z0.dim()),
                field: op.field(z0),
            },
        };
        Ok(OptimizerState { z: z0.clone(), memory, step: 0, queries: 0, time: 0.0 })
    }

    /// Performs one update. Only the implicit solve can fail.
    pub fn advance(&mut self, op: &dyn Operator, kind: &OptimizerKind) -> Result<()> {
        let gamma = match *kind {
            OptimizerKind::OgdaVarStep { schedule } => schedule.gamma(self.step),
            _ => kind.gamma(),
        };
        let z = &self.z;
        let (z1, memory, spent) = match (*kind, &self.memory) {
            (OptimizerKind::Gda { .. }, _) => (gda_raw(op, z, gamma), Memory::None, 1),
            (OptimizerKind::Eg { .. }, _) => (eg_raw(op, z, gamma), Memory::None, 2),
            (OptimizerKind::LaGda { k, alpha, .. }, _) => (la_gda_raw(op, z, gamma, k, alpha), Memory::None, k as u64),
            (OptimizerKind::Ogda { .. } | OptimizerKind::OgdaVarStep { .. }, Memory::PrevField(vp)) => {
                let (z1, v) = ogda_raw(op, z, vp, gamma);
                (z1, Memory::PrevField(v), 1)
            }
            (OptimizerKind::OgdaS { .. }, Memory::W(w)) => {
                let (z1, w1) = step_ogda_s_raw(op, z, w, gamma);
                (z1, Memory::W(w1), 1)
            }
            (OptimizerKind::OgdaImplicit { fp_tol, fp_max_iter, .. }, Memory::Omega { omega, field }) => {
                let s = implicit_raw(op, z, omega, field, gamma, fp_tol, fp_max_iter)?;
                (s.z, Memory::Omega { omega: s.omega, field: s.field }, s.queries)
            }
            _ => return Err(Error::invalid("state", "memory does not match the method")),
        };
        self.z = z1;
        self.memory = memory;
        self.step += 1;
        self.queries += spent;
        self.time += gamma;
        Ok(())
    }

    /// Auxiliary vector exposed in records: `w` for the OGDA family (for
    /// OGDA itself `w = −z − 2γV(z_{n−1})` with the step just used), `ω` for
    /// the implicit scheme.
    fn aux(&self, kind: &OptimizerKind) -> Option<Vector> {
        match (&self.memory, kind) {
            (Memory::None, _) => None,
            (Memory::PrevField(vp), _) => {
                let gamma = match *kind {
                    OptimizerKind::OgdaVarStep { schedule } => schedule.gamma(self.step.saturating_sub(1)),
                    _ => kind.gamma(),
                };
                Some(Vector::lincomb(-1.0, &self.z, -2.0 * gamma, vp))
            }
            (Memory::W(w), _) => Some(w.clone()),
            (Memory::Omega { omega, .. }, _) => Some(omega.clone()),
        }
    }
}

/// Runs `steps` updates of `kind` from `z0` and records every iterate.
///
/// Records carry `‖z‖`, `‖z − z*‖`, `‖V(z)‖` and the values of each monitor
/// (which must fit the method's state layout). Non-finite or exploding
/// iterates flag the trajectory as diverged without stopping it. A failed
/// implicit solve ends the run early and is noted in `halted`.
pub fn run(
    op: &dyn Operator,
    kind: &OptimizerKind,
    z0: &Vector,
    steps: usize,
    monitors: &[LyapunovKind],
) -> Result<Trajectory> {
    if steps == 0 {
        return Err(Error::invalid("steps", "must be at least 1"));
    }
    for m in monitors {
        m.check_shape(kind.shape())?;
    }
    let mut state = OptimizerState::new(op, kind, z0)?;
    let solution = op.solution();
    let mut traj = Trajectory::new(kind.id().to_string(), op.label(), kind.shape());
    traj.push(discrete_record(op, kind, &state, &solution, monitors));
    for _ in 0..steps {
        if let Err(e) = state.advance(op, kind) {
            traj.halted = Some(e.to_string());
            if traj.diverged_at.is_none() {
                traj.diverged_at = Some(traj.records.len());
            }
            break;
        }
        let diverged = is_diverged(&state.z, None);
        traj.push(discrete_record(op, kind, &state, &solution, if diverged { &[] } else { monitors }));
    }
    Ok(traj)
}

fn discrete_record(
    op: &dyn Operator,
    kind: &OptimizerKind,
    state: &OptimizerState,
    solution: &Vector,
    monitors: &[LyapunovKind],
) -> Record {
    let z = &state.z;
    let aux = state.aux(kind);
    let mut metrics = BTreeMap::new();
    metrics.insert(names::Z_NORM.to_string(), z.norm());
    metrics.insert(names::DIST.to_string(), (z - solution).norm());
    let v = match &state.memory {
        Memory::Omega { field, .. } => field.clone(),
        _ => op.field(z),
    };
    metrics.insert(names::V_NORM.to_string(), v.norm());
    if let Some(a) = &aux {
        let n = match kind.shape() {
            StateShape::Midpoint => (z + a).norm(),
            _ => a.norm(),
        };
        metrics.insert(names::AUX_NORM.to_string(), n);
        let ps = PhaseState { z: z.clone(), aux: a.clone(), t: state.time };
        for m in monitors {
            metrics.insert(names::lyapunov(m.id()), m.eval_raw(op, &ps));
        }
    }
    Record {
        step: state.step,
        time: state.time,
        queries: state.queries,
        z: z.clone(),
        aux,
        metrics,
    }
}
