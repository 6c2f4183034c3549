//! Lyapunov functionals for the optimistic dynamics, and monitors that check
//! they actually decrease along computed trajectories.
//!
//! All functionals are written for a solution at the origin. For operators
//! with a shifted solution `z*` they are evaluated in the translated
//! coordinates `z − z*` (and `w + z*` for the two-variable system, whose
//! equilibrium is `w = −z*`).

use crate::discrete::{implicit_residual, step_ogda_s_raw};
use crate::error::{Error, Result};
use crate::hrde::{rhs_raw, HrdeKind, KappaSchedule, PhaseState};
use crate::linalg::Vector;
use crate::problem::Operator;
use crate::trajectory::{names, StateShape, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LyapunovKind {
    /// `‖βz+ω‖² + ‖ω‖² + 4β zᵀV + ‖V+ω‖² + ‖V‖²`
    OgdaL { beta: f64 },
    /// `½(‖βz+ω‖² + ‖ω‖² + 4β zᵀV)`
    OgdaL1 { beta: f64 },
    /// `½(‖V+ω‖² + ‖V‖²)`; `beta` only enters its time derivative.
    OgdaL2 { beta: f64 },
    /// `κ²‖z+w‖² + κ²‖z−w‖² + ‖κ(z+w)+V‖² + ‖V‖²`
    Ogda2L { kappa: f64 },
    /// `½(‖z+w‖² + ‖z−w‖²)`; `kappa` only enters its time derivative.
    Ogda2L3 { kappa: f64 },
    /// `½(‖κ(z+w)+V‖² + ‖V‖²)`
    Ogda2L4 { kappa: f64 },
    /// `‖z−w‖² + ‖z+w+2γV‖²` on discrete midpoint states.
    OgdaL5 { gamma: f64 },
    /// `‖βz+ω‖² + ‖ω‖² + 2β zᵀV` for the implicit scheme.
    OgdaIL1 { beta: f64 },
    /// `‖V+ω‖² + ‖V‖²` for the implicit scheme.
    OgdaIL2,
    /// `½(‖β(t)z + w‖² + ‖w − β(t)z‖²)` with `β = 2κ(t)`.
    OgdaG2L { schedule: KappaSchedule },
}

pub const LYAPUNOV_IDS: [&str; 10] = [
    "ogda_l", "ogda_l1", "ogda_l2", "ogda2_l", "ogda2_l3", "ogda2_l4", "ogda_l5", "ogda_i_l1",
    "ogda_i_l2", "ogda_g2_l",
];

impl LyapunovKind {
    pub fn id(&self) -> &'static str {
        match self {
            LyapunovKind::OgdaL { .. } => "ogda_l",
            LyapunovKind::OgdaL1 { .. } => "ogda_l1",
            LyapunovKind::OgdaL2 { .. } => "ogda_l2",
            LyapunovKind::Ogda2L { .. } => "ogda2_l",
            LyapunovKind::Ogda2L3 { .. } => "ogda2_l3",
            LyapunovKind::Ogda2L4 { .. } => "ogda2_l4",
            LyapunovKind::OgdaL5 { .. } => "ogda_l5",
            LyapunovKind::OgdaIL1 { .. } => "ogda_i_l1",
            LyapunovKind::OgdaIL2 => "ogda_i_l2",
            LyapunovKind::OgdaG2L { .. } => "ogda_g2_l",
        }
    }

    /// Builds a functional from its identifier, taking parameters from the
    /// step size (`β = 2/γ`, `κ = 1/γ`) or the supplied schedule.
    pub fn from_id(id: &str, gamma: f64, schedule: Option<KappaSchedule>) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        let (beta, kappa) = (2.0 / gamma, 1.0 / gamma);
        Ok(match id {
            "ogda_l" => LyapunovKind::OgdaL { beta },
            "ogda_l1" => LyapunovKind::OgdaL1 { beta },
            "ogda_l2" => LyapunovKind::OgdaL2 { beta },
            "ogda2_l" => LyapunovKind::Ogda2L { kappa },
            "ogda2_l3" => LyapunovKind::Ogda2L3 { kappa },
            "ogda2_l4" => LyapunovKind::Ogda2L4 { kappa },
            "ogda_l5" => LyapunovKind::OgdaL5 { gamma },
            "ogda_i_l1" => LyapunovKind::OgdaIL1 { beta },
            "ogda_i_l2" => LyapunovKind::OgdaIL2,
            "ogda_g2_l" => LyapunovKind::OgdaG2L {
                schedule: schedule.unwrap_or(KappaSchedule::Constant(kappa)),
            },
            other => return Err(Error::invalid("lyapunov id", format!("unknown functional `{other}`"))),
        })
    }

    /// Builds a functional matched to the parameters of an ODE model.
    pub fn for_hrde(id: &str, kind: &HrdeKind) -> Result<Self> {
        let gamma = match *kind {
            HrdeKind::Gda { beta }
            | HrdeKind::Eg { beta }
            | HrdeKind::Ogda { beta }
            | HrdeKind::La2 { beta, .. }
            | HrdeKind::La3 { beta, .. } => 2.0 / beta,
            HrdeKind::Ogda2 { kappa } => 1.0 / kappa,
            HrdeKind::Ogda2VarStep { schedule } => 1.0 / schedule.value(0.0),
            HrdeKind::GdaOde => 1.0,
        };
        let sched = match *kind {
            HrdeKind::Ogda2VarStep { schedule } => Some(schedule),
            _ => None,
        };
        let k = Self::from_id(id, gamma, sched)?;
        k.check_shape(kind.shape())?;
        Ok(k)
    }

    /// Which state layout the functional expects.
    pub fn shape(&self) -> StateShape {
        match self {
            LyapunovKind::OgdaL { .. }
            | LyapunovKind::OgdaL1 { .. }
            | LyapunovKind::OgdaL2 { .. }
            | LyapunovKind::OgdaIL1 { .. }
            | LyapunovKind::OgdaIL2 => StateShape::Velocity,
            _ => StateShape::Midpoint,
        }
    }

    pub(crate) fn check_shape(&self, shape: StateShape) -> Result<()> {
        if self.shape() == shape {
            Ok(())
        } else {
            Err(Error::invalid(
                "lyapunov",
                format!("`{}` needs {:?} states but the run produces {:?}", self.id(), self.shape(), shape),
            ))
        }
    }

    /// Value of the functional at `state`.
    pub fn eval(&self, op: &dyn Operator, state: &PhaseState) -> Result<f64> {
        Error::check_dim(op.dim(), state.z.dim())?;
        Error::check_dim(op.dim(), state.aux.dim())?;
        Ok(self.eval_raw(op, state))
    }

    pub(crate) fn eval_raw(&self, op: &dyn Operator, state: &PhaseState) -> f64 {
        let v = op.field(&state.z);
        let (z, aux) = centered(op, self.shape(), state);
        match *self {
            LyapunovKind::OgdaL { beta } => {
                Vector::lincomb(beta, &z, 1.0, &aux).norm_sq()
                    + aux.norm_sq()
                    + 4.0 * beta * z.dot(&v)
                    + (&v + &aux).norm_sq()
                    + v.norm_sq()
            }
            LyapunovKind::OgdaL1 { beta } => {
                0.5 * (Vector::lincomb(beta, &z, 1.0, &aux).norm_sq() + aux.norm_sq() + 4.0 * beta * z.dot(&v))
            }
            LyapunovKind::OgdaL2 { .. } => 0.5 * ((&v + &aux).norm_sq() + v.norm_sq()),
            LyapunovKind::Ogda2L { kappa } => {
                let k2 = kappa * kappa;
                let mut u = Vector::lincomb(kappa, &z, kappa, &aux);
                u.axpy(1.0, &v);
                k2 * (&z + &aux).norm_sq() + k2 * (&z - &aux).norm_sq() + u.norm_sq() + v.norm_sq()
            }
            LyapunovKind::Ogda2L3 { .. } => 0.5 * ((&z + &aux).norm_sq() + (&z - &aux).norm_sq()),
            LyapunovKind::Ogda2L4 { kappa } => {
                let mut u = Vector::lincomb(kappa, &z, kappa, &aux);
                u.axpy(1.0, &v);
                0.5 * (u.norm_sq() + v.norm_sq())
            }
            LyapunovKind::OgdaL5 { gamma } => {
                let mut s = &z + &aux;
                s.axpy(2.0 * gamma, &v);
                (&z - &aux).norm_sq() + s.norm_sq()
            }
            LyapunovKind::OgdaIL1 { beta } => {
                Vector::lincomb(beta, &z, 1.0, &aux).norm_sq() + aux.norm_sq() + 2.0 * beta * z.dot(&v)
            }
            LyapunovKind::OgdaIL2 => (&v + &aux).norm_sq() + v.norm_sq(),
            LyapunovKind::OgdaG2L { schedule } => {
                let beta = schedule.beta(state.t);
                let plus = Vector::lincomb(beta, &z, 1.0, &aux);
                let minus = Vector::lincomb(1.0, &aux, -beta, &z);
                0.5 * (plus.norm_sq() + minus.norm_sq())
            }
        }
    }
}

fn centered(op: &dyn Operator, shape: StateShape, s: &PhaseState) -> (Vector, Vector) {
    let sol = op.solution();
    let z = &s.z - &sol;
    let aux = match shape {
        StateShape::Midpoint => &s.aux + &sol,
        _ => s.aux.clone(),
    };
    (z, aux)
}

/// Closed-form time derivative along the matching model.
///
/// * `L̇1 = −β‖ω‖² − β² zᵀV − 4 ωᵀJω`
/// * `L̇2 = −β‖V+ω‖² − ωᵀJω`
/// * `L̇3 = −2κ‖z+w‖² − 4⟨z, V⟩`
/// * `L̇4 = −2κ‖κ(z+w)+V‖² − ⟨ż, Jż⟩`
///
/// `L1`, `L2` follow the second-order optimistic model and `L3`, `L4` the
/// two-variable system with the same parameter.
pub fn analytic_decrease_rate(kind: &LyapunovKind, op: &dyn Operator, state: &PhaseState) -> Result<f64> {
    Error::check_dim(op.dim(), state.z.dim())?;
    Error::check_dim(op.dim(), state.aux.dim())?;
    let v = op.field(&state.z);
    let (z, aux) = centered(op, kind.shape(), state);
    let jac = op.jacobian(&state.z);
    match *kind {
        LyapunovKind::OgdaL1 { beta } => {
            let jw = jac.mul_vec(&aux);
            Ok(-beta * aux.norm_sq() - beta * beta * z.dot(&v) - 4.0 * aux.dot(&jw))
        }
        LyapunovKind::OgdaL2 { beta } => {
            let jw = jac.mul_vec(&aux);
            Ok(-beta * (&v + &aux).norm_sq() - aux.dot(&jw))
        }
        LyapunovKind::Ogda2L3 { kappa } => Ok(-2.0 * kappa * (&z + &aux).norm_sq() - 4.0 * z.dot(&v)),
        LyapunovKind::Ogda2L4 { kappa } => {
            let mut u = Vector::lincomb(kappa, &z, kappa, &aux);
            u.axpy(1.0, &v);
            let zdot = Vector::lincomb(-1.0, &u, -1.0, &v);
            Ok(-2.0 * kappa * u.norm_sq() - zdot.dot(&jac.mul_vec(&zdot)))
        }
        other => Err(Error::invalid(
            "lyapunov",
            format!("no closed-form rate for `{}`", other.id()),
        )),
    }
}

/// The model a functional's closed-form rate refers to.
pub fn companion_model(kind: &LyapunovKind) -> Option<HrdeKind> {
    match *kind {
        LyapunovKind::OgdaL { beta } | LyapunovKind::OgdaL1 { beta } | LyapunovKind::OgdaL2 { beta } => {
            Some(HrdeKind::Ogda { beta })
        }
        LyapunovKind::Ogda2L { kappa } | LyapunovKind::Ogda2L3 { kappa } | LyapunovKind::Ogda2L4 { kappa } => {
            Some(HrdeKind::Ogda2 { kappa })
        }
        LyapunovKind::OgdaG2L { schedule } => Some(HrdeKind::Ogda2VarStep { schedule }),
        _ => None,
    }
}

/// Chain-rule derivative `d/dt L(s(t))` by a central difference along the
/// flow of `model`. Used to validate the closed forms.
pub fn flow_derivative(kind: &LyapunovKind, model: &HrdeKind, op: &dyn Operator, state: &PhaseState, h: f64) -> f64 {
    let (dz, da) = rhs_raw(model, op, &state.z, &state.aux, state.t);
    let at = |c: f64| PhaseState {
        z: Vector::lincomb(1.0, &state.z, c, &dz),
        aux: Vector::lincomb(1.0, &state.aux, c, &da),
        t: state.t + c,
    };
    (kind.eval_raw(op, &at(h)) - kind.eval_raw(op, &at(-h))) / (2.0 * h)
}

/// Slack allowed when checking monotone decrease of sampled values:
/// an increase `L[i+1] − L[i]` up to `abs + rel·|L[i]|` is tolerated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecreaseTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for DecreaseTolerance {
    fn default() -> Self {
        DecreaseTolerance { abs: 1e-7, rel: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecreaseReport {
    pub kind: &'static str,
    /// Indices `i` (into the trajectory records) where `L[i] − L[i−1]`
    /// exceeded the slack.
    pub violations: Vec<usize>,
    /// Largest observed one-step increase (negative when strictly
    /// decreasing throughout).
    pub max_increase: f64,
    pub samples: usize,
}

impl DecreaseReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the values of `kind` recorded along `traj` never increase
/// beyond `tol`. Values are recomputed when the trajectory did not record
/// them.
pub fn continuous_decrease_check(
    kind: &LyapunovKind,
    op: &dyn Operator,
    traj: &Trajectory,
    tol: DecreaseTolerance,
) -> Result<DecreaseReport> {
    kind.check_shape(traj.shape)?;
    let values = lyapunov_values(kind, op, traj);
    Ok(decrease_report(kind.id(), &values, tol))
}

pub(crate) fn lyapunov_values(kind: &LyapunovKind, op: &dyn Operator, traj: &Trajectory) -> Vec<f64> {
    let col = names::lyapunov(kind.id());
    traj.records
        .iter()
        .map(|r| match r.metric(&col) {
            Some(v) => v,
            None => kind.eval_raw(
                op,
                &PhaseState {
                    z: r.z.clone(),
                    aux: r.aux.clone().unwrap_or_else(|| Vector::zeros(r.z.dim())),
                    t: r.time,
                },
            ),
        })
        .collect()
}

pub(crate) fn decrease_report(kind: &'static str, values: &[f64], tol: DecreaseTolerance) -> DecreaseReport {
    let mut violations = Vec::new();
    let mut max_increase = f64::NEG_INFINITY;
    for i in 1..values.len() {
        let inc = values[i] - values[i - 1];
        max_increase = max_increase.max(inc);
        if !(inc <= tol.abs + tol.rel * values[i - 1].abs()) {
            violations.push(i);
        }
    }
    DecreaseReport {
        kind,
        violations,
        max_increase: if values.len() > 1 { max_increase } else { 0.0 },
        samples: values.len(),
    }
}

/// One OGDA-S step from `(z_n, w_n)` and the resulting change in `L5`,
/// with the guaranteed bound `−2γ²‖V(z_{n−1})‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L5Step {
    pub delta: f64,
    pub bound: f64,
}

impl L5Step {
    pub fn holds(&self) -> bool {
        self.delta <= self.bound + 1e-12
    }
}

/// Evaluates `L5(z_{n+1}, w_{n+1}) − L5(z_n, w_n)` and its bound. Requires
/// a known Lipschitz constant and `γ ≤ 1/(16L)`.
pub fn discrete_l5_difference(
    op: &dyn Operator,
    z_n: &Vector,
    w_n: &Vector,
    z_prev_field: &Vector,
    gamma: f64,
) -> Result<L5Step> {
    let l = op
        .lipschitz()
        .ok_or_else(|| Error::invalid("lipschitz", "the L5 bound needs a Lipschitz constant"))?;
    if !(gamma > 0.0) || gamma * 16.0 * l > 1.0 + 1e-15 {
        return Err(Error::invalid("gamma", format!("needs 0 < gamma <= 1/(16L) = {}", 1.0 / (16.0 * l))));
    }
    for x in [z_n, w_n, z_prev_field] {
        Error::check_dim(op.dim(), x.dim())?;
    }
    let kind = LyapunovKind::OgdaL5 { gamma };
    let (z1, w1) = step_ogda_s_raw(op, z_n, w_n, gamma);
    let before = kind.eval_raw(op, &PhaseState { z: z_n.clone(), aux: w_n.clone(), t: 0.0 });
    let after = kind.eval_raw(op, &PhaseState { z: z1, aux: w1, t: 0.0 });
    Ok(L5Step {
        delta: after - before,
        bound: -2.0 * gamma * gamma * z_prev_field.norm_sq(),
    })
}

/// Changes of the two implicit-scheme functionals across one step. The
/// states must satisfy the implicit equations to within `1e-9`.
pub fn discrete_ogda_i_decrease(
    op: &dyn Operator,
    before: (&Vector, &Vector),
    after: (&Vector, &Vector),
    gamma: f64,
) -> Result<(f64, f64)> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    for x in [before.0, before.1, after.0, after.1] {
        Error::check_dim(op.dim(), x.dim())?;
    }
    let resid = implicit_residual(op, before.0, before.1, after.0, after.1, gamma);
    if !(resid <= 1e-9) {
        return Err(Error::invalid(
            "states",
            format!("not consecutive implicit states (residual {resid:e})"),
        ));
    }
    let beta = 2.0 / gamma;
    let l1 = LyapunovKind::OgdaIL1 { beta };
    let l2 = LyapunovKind::OgdaIL2;
    let s0 = PhaseState { z: before.0.clone(), aux: before.1.clone(), t: 0.0 };
    let s1 = PhaseState { z: after.0.clone(), aux: after.1.clone(), t: 0.0 };
    Ok((
        l1.eval_raw(op, &s1) - l1.eval_raw(op, &s0),
        l2.eval_raw(op, &s1) - l2.eval_raw(op, &s0),
    ))
}

/// Number of grid points used by [`varstep_precondition`].
pub const PRECONDITION_SAMPLES: usize = 1001;

/// Checks `β(t)β̇(t) < 2μ` on an evenly spaced grid over `t_range`.
pub fn varstep_precondition(
    beta: impl Fn(f64) -> f64,
    beta_dot: impl Fn(f64) -> f64,
    mu: f64,
    t_range: (f64, f64),
) -> bool {
    precondition_with(beta, beta_dot, 2.0 * mu, t_range)
}

/// The weaker `β(t)β̇(t) < 4μ` threshold.
pub fn varstep_precondition_statement(
    beta: impl Fn(f64) -> f64,
    beta_dot: impl Fn(f64) -> f64,
    mu: f64,
    t_range: (f64, f64),
) -> bool {
    precondition_with(beta, beta_dot, 4.0 * mu, t_range)
}

/// [`varstep_precondition`] for a `κ` schedule (`β = 2κ`).
pub fn schedule_precondition(schedule: &KappaSchedule, mu: f64, t_range: (f64, f64)) -> bool {
    varstep_precondition(|t| schedule.beta(t), |t| schedule.beta_dot(t), mu, t_range)
}

fn precondition_with(beta: impl Fn(f64) -> f64, beta_dot: impl Fn(f64) -> f64, threshold: f64, (t0, t1): (f64, f64)) -> bool {
    let n = PRECONDITION_SAMPLES;
    (0..n).all(|i| {
        let t = t0 + (t1 - t0) * i as f64 / (n - 1) as f64;
        beta(t) * beta_dot(t) < threshold
    })
}
