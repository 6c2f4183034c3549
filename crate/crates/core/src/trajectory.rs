use std::collections::BTreeMap;

use crate::linalg::Vector;

/// Divergence guard on the state norm.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// What the auxiliary half of a state means.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateShape {
    /// Only `z` is carried (GDA, EG, lookahead, the low-resolution ODE).
    Plain,
    /// `(z, ω)` with `ω` playing the role of the velocity `ż`.
    Velocity,
    /// `(z, w)` coordinates of the two-variable optimistic system.
    Midpoint,
}

/// One recorded point of a run.
#[derive(Clone, Debug)]
pub struct Record {
    pub step: usize,
    pub time: f64,
    pub queries: u64,
    pub z: Vector,
    pub aux: Option<Vector>,
    pub metrics: BTreeMap<String, f64>,
}

impl Record {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

/// Ordered records of a discrete run or an ODE integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub method: String,
    pub problem: String,
    pub shape: StateShape,
    pub records: Vec<Record>,
    /// Index of the first record that tripped the divergence guard.
    pub diverged_at: Option<usize>,
    /// Why a run stopped before its step budget, if it did.
    pub halted: Option<String>,
}

impl Trajectory {
    pub(crate) fn new(method: String, problem: String, shape: StateShape) -> Self {
        Trajectory {
            method,
            problem,
            shape,
            records: Vec::new(),
            diverged_at: None,
            halted: None,
        }
    }

    pub(crate) fn push(&mut self, record: Record) {
        if self.diverged_at.is_none() && is_diverged(&record.z, record.aux.as_ref()) {
            self.diverged_at = Some(self.records.len());
        }
        self.records.push(record);
    }

    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> &Record {
        &self.records[0]
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("trajectory has at least one record")
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    /// Values of a named metric; `NaN` where a record lacks it.
    pub fn metric(&self, name: &str) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.metric(name).unwrap_or(f64::NAN))
            .collect()
    }

    /// Names of all metrics, in sorted order.
    pub fn metric_names(&self) -> Vec<String> {
        self.records
            .first()
            .map(|r| r.metrics.keys().cloned().collect())
            .unwrap_or_default()
    }
}

pub(crate) fn is_diverged(z: &Vector, aux: Option<&Vector>) -> bool {
    let bad = |v: &Vector| !v.is_finite() || v.norm() > DIVERGENCE_NORM;
    bad(z) || aux.is_some_and(bad)
}

pub mod names {
    pub const Z_NORM: &str = "z_norm";
    pub const DIST: &str = "dist_to_solution";
    pub const V_NORM: &str = "v_norm";
    pub const AUX_NORM: &str = "aux_norm";

    pub fn lyapunov(kind: &str) -> String {
        format!("lyap_{kind}")
    }
}
