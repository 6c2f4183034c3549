//! CSV traces and JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::trajectory::{names, Trajectory};

/// Leading columns of every trace, before the monitor columns.
pub const CSV_BASE_HEADER: [&str; 6] = ["step", "time", "queries", "z_norm", "dist_to_solution", "v_norm"];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Renders one row per record. `monitors` are functional ids whose
/// `lyap_<id>` columns follow the fixed ones, in the given order.
pub fn trajectory_csv(traj: &Trajectory, monitors: &[&str]) -> String {
    let columns: Vec<String> = monitors.iter().map(|id| names::lyapunov(id)).collect();
    let mut out = CSV_BASE_HEADER.join(",");
    for c in &columns {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in &traj.records {
        let _ = write!(out, "{},{},{}", r.step, format_float(r.time), r.queries);
        for name in [names::Z_NORM, names::DIST, names::V_NORM] {
            out.push(',');
            out.push_str(&format_float(r.metric(name).unwrap_or(f64::NAN)));
        }
        for c in &columns {
            out.push(',');
            out.push_str(&format_float(r.metric(c).unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `dir/name` (or `name` if absolute), creating
/// parent directories.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| Error::Io { path: parent.to_path_buf(), source })?;
    }
    fs::write(&path, contents).map_err(|source| Error::Io { path: path.clone(), source })?;
    Ok(path)
}

/// End-of-run figures written next to each trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub method: String,
    pub problem: String,
    pub records: usize,
    pub final_time: f64,
    pub initial_dist: f64,
    pub final_dist: f64,
    pub final_v_norm: f64,
    pub diverged: bool,
    pub diverged_at: Option<usize>,
    pub queries: u64,
    pub halted: Option<String>,
}

impl RunSummary {
    pub fn of(traj: &Trajectory) -> Self {
        let last = traj.last();
        RunSummary {
            method: traj.method.clone(),
            problem: traj.problem.clone(),
            records: traj.len(),
            final_time: last.time,
            initial_dist: traj.first().metric(names::DIST).unwrap_or(f64::NAN),
            final_dist: last.metric(names::DIST).unwrap_or(f64::NAN),
            final_v_norm: last.metric(names::V_NORM).unwrap_or(f64::NAN),
            diverged: traj.diverged(),
            diverged_at: traj.diverged_at,
            queries: last.queries,
            halted: traj.halted.clone(),
        }
    }
}
