//! JSON experiment descriptions.
//!
//! Parsing happens in two passes. The document is first deserialized into
//! permissive raw structs (unknown keys rejected, every field optional), so
//! that type errors carry the key path. The raw sections are then validated
//! in a fixed order: mode and budget, problem, method, monitors, stability.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::catalog::{ProblemSpec, PROBLEM_IDS};
use crate::discrete::{OptimizerKind, StepSchedule, DEFAULT_FP_MAX_ITER, DEFAULT_FP_TOL, DEFAULT_STEP_POWER, METHOD_IDS};
use crate::error::{Error, Result};
use crate::hrde::{default_dt, HrdeKind, IntegratorConfig, KappaSchedule, Scheme, HRDE_IDS};
use crate::linalg::{DenseMatrix, Vector};
use crate::lyapunov::{LyapunovKind, LYAPUNOV_IDS};
use crate::problem::DEFAULT_SIGMA_MIN;
use crate::stability::StabilityMethod;

pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_LOOKAHEAD_K: usize = 2;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Option<RawProblem>,
    method: Option<RawMethod>,
    mode: Option<String>,
    budget: Option<RawBudget>,
    lyapunov: Option<Vec<String>>,
    outputs: Option<Outputs>,
    z0: Option<Vec<f64>>,
    aux0: Option<Vec<f64>>,
    stability: Option<RawStability>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    id: String,
    params: Option<Value>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMethod {
    id: String,
    gamma: Option<f64>,
    alpha: Option<f64>,
    k: Option<usize>,
    schedule: Option<Value>,
    fp_tol: Option<f64>,
    fp_max_iter: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    steps: Option<usize>,
    t_end: Option<f64>,
    dt: Option<f64>,
    scheme: Option<String>,
    record_every: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStability {
    gammas: Option<Vec<f64>>,
    alpha: Option<f64>,
    methods: Option<Vec<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BilinearParams {
    a: Option<Vec<Vec<f64>>>,
    b: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RandomParams {
    d1: Option<usize>,
    d2: Option<usize>,
    sigma_min: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct QuarticParams {}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct IdentityParams {
    mu: Option<f64>,
    dim: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStepSchedule {
    gamma0: Option<f64>,
    power: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKappaSchedule {
    kappa0: f64,
    rate: Option<f64>,
    exponent: Option<f64>,
}

/// Output file names; relative paths are resolved against the output
/// directory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<String>,
    pub json: Option<String>,
    pub svg: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Discrete,
    Hrde,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodSpec {
    Discrete(OptimizerKind),
    /// A continuous model together with the step size it was derived from.
    Hrde { kind: HrdeKind, gamma: f64 },
}

impl MethodSpec {
    pub fn id(&self) -> &'static str {
        match self {
            MethodSpec::Discrete(k) => k.id(),
            MethodSpec::Hrde { kind, .. } => kind.id(),
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            MethodSpec::Discrete(_) => Mode::Discrete,
            MethodSpec::Hrde { .. } => Mode::Hrde,
        }
    }

    /// Resolves a functional id with this method's parameters.
    pub fn lyapunov(&self, id: &str) -> Result<LyapunovKind> {
        match self {
            MethodSpec::Discrete(k) => {
                let kind = LyapunovKind::from_id(id, k.gamma(), None)?;
                if kind.shape() != k.shape() {
                    return Err(Error::invalid(
                        "lyapunov",
                        format!("`{id}` does not apply to states of `{}`", k.id()),
                    ));
                }
                Ok(kind)
            }
            MethodSpec::Hrde { kind, .. } => LyapunovKind::for_hrde(id, kind),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Budget {
    Steps(usize),
    Time(IntegratorConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySpec {
    pub gammas: Vec<f64>,
    pub alpha: f64,
    pub methods: Vec<StabilityMethod>,
}

impl Default for StabilitySpec {
    fn default() -> Self {
        StabilitySpec {
            gammas: vec![0.01, 0.1, 1.0, 10.0],
            alpha: DEFAULT_ALPHA,
            methods: StabilityMethod::ALL.to_vec(),
        }
    }
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub seed: u64,
    pub method: Option<MethodSpec>,
    pub budget: Option<Budget>,
    pub lyapunov: Vec<String>,
    pub outputs: Outputs,
    pub z0: Option<Vector>,
    pub aux0: Option<Vector>,
    pub stability: StabilitySpec,
}

impl ExperimentConfig {
    /// Replaces the problem seed. Only the random bilinear family reads it.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        if let ProblemSpec::BilinearRandom { seed: s, .. } = &mut self.problem {
            *s = seed;
        }
    }

    /// Method and budget, which every run-like command needs.
    pub fn run_plan(&self) -> Result<(MethodSpec, Budget)> {
        let method = self.method.ok_or_else(|| Error::config("method", "required for this command"))?;
        let budget = self.budget.ok_or_else(|| Error::config("budget", "required for this command"))?;
        Ok((method, budget))
    }

    /// Resolved monitor functionals for the configured method.
    pub fn monitors(&self) -> Result<Vec<LyapunovKind>> {
        let Some(method) = self.method else {
            return Ok(Vec::new());
        };
        self.lyapunov
            .iter()
            .enumerate()
            .map(|(i, id)| method.lyapunov(id).map_err(|e| Error::config(format!("lyapunov[{i}]"), e.to_string())))
            .collect()
    }
}

fn typed<T: DeserializeOwned>(value: Value, prefix: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        Error::config(if path.is_empty() { ".".to_string() } else { path }, e.into_inner().to_string())
    })
}

fn positive(path: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::config(path, format!("must be positive, got {x}")))
    }
}

fn vector(path: &str, data: Vec<f64>) -> Result<Vector> {
    Vector::new(data).map_err(|e| Error::config(path, e.to_string()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::config(".", format!("invalid JSON: {e}")))?;
    parse_config_value(value)
}

pub fn parse_config_value(value: Value) -> Result<ExperimentConfig> {
    if !value.is_object() {
        return Err(Error::config(".", "expected a JSON object"));
    }
    let raw: RawConfig = typed(value, "")?;

    let mode = match raw.mode.as_deref() {
        None => None,
        Some("discrete") => Some(Mode::Discrete),
        Some("hrde") => Some(Mode::Hrde),
        Some(other) => return Err(Error::config("mode", format!("expected `discrete` or `hrde`, got `{other}`"))),
    };
    let mode = mode.or_else(|| {
        raw.method.as_ref().map(|m| if HRDE_IDS.contains(&m.id.as_str()) { Mode::Hrde } else { Mode::Discrete })
    });
    let budget_raw = raw.budget;
    if let (Some(Mode::Hrde), Some(b)) = (mode, budget_raw.as_ref()) {
        if b.steps.is_some() {
            return Err(Error::config("budget.steps", "hrde mode requires t_end/dt, not steps"));
        }
        if b.t_end.is_none() {
            return Err(Error::config("budget.t_end", "hrde mode requires t_end/dt"));
        }
    }
    if let (Some(Mode::Discrete), Some(b)) = (mode, budget_raw.as_ref()) {
        if b.t_end.is_some() || b.dt.is_some() || b.scheme.is_some() || b.record_every.is_some() {
            return Err(Error::config("budget", "discrete mode takes only `steps`"));
        }
        if b.steps.is_none() {
            return Err(Error::config("budget.steps", "discrete mode requires steps"));
        }
    }

    let seed = raw.problem.as_ref().and_then(|p| p.seed).unwrap_or(0);
    let problem = match raw.problem {
        None => ProblemSpec::unit_bilinear(),
        Some(p) => parse_problem(p, seed)?,
    };

    let method = match raw.method {
        None => None,
        Some(m) => Some(parse_method(m, mode.unwrap_or(Mode::Discrete))?),
    };

    let budget = match (budget_raw, method) {
        (None, _) => None,
        (Some(b), m) => Some(parse_budget(b, mode.unwrap_or(Mode::Discrete), m)?),
    };

    let stability = match raw.stability {
        None => StabilitySpec::default(),
        Some(s) => parse_stability(s)?,
    };

    let cfg = ExperimentConfig {
        problem,
        seed,
        method,
        budget,
        lyapunov: raw.lyapunov.unwrap_or_default(),
        outputs: raw.outputs.unwrap_or_default(),
        z0: raw.z0.map(|z| vector("z0", z)).transpose()?,
        aux0: raw.aux0.map(|a| vector("aux0", a)).transpose()?,
        stability,
    };
    for (i, id) in cfg.lyapunov.iter().enumerate() {
        if !LYAPUNOV_IDS.contains(&id.as_str()) {
            return Err(Error::config(format!("lyapunov[{i}]"), format!("unknown functional `{id}`")));
        }
    }
    cfg.monitors()?;
    if let (Some(z0), Some(aux0)) = (&cfg.z0, &cfg.aux0) {
        if z0.dim() != aux0.dim() {
            return Err(Error::config("aux0", "must have the dimension of z0"));
        }
    }
    Ok(cfg)
}

fn parse_problem(p: RawProblem, seed: u64) -> Result<ProblemSpec> {
    let params = p.params.unwrap_or(Value::Object(Default::default()));
    let path = "problem.params";
    let spec = match p.id.as_str() {
        "bilinear" => {
            let q: BilinearParams = typed(params, path)?;
            let a = match q.a {
                None => DenseMatrix::identity(1),
                Some(rows) => DenseMatrix::from_rows(&rows).map_err(|e| Error::config("problem.params.a", e.to_string()))?,
            };
            if a.rows() == 0 || a.cols() == 0 {
                return Err(Error::config("problem.params.a", "must be non-empty"));
            }
            let b = q.b.map(|b| vector("problem.params.b", b)).transpose()?;
            let c = q.c.map(|c| vector("problem.params.c", c)).transpose()?;
            ProblemSpec::Bilinear { a, b, c }
        }
        "bilinear-random" => {
            let q: RandomParams = typed(params, path)?;
            let d1 = q.d1.unwrap_or(1);
            let d2 = q.d2.unwrap_or(1);
            if d1 == 0 || d2 == 0 {
                return Err(Error::config("problem.params", "d1 and d2 must be at least 1"));
            }
            let sigma_min = positive("problem.params.sigma_min", q.sigma_min.unwrap_or(DEFAULT_SIGMA_MIN))?;
            ProblemSpec::BilinearRandom { seed, d1, d2, sigma_min }
        }
        "quartic" => {
            let _: QuarticParams = typed(params, path)?;
            ProblemSpec::Quartic
        }
        "scaled-identity" => {
            let q: IdentityParams = typed(params, path)?;
            let mu = positive("problem.params.mu", q.mu.unwrap_or(1.0))?;
            let dim = q.dim.unwrap_or(2);
            if dim == 0 {
                return Err(Error::config("problem.params.dim", "must be at least 1"));
            }
            ProblemSpec::ScaledIdentity { mu, dim }
        }
        other => {
            return Err(Error::config(
                "problem.id",
                format!("unknown problem `{other}` (expected one of {})", PROBLEM_IDS.join(", ")),
            ))
        }
    };
    spec.bilinear_game().map_err(|e| Error::config("problem.params", e.to_string()))?;
    Ok(spec)
}

fn reject_unused(m: &RawMethod, allowed: &[&str]) -> Result<()> {
    let present = [
        ("gamma", m.gamma.is_some()),
        ("alpha", m.alpha.is_some()),
        ("k", m.k.is_some()),
        ("schedule", m.schedule.is_some()),
        ("fp_tol", m.fp_tol.is_some()),
        ("fp_max_iter", m.fp_max_iter.is_some()),
    ];
    for (name, set) in present {
        if set && !allowed.contains(&name) {
            return Err(Error::config(format!("method.{name}"), format!("does not apply to `{}`", m.id)));
        }
    }
    Ok(())
}

fn alpha_of(m: &RawMethod) -> Result<f64> {
    let a = m.alpha.unwrap_or(DEFAULT_ALPHA);
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(Error::config("method.alpha", format!("must lie in (0, 1], got {a}")))
    }
}

fn parse_method(m: RawMethod, mode: Mode) -> Result<MethodSpec> {
    let id = m.id.as_str();
    let is_hrde = HRDE_IDS.contains(&id);
    let is_discrete = METHOD_IDS.contains(&id);
    match (mode, is_hrde, is_discrete) {
        (Mode::Hrde, false, _) | (Mode::Discrete, _, false) => {
            let (kind, known) = match mode {
                Mode::Hrde => ("hrde", HRDE_IDS.join(", ")),
                Mode::Discrete => ("discrete", METHOD_IDS.join(", ")),
            };
            return Err(Error::config("method.id", format!("`{id}` is not a {kind} method (expected one of {known})")));
        }
        _ => {}
    }
    let gamma = |m: &RawMethod| -> Result<f64> {
        let g = m.gamma.ok_or_else(|| Error::config("method.gamma", "required"))?;
        positive("method.gamma", g)
    };

    if mode == Mode::Hrde {
        let (alpha, schedule) = match id {
            "la2-gda-hrde" | "la3-gda-hrde" => {
                reject_unused(&m, &["gamma", "alpha"])?;
                (alpha_of(&m)?, None)
            }
            "ogda-hrde2-varstep" => {
                reject_unused(&m, &["gamma", "schedule"])?;
                let s = match m.schedule.clone() {
                    None => None,
                    Some(v) => {
                        let r: RawKappaSchedule = typed(v, "method.schedule")?;
                        let s = KappaSchedule::PowerLaw {
                            kappa0: r.kappa0,
                            rate: r.rate.unwrap_or(1.0),
                            exponent: r.exponent.unwrap_or(0.0),
                        };
                        s.validate().map_err(|e| Error::config("method.schedule", e.to_string()))?;
                        Some(s)
                    }
                };
                (DEFAULT_ALPHA, s)
            }
            _ => {
                reject_unused(&m, &["gamma"])?;
                (DEFAULT_ALPHA, None)
            }
        };
        let g = match (id, m.gamma, schedule) {
            ("gda-ode", None, _) => 1.0,
            ("ogda-hrde2-varstep", None, Some(s)) => 1.0 / s.value(0.0),
            _ => gamma(&m)?,
        };
        let kind = HrdeKind::from_id(id, g, alpha, schedule).map_err(|e| Error::config("method", e.to_string()))?;
        return Ok(MethodSpec::Hrde { kind, gamma: g });
    }

    let kind = match id {
        "gda" | "eg" | "ogda" | "ogda-s" => {
            reject_unused(&m, &["gamma"])?;
            let gamma = gamma(&m)?;
            match id {
                "gda" => OptimizerKind::Gda { gamma },
                "eg" => OptimizerKind::Eg { gamma },
                "ogda" => OptimizerKind::Ogda { gamma },
                _ => OptimizerKind::OgdaS { gamma },
            }
        }
        "la-gda" => {
            reject_unused(&m, &["gamma", "alpha", "k"])?;
            let k = m.k.unwrap_or(DEFAULT_LOOKAHEAD_K);
            if k == 0 {
                return Err(Error::config("method.k", "must be at least 1"));
            }
            OptimizerKind::LaGda { gamma: gamma(&m)?, k, alpha: alpha_of(&m)? }
        }
        "ogda-varstep" => {
            reject_unused(&m, &["gamma", "schedule"])?;
            let (g0, p) = match m.schedule.clone() {
                None => (gamma(&m)?, DEFAULT_STEP_POWER),
                Some(v) => {
                    let r: RawStepSchedule = typed(v, "method.schedule")?;
                    let g0 = match (r.gamma0, m.gamma) {
                        (Some(g), _) => positive("method.schedule.gamma0", g)?,
                        (None, Some(_)) => gamma(&m)?,
                        (None, None) => return Err(Error::config("method.schedule.gamma0", "required")),
                    };
                    (g0, r.power.unwrap_or(DEFAULT_STEP_POWER))
                }
            };
            let schedule = StepSchedule::new(g0, p).map_err(|e| Error::config("method.schedule", e.to_string()))?;
            OptimizerKind::OgdaVarStep { schedule }
        }
        "ogda-implicit" => {
            reject_unused(&m, &["gamma", "fp_tol", "fp_max_iter"])?;
            let fp_tol = positive("method.fp_tol", m.fp_tol.unwrap_or(DEFAULT_FP_TOL))?;
            let fp_max_iter = m.fp_max_iter.unwrap_or(DEFAULT_FP_MAX_ITER);
            if fp_max_iter == 0 {
                return Err(Error::config("method.fp_max_iter", "must be at least 1"));
            }
            OptimizerKind::OgdaImplicit { gamma: gamma(&m)?, fp_tol, fp_max_iter }
        }
        _ => unreachable!("method ids were checked above"),
    };
    Ok(MethodSpec::Discrete(kind))
}

fn parse_budget(b: RawBudget, mode: Mode, method: Option<MethodSpec>) -> Result<Budget> {
    match mode {
        Mode::Discrete => {
            let steps = b.steps.ok_or_else(|| Error::config("budget.steps", "required"))?;
            if steps == 0 {
                return Err(Error::config("budget.steps", "must be at least 1"));
            }
            Ok(Budget::Steps(steps))
        }
        Mode::Hrde => {
            let t_end = positive("budget.t_end", b.t_end.ok_or_else(|| Error::config("budget.t_end", "required"))?)?;
            let gamma = match method {
                Some(MethodSpec::Hrde { gamma, .. }) => gamma,
                _ => 1.0,
            };
            let dt = positive("budget.dt", b.dt.unwrap_or_else(|| default_dt(gamma)))?;
            if dt > t_end {
                return Err(Error::config("budget.dt", "must not exceed t_end"));
            }
            let scheme = match b.scheme.as_deref() {
                None | Some("rk4") => Scheme::Rk4,
                Some("euler") => Scheme::Euler,
                Some(other) => return Err(Error::config("budget.scheme", format!("expected `rk4` or `euler`, got `{other}`"))),
            };
            let record_every = b.record_every.unwrap_or(1);
            if record_every == 0 {
                return Err(Error::config("budget.record_every", "must be at least 1"));
            }
            Ok(Budget::Time(IntegratorConfig { scheme, dt, t_end, record_every }))
        }
    }
}

fn parse_stability(s: RawStability) -> Result<StabilitySpec> {
    let mut spec = StabilitySpec::default();
    if let Some(g) = s.gammas {
        if g.is_empty() {
            return Err(Error::config("stability.gammas", "must not be empty"));
        }
        for (i, x) in g.iter().enumerate() {
            positive(&format!("stability.gammas[{i}]"), *x)?;
        }
        spec.gammas = g;
    }
    if let Some(a) = s.alpha {
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::config("stability.alpha", format!("must lie in (0, 1], got {a}")));
        }
        spec.alpha = a;
    }
    if let Some(ms) = s.methods {
        spec.methods = ms
            .iter()
            .enumerate()
            .map(|(i, m)| StabilityMethod::from_id(m).map_err(|e| Error::config(format!("stability.methods[{i}]"), e.to_string())))
            .collect::<Result<_>>()?;
    }
    Ok(spec)
}

/// Sets `key` (dotted path, e.g. `method.gamma`) in a JSON document.
/// The value is read as JSON when it parses, and as a string otherwise.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "override keys are dotted paths like method.gamma"));
    }
    let mut node = doc;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::config(parts[..i].join("."), "cannot set a key inside a non-object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(e: Error) -> String {
        match e {
            Error::Config { path, .. } => path,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn minimal_config() {
        let cfg = parse_config(
            r#"{"problem":{"id":"bilinear"},"method":{"id":"ogda","gamma":0.0625},"mode":"discrete","budget":{"steps":1000}}"#,
        )
        .unwrap();
        assert_eq!(cfg.method, Some(MethodSpec::Discrete(OptimizerKind::Ogda { gamma: 0.0625 })));
        assert_eq!(cfg.budget, Some(Budget::Steps(1000)));
        assert_eq!(cfg.problem, ProblemSpec::unit_bilinear());
    }

    #[test]
    fn negative_gamma_names_the_key() {
        let e = parse_config(r#"{"method":{"id":"gda","gamma":-1}}"#).unwrap_err();
        assert_eq!(path_of(e), "method.gamma");
    }

    #[test]
    fn hrde_mode_needs_time_budget() {
        let e = parse_config(r#"{"mode":"hrde","budget":{"steps":10}}"#).unwrap_err();
        assert!(e.to_string().contains("t_end"), "{e}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let e = parse_config(r#"{"method":{"id":"gda","gamma":0.1,"gamm":1}}"#).unwrap_err();
        assert!(path_of(e).starts_with("method"));
        let e = parse_config(r#"{"problem":{"id":"scaled-identity","params":{"nu":1}}}"#).unwrap_err();
        assert!(path_of(e).starts_with("problem.params"));
        assert!(parse_config(r#"{"extra":1}"#).is_err());
    }

    #[test]
    fn type_errors_carry_paths() {
        let e = parse_config(r#"{"budget":{"steps":"many"}}"#).unwrap_err();
        assert_eq!(path_of(e), "budget.steps");
    }

    #[test]
    fn overrides() {
        let mut doc: Value = serde_json::from_str(r#"{"method":{"id":"gda","gamma":0.1}}"#).unwrap();
        apply_override(&mut doc, "method.gamma", "0.5").unwrap();
        apply_override(&mut doc, "problem.id", "quartic").unwrap();
        assert_eq!(doc["method"]["gamma"], 0.5);
        assert_eq!(doc["problem"]["id"], "quartic");
        assert!(apply_override(&mut doc, "method.id.x", "1").is_err());
    }

    #[test]
    fn lyapunov_must_fit_the_method() {
        let ok = r#"{"method":{"id":"ogda-hrde","gamma":1},"budget":{"t_end":1},"lyapunov":["ogda_l1"]}"#;
        assert!(parse_config(ok).is_ok());
        let bad = r#"{"method":{"id":"ogda-hrde","gamma":1},"budget":{"t_end":1},"lyapunov":["ogda2_l3"]}"#;
        assert_eq!(path_of(parse_config(bad).unwrap_err()), "lyapunov[0]");
    }
}
