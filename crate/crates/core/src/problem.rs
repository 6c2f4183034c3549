//! Operators `V` with Jacobians, the problem catalog, and numerical probes.
//!
//! A saddle point problem `min_x max_y f(x, y)` induces the vector field
//! `V(x, y) = (∇ₓf, −∇ᵧf)`. Everything downstream (optimizers, ODEs,
//! Lyapunov monitors) only ever sees [`Operator`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{svd, DenseMatrix, Vector};

/// Default full-rank threshold on the smallest singular value.
pub const DEFAULT_SIGMA_MIN: f64 = 0.05;
/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// How many times [`random_bilinear`] redraws before giving up.
pub const REDRAW_BUDGET: usize = 1000;

/// A (possibly monotone) operator on `ℝᵈ` with `d = d1 + d2`.
///
/// `field` and `jacobian` are the raw evaluators. They do not validate their
/// input, which lets the optimizers run through a blow-up and report it.
/// Use [`eval_field`] and [`eval_jacobian`] at API boundaries.
pub trait Operator: Send + Sync {
    /// Block dimensions `(d1, d2)` of the `x` and `y` players.
    fn blocks(&self) -> (usize, usize);

    fn dim(&self) -> usize {
        let (d1, d2) = self.blocks();
        d1 + d2
    }

    fn field(&self, z: &Vector) -> Vector;

    fn jacobian(&self, z: &Vector) -> DenseMatrix;

    /// Global Lipschitz constant of `V`, when one exists.
    fn lipschitz(&self) -> Option<f64> {
        None
    }

    /// Strong monotonicity modulus (0 for merely monotone operators).
    fn strong_monotonicity(&self) -> Option<f64> {
        None
    }

    /// The point where `V` vanishes.
    fn solution(&self) -> Vector {
        Vector::zeros(self.dim())
    }

    fn label(&self) -> String;
}

impl fmt::Debug for dyn Operator + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator({})", self.label())
    }
}

fn check_point(op: &dyn Operator, z: &Vector) -> Result<()> {
    Error::check_dim(op.dim(), z.dim())?;
    if !z.is_finite() {
        return Err(Error::NonFinite("operator input"));
    }
    Ok(())
}

/// Evaluates `V(z)` after checking the dimension and finiteness of `z`.
pub fn eval_field(op: &dyn Operator, z: &Vector) -> Result<Vector> {
    check_point(op, z)?;
    let v = op.field(z);
    if !v.is_finite() {
        return Err(Error::NonFinite("operator value"));
    }
    Ok(v)
}

/// Evaluates the analytic Jacobian `J(z)`.
pub fn eval_jacobian(op: &dyn Operator, z: &Vector) -> Result<DenseMatrix> {
    check_point(op, z)?;
    Ok(op.jacobian(z))
}

/// Central-difference Jacobian with step `h`.
pub fn fd_jacobian(op: &dyn Operator, z: &Vector, h: f64) -> Result<DenseMatrix> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h", "step must be positive"));
    }
    check_point(op, z)?;
    let d = op.dim();
    let mut jac = DenseMatrix::zeros(d, d);
    let mut probe = z.clone();
    for j in 0..d {
        let orig = probe[j];
        probe.as_mut_slice()[j] = orig + h;
        let plus = op.field(&probe);
        probe.as_mut_slice()[j] = orig - h;
        let minus = op.field(&probe);
        probe.as_mut_slice()[j] = orig;
        for i in 0..d {
            let entry = (plus[i] - minus[i]) / (2.0 * h);
            if !entry.is_finite() {
                return Err(Error::NonFinite("finite-difference jacobian"));
            }
            jac[(i, j)] = entry;
        }
    }
    Ok(jac)
}

/// Bilinear game `f(x, y) = xᵀAy + bᵀx + cᵀy`.
#[derive(Clone, Debug)]
pub struct BilinearGame {
    a: DenseMatrix,
    b: Vector,
    c: Vector,
    solution: Vector,
    sigma_min: f64,
    sigma_max: f64,
    rank_threshold: f64,
    full_rank: bool,
}

impl BilinearGame {
    /// The pure game `xᵀAy`, full rank judged against [`DEFAULT_SIGMA_MIN`].
    pub fn new(a: DenseMatrix) -> Result<Self> {
        let (d1, d2) = (a.rows(), a.cols());
        Self::with_offsets(a, Vector::zeros(d1), Vector::zeros(d2), DEFAULT_SIGMA_MIN)
    }

    /// General game with linear terms. The solution solves `Ay = −b` and
    /// `Aᵀx = −c`; construction fails when no such point exists.
    pub fn with_offsets(a: DenseMatrix, b: Vector, c: Vector, sigma_min: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite("bilinear matrix"));
        }
        Error::check_dim(a.rows(), b.dim())?;
        Error::check_dim(a.cols(), c.dim())?;
        if !(sigma_min > 0.0) {
            return Err(Error::invalid("sigma_min", "must be positive"));
        }
        let dec = svd(&a)?;
        let (smin, smax) = (dec.sigma_min(), dec.sigma_max());
        let full_rank = smin >= sigma_min;

        // Minimum-norm solve through the pseudo-inverse on the retained
        // singular triplets.
        let tol = smax * 1e-12 * a.rows().max(a.cols()) as f64;
        let pinv_apply = |u: &DenseMatrix, v: &DenseMatrix, rhs: &Vector| -> Vector {
            let mut out = Vector::zeros(v.rows());
            for (k, &s) in dec.s.iter().enumerate() {
                if s <= tol {
                    continue;
                }
                let coef = u.column(k).dot(rhs) / s;
                out.axpy(coef, &v.column(k));
            }
            out
        };
        // y = −A⁺b, x = −(Aᵀ)⁺c
        let y = -&pinv_apply(&dec.u, &dec.v, &b);
        let x = -&pinv_apply(&dec.v, &dec.u, &c);
        let solution = Vector::concat(&x, &y);
        let game = BilinearGame {
            a,
            b,
            c,
            solution,
            sigma_min: smin,
            sigma_max: smax,
            rank_threshold: sigma_min,
            full_rank,
        };
        let resid = game.field(&game.solution).norm_inf();
        let scale = 1.0 + game.b.norm_inf() + game.c.norm_inf();
        if resid > 1e-12 * scale {
            return Err(Error::invalid(
                "bilinear offsets",
                format!("game has no saddle point (residual {resid:e})"),
            ));
        }
        Ok(game)
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn offsets(&self) -> (&Vector, &Vector) {
        (&self.b, &self.c)
    }

    pub fn is_pure(&self) -> bool {
        self.b.norm_inf() == 0.0 && self.c.norm_inf() == 0.0
    }

    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.sigma_min
    }

    /// Smallest singular value at which the game still counts as full rank.
    pub fn rank_threshold(&self) -> f64 {
        self.rank_threshold
    }

    /// `J = [[0, A], [−Aᵀ, 0]]`, the same at every point.
    pub fn jacobian_matrix(&self) -> DenseMatrix {
        let (d1, d2) = (self.a.rows(), self.a.cols());
        let mut j = DenseMatrix::zeros(d1 + d2, d1 + d2);
        j.set_block(0, d1, &self.a);
        j.set_block(d1, 0, &self.a.transpose().scaled(-1.0));
        j
    }
}

impl Operator for BilinearGame {
    fn blocks(&self) -> (usize, usize) {
        (self.a.rows(), self.a.cols())
    }

    fn field(&self, z: &Vector) -> Vector {
        let (d1, d2) = self.blocks();
        let (x, y) = z.split(d1);
        let mut out = vec![0.0; d1 + d2];
        for i in 0..d1 {
            let row = self.a.row(i);
            out[i] = row.iter().zip(y).map(|(a, yj)| a * yj).sum::<f64>() + self.b[i];
        }
        for j in 0..d2 {
            let s: f64 = (0..d1).map(|i| self.a[(i, j)] * x[i]).sum();
            out[d1 + j] = -s - self.c[j];
        }
        Vector::from_raw(out)
    }

    fn jacobian(&self, _z: &Vector) -> DenseMatrix {
        self.jacobian_matrix()
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.sigma_max)
    }

    fn strong_monotonicity(&self) -> Option<f64> {
        Some(0.0)
    }

    fn solution(&self) -> Vector {
        self.solution.clone()
    }

    fn label(&self) -> String {
        format!("bilinear {}x{}", self.a.rows(), self.a.cols())
    }
}

/// `f(x, y) = x⁴ − y⁴`, whose field `(4x³, 4y³)` is monotone but not
/// Lipschitz.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuarticCounterexample;

impl Operator for QuarticCounterexample {
    fn blocks(&self) -> (usize, usize) {
        (1, 1)
    }

    fn field(&self, z: &Vector) -> Vector {
        let (x, y) = (z[0], z[1]);
        Vector::from_raw(vec![4.0 * x * x * x, 4.0 * y * y * y])
    }

    fn jacobian(&self, z: &Vector) -> DenseMatrix {
        let (x, y) = (z[0], z[1]);
        DenseMatrix::diagonal(&[12.0 * x * x, 12.0 * y * y])
    }

    fn strong_monotonicity(&self) -> Option<f64> {
        Some(0.0)
    }

    fn label(&self) -> String {
        "quartic".into()
    }
}

/// `V(z) = μz` on `ℝᵈ`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledIdentityOperator {
    mu: f64,
    dim: usize,
}

impl ScaledIdentityOperator {
    pub fn new(mu: f64, dim: usize) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu", "must be positive and finite"));
        }
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        Ok(ScaledIdentityOperator { mu, dim })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl Operator for ScaledIdentityOperator {
    fn blocks(&self) -> (usize, usize) {
        // Split as evenly as possible; the x/y split has no effect on V.
        (self.dim.div_ceil(2), self.dim / 2)
    }

    fn field(&self, z: &Vector) -> Vector {
        z.scaled(self.mu)
    }

    fn jacobian(&self, _z: &Vector) -> DenseMatrix {
        DenseMatrix::identity(self.dim).scaled(self.mu)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(self.mu)
    }

    fn strong_monotonicity(&self) -> Option<f64> {
        Some(self.mu)
    }

    fn label(&self) -> String {
        format!("scaled-identity mu={}", self.mu)
    }
}

type FieldFn = dyn Fn(&Vector) -> Vector + Send + Sync;
type JacobianFn = dyn Fn(&Vector) -> DenseMatrix + Send + Sync;

/// An operator assembled from closures, for tests and experiments that need
/// something outside the catalog.
#[derive(Clone)]
pub struct CustomOperator {
    blocks: (usize, usize),
    field: Arc<FieldFn>,
    jacobian: Arc<JacobianFn>,
    lipschitz: Option<f64>,
    mu: Option<f64>,
    solution: Option<Vector>,
    label: String,
}

impl CustomOperator {
    pub fn new(
        blocks: (usize, usize),
        field: impl Fn(&Vector) -> Vector + Send + Sync + 'static,
        jacobian: impl Fn(&Vector) -> DenseMatrix + Send + Sync + 'static,
    ) -> Self {
        CustomOperator {
            blocks,
            field: Arc::new(field),
            jacobian: Arc::new(jacobian),
            lipschitz: None,
            mu: None,
            solution: None,
            label: "custom".into(),
        }
    }

    /// Linear operator `V(z) = Mz` with the exact Jacobian.
    pub fn linear(blocks: (usize, usize), m: DenseMatrix) -> Self {
        let jm = m.clone();
        Self::new(blocks, move |z| m.mul_vec(z), move |_| jm.clone())
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_strong_monotonicity(mut self, mu: f64) -> Self {
        self.mu = Some(mu);
        self
    }

    pub fn with_solution(mut self, z: Vector) -> Self {
        self.solution = Some(z);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

impl fmt::Debug for CustomOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomOperator")
            .field("blocks", &self.blocks)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl Operator for CustomOperator {
    fn blocks(&self) -> (usize, usize) {
        self.blocks
    }
    fn field(&self, z: &Vector) -> Vector {
        (self.field)(z)
    }
    fn jacobian(&self, z: &Vector) -> DenseMatrix {
        (self.jacobian)(z)
    }
    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
    fn strong_monotonicity(&self) -> Option<f64> {
        self.mu
    }
    fn solution(&self) -> Vector {
        self.solution.clone().unwrap_or_else(|| Vector::zeros(self.dim()))
    }
    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Draws a pure bilinear game with standard normal entries, redrawing until
/// the smallest singular value reaches `sigma_min`.
pub fn random_bilinear(seed: u64, d1: usize, d2: usize, sigma_min: f64) -> Result<BilinearGame> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::invalid("d1/d2", "block dimensions must be at least 1"));
    }
    if !(sigma_min > 0.0) {
        return Err(Error::invalid("sigma_min", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REDRAW_BUDGET {
        let data: Vec<f64> = (0..d1 * d2).map(|_| rng.sample(StandardNormal)).collect();
        let a = DenseMatrix::new(d1, d2, data)?;
        let game = BilinearGame::with_offsets(a, Vector::zeros(d1), Vector::zeros(d2), sigma_min)?;
        if game.is_full_rank() {
            return Ok(game);
        }
    }
    Err(Error::NoConvergence {
        what: "random_bilinear redraw",
        iterations: REDRAW_BUDGET,
        residual: f64::NAN,
    })
}

/// Minima found by [`monotonicity_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityReport {
    /// `min ⟨z − z′, V(z) − V(z′)⟩` over sampled pairs.
    pub pairwise_min: f64,
    /// `min ⟨V(z), z − z*⟩` over sampled points.
    pub solution_min: f64,
    /// `min ⟨z − z′, V(z) − V(z′)⟩ / ‖z − z′‖²`, a lower estimate of the
    /// strong monotonicity modulus.
    pub modulus_estimate: f64,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.pairwise_min >= -1e-10 && self.solution_min >= -1e-10
    }
}

/// Samples point pairs uniformly in the ball of `radius` around the
/// solution and reports the monotonicity inner products.
pub fn monotonicity_probe(
    op: &dyn Operator,
    seed: u64,
    samples: usize,
    radius: f64,
) -> Result<MonotonicityReport> {
    if samples == 0 {
        return Err(Error::invalid("samples", "must be at least 1"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("radius", "must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = op.solution();
    let mut report = MonotonicityReport {
        pairwise_min: f64::INFINITY,
        solution_min: f64::INFINITY,
        modulus_estimate: f64::INFINITY,
    };
    for _ in 0..samples {
        let z = sample_ball(&mut rng, &center, radius);
        let zp = sample_ball(&mut rng, &center, radius);
        let (v, vp) = (op.field(&z), op.field(&zp));
        let dz = &z - &zp;
        let inner = dz.dot(&(&v - &vp));
        report.pairwise_min = report.pairwise_min.min(inner);
        let nsq = dz.norm_sq();
        if nsq > 0.0 {
            report.modulus_estimate = report.modulus_estimate.min(inner / nsq);
        }
        report.solution_min = report.solution_min.min(v.dot(&(&z - &center)));
    }
    Ok(report)
}

pub(crate) fn sample_ball(rng: &mut impl Rng, center: &Vector, radius: f64) -> Vector {
    let d = center.dim();
    let dir = Vector::from_fn(d, |_| rng.sample(StandardNormal));
    let n = dir.norm();
    let u: f64 = rng.random::<f64>();
    let scale = if n > 0.0 { radius * u.powf(1.0 / d as f64) / n } else { 0.0 };
    Vector::lincomb(1.0, center, scale, &dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn unit_game() -> BilinearGame {
        BilinearGame::new(DenseMatrix::from_rows(&[vec![1.0]]).unwrap()).unwrap()
    }

    #[test]
    fn bilinear_field_by_hand() {
        let g = unit_game();
        assert_eq!(eval_field(&g, &v(&[1.0, 2.0])).unwrap().as_slice(), &[2.0, -1.0]);
        assert_eq!(eval_jacobian(&g, &v(&[3.0, 4.0])).unwrap().as_slice(), &[0.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn boundary_checks() {
        let g = unit_game();
        assert!(matches!(eval_field(&g, &v(&[1.0])), Err(Error::DimensionMismatch { .. })));
        let bad = Vector::from_raw(vec![f64::NAN, 0.0]);
        assert!(matches!(eval_field(&g, &bad), Err(Error::NonFinite(_))));
        assert!(fd_jacobian(&g, &v(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn quartic_field_and_jacobian() {
        let q = QuarticCounterexample;
        assert_eq!(eval_field(&q, &v(&[1.0, 1.0])).unwrap().as_slice(), &[4.0, 4.0]);
        assert_eq!(eval_jacobian(&q, &v(&[1.0, 1.0])).unwrap(), DenseMatrix::identity(2).scaled(12.0));
        let fd = fd_jacobian(&q, &v(&[1.0, 1.0]), 1e-4).unwrap();
        for (a, b) in fd.as_slice().iter().zip([12.0, 0.0, 0.0, 12.0]) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn quartic_field_matches_differentiated_objective() {
        // V = (∂f/∂x, −∂f/∂y) with f = x⁴ − y⁴, by central differences of f.
        let f = |x: f64, y: f64| x.powi(4) - y.powi(4);
        let (x, y, h) = (0.7, -1.3, 1e-5);
        let dfx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let dfy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let val = QuarticCounterexample.field(&v(&[x, y]));
        assert!((val[0] - dfx).abs() < 1e-8);
        assert!((val[1] + dfy).abs() < 1e-8);
    }

    #[test]
    fn scaled_identity_fd_is_exact() {
        let s = ScaledIdentityOperator::new(1.0, 2).unwrap();
        let fd = fd_jacobian(&s, &v(&[0.0, 0.0]), 1e-3).unwrap();
        let err = DenseMatrix::lincomb(1.0, &fd, -1.0, &DenseMatrix::identity(2)).frobenius_norm();
        assert!(err < 1e-12);
        assert_eq!(
            eval_jacobian(&ScaledIdentityOperator::new(3.0, 2).unwrap(), &v(&[5.0, 1.0])).unwrap(),
            DenseMatrix::identity(2).scaled(3.0)
        );
    }

    #[test]
    fn shifted_game_translates_solution() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let g = BilinearGame::with_offsets(a, v(&[2.0, -1.0]), v(&[4.0, 1.0]), DEFAULT_SIGMA_MIN).unwrap();
        let z = g.solution();
        assert!(g.field(&z).norm_inf() < 1e-12);
        assert!(!g.is_pure());
    }

    #[test]
    fn inconsistent_offsets_rejected() {
        // A = [1 0]ᵀ has range {(t, 0)}; b outside it has no solution for Ay = −b.
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
        assert!(BilinearGame::with_offsets(a, v(&[0.0, 1.0]), v(&[0.0]), 0.05).is_err());
    }

    #[test]
    fn random_bilinear_shapes_and_determinism() {
        let g = random_bilinear(1, 2, 3, DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(g.matrix().rows(), 2);
        assert_eq!(g.matrix().cols(), 3);
        assert_eq!(g.dim(), 5);
        let g2 = random_bilinear(1, 2, 3, DEFAULT_SIGMA_MIN).unwrap();
        assert_eq!(g.matrix().as_slice(), g2.matrix().as_slice());
        assert!(random_bilinear(0, 0, 1, 0.1).is_err());
    }

    #[test]
    fn random_bilinear_seed_zero_fixture() {
        let g = random_bilinear(0, 1, 1, 0.1).unwrap();
        let a = g.matrix()[(0, 0)];
        assert!(a.abs() >= 0.1);
        assert_eq!(a.to_bits(), random_bilinear(0, 1, 1, 0.1).unwrap().matrix()[(0, 0)].to_bits());
        assert_eq!(a, SEED0_ENTRY);
    }

    // Pinned from the first run of the seeded generator.
    const SEED0_ENTRY: f64 = 0.6999607946268154;

    #[test]
    fn probe_detects_monotonicity() {
        let g = random_bilinear(3, 2, 2, DEFAULT_SIGMA_MIN).unwrap();
        let r = monotonicity_probe(&g, 7, 1000, 2.0).unwrap();
        assert!(r.pairwise_min.abs() < 1e-10 && r.solution_min.abs() < 1e-10);

        let s = ScaledIdentityOperator::new(2.0, 3).unwrap();
        let r = monotonicity_probe(&s, 7, 200, 1.0).unwrap();
        assert!(r.modulus_estimate >= 2.0 - 1e-12);

        let anti = CustomOperator::linear((1, 1), DenseMatrix::identity(2).scaled(-1.0));
        let r = monotonicity_probe(&anti, 7, 100, 1.0).unwrap();
        assert!(r.pairwise_min < 0.0);
        assert!(!r.is_monotone());
    }
}
