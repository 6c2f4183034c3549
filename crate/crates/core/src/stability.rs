//! Linear stability of the second-order models on pure bilinear games.
//!
//! On `f(x, y) = xᵀAy` every model linearizes exactly to `ż = ω`,
//! `ω̇ = Dz + Wω`, i.e. to the first-order system with matrix
//! `C = [[0, I], [D, W]]`. Stability is decided three ways: by the spectral
//! abscissa of `C`, by Routh arrays of the quartic factors (GDA, OGDA), and
//! by a closed-form test on the eigenvalues of `D` (EG and the lookahead
//! models, for which `W = −βI`).
//!
//! When `A` is not square, `AAᵀ` or `AᵀA` has a kernel, and each kernel
//! direction contributes an eigenvalue `0` of `C` that no method can move.
//! Verdicts are therefore taken on the invariant subspace spanned by the
//! singular vectors of `A`; the eigenvalues discarded this way are reported
//! through [`SystemMatrix::kernel_dim`] and [`StabilityVerdict::full_abscissa`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hrde::{rhs, HrdeKind, PhaseState};
use crate::linalg::{eigenvalues, svd, DenseMatrix, Vector};
use crate::problem::{BilinearGame, Operator, QuarticCounterexample};

/// Entries (and margins) closer to zero than this are reported as marginal.
pub const MARGINAL_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityMethod {
    Gda,
    Eg,
    Ogda,
    La2Gda,
    La3Gda,
}

impl StabilityMethod {
    pub const ALL: [StabilityMethod; 5] = [
        StabilityMethod::Gda,
        StabilityMethod::Eg,
        StabilityMethod::Ogda,
        StabilityMethod::La2Gda,
        StabilityMethod::La3Gda,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            StabilityMethod::Gda => "gda",
            StabilityMethod::Eg => "eg",
            StabilityMethod::Ogda => "ogda",
            StabilityMethod::La2Gda => "la2-gda",
            StabilityMethod::La3Gda => "la3-gda",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.id() == id)
            .ok_or_else(|| Error::invalid("method", format!("unknown stability method `{id}`")))
    }

    pub fn uses_alpha(&self) -> bool {
        matches!(self, StabilityMethod::La2Gda | StabilityMethod::La3Gda)
    }

    /// The continuous model whose linearization this is.
    pub fn hrde(&self, gamma: f64, alpha: f64) -> HrdeKind {
        let beta = 2.0 / gamma;
        match self {
            StabilityMethod::Gda => HrdeKind::Gda { beta },
            StabilityMethod::Eg => HrdeKind::Eg { beta },
            StabilityMethod::Ogda => HrdeKind::Ogda { beta },
            StabilityMethod::La2Gda => HrdeKind::La2 { beta, alpha },
            StabilityMethod::La3Gda => HrdeKind::La3 { beta, alpha },
        }
    }

    /// `(g, h, m)` in `D = −gJ + hJ²`, `W = −βI − mJ`.
    fn coefficients(&self, beta: f64, alpha: f64) -> (f64, f64, f64) {
        match self {
            StabilityMethod::Gda => (beta, 0.0, 0.0),
            StabilityMethod::Eg => (beta, 2.0, 0.0),
            StabilityMethod::Ogda => (beta, 0.0, 2.0),
            StabilityMethod::La2Gda => (2.0 * alpha * beta, 2.0 * alpha, 0.0),
            StabilityMethod::La3Gda => (3.0 * alpha * beta, 6.0 * alpha, 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub c: DenseMatrix,
    pub method: StabilityMethod,
    pub beta: f64,
    pub alpha: Option<f64>,
    /// Dimension of the discarded kernel of `J` (zero for the full matrix
    /// and for square full-rank games).
    pub kernel_dim: usize,
}

impl SystemMatrix {
    /// Half the size of `C`.
    pub fn half(&self) -> usize {
        self.c.rows() / 2
    }

    /// The `D` block (lower left).
    pub fn d_block(&self) -> DenseMatrix {
        let n = self.half();
        self.c.block(n, 0, n, n)
    }

    /// The `W` block (lower right).
    pub fn w_block(&self) -> DenseMatrix {
        let n = self.half();
        self.c.block(n, n, n, n)
    }
}

fn check_game(game: &BilinearGame, gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if !game.is_pure() {
        return Err(Error::invalid("game", "stability analysis needs b = c = 0"));
    }
    if !game.is_full_rank() {
        return Err(Error::NotFullRank {
            sigma_min: game.smallest_singular_value(),
            threshold: game.rank_threshold(),
        });
    }
    Ok(())
}

fn resolve_alpha(method: StabilityMethod, alpha: Option<f64>) -> Result<Option<f64>> {
    if !method.uses_alpha() {
        return Ok(None);
    }
    match alpha {
        Some(a) if a > 0.0 && a <= 1.0 => Ok(Some(a)),
        Some(_) => Err(Error::invalid("alpha", "must lie in (0, 1]")),
        None => Err(Error::invalid("alpha", format!("`{}` needs alpha", method.id()))),
    }
}

fn block_system(j: &DenseMatrix, method: StabilityMethod, beta: f64, alpha: f64) -> DenseMatrix {
    let n = j.rows();
    let (g, h, m) = method.coefficients(beta, alpha);
    let j2 = j.matmul(j);
    let d = DenseMatrix::lincomb(-g, j, h, &j2);
    let w = DenseMatrix::lincomb(-beta, &DenseMatrix::identity(n), -m, j);
    let mut c = DenseMatrix::zeros(2 * n, 2 * n);
    c.set_block(0, n, &DenseMatrix::identity(n));
    c.set_block(n, 0, &d);
    c.set_block(n, n, &w);
    c
}

/// The full `2(d1+d2)`-square system matrix of `method` on `game`.
pub fn assemble_system_matrix(
    method: StabilityMethod,
    game: &BilinearGame,
    gamma: f64,
    alpha: Option<f64>,
) -> Result<SystemMatrix> {
    check_game(game, gamma)?;
    let alpha = resolve_alpha(method, alpha)?;
    let beta = 2.0 / gamma;
    let c = block_system(&game.jacobian_matrix(), method, beta, alpha.unwrap_or(0.0));
    Ok(SystemMatrix { c, method, beta, alpha, kernel_dim: 0 })
}

/// The system matrix restricted to `range(A) × range(Aᵀ)` in the basis of
/// left and right singular vectors. For square games this is an orthogonal
/// similarity of the full matrix.
pub fn restricted_system_matrix(
    method: StabilityMethod,
    game: &BilinearGame,
    gamma: f64,
    alpha: Option<f64>,
) -> Result<SystemMatrix> {
    check_game(game, gamma)?;
    let alpha = resolve_alpha(method, alpha)?;
    let beta = 2.0 / gamma;
    let a = game.matrix();
    let (d1, d2) = (a.rows(), a.cols());
    let dec = svd(a)?;
    let r = dec.s.len();
    let mut q = DenseMatrix::zeros(d1 + d2, 2 * r);
    q.set_block(0, 0, &dec.u);
    q.set_block(d1, r, &dec.v);
    let j = q.transpose().matmul(&game.jacobian_matrix()).matmul(&q);
    let c = block_system(&j, method, beta, alpha.unwrap_or(0.0));
    Ok(SystemMatrix {
        c,
        method,
        beta,
        alpha,
        kernel_dim: d1 + d2 - 2 * r,
    })
}

/// Largest real part among the eigenvalues of `c`.
pub fn spectral_abscissa(c: &DenseMatrix) -> Result<f64> {
    let ev = eigenvalues(c)?;
    Ok(ev.iter().fold(f64::NEG_INFINITY, |m, l| m.max(l.re)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn from_abscissa(a: f64) -> Verdict {
        if a < -MARGINAL_EPS {
            Verdict::Stable
        } else if a > MARGINAL_EPS {
            Verdict::Unstable
        } else {
            Verdict::Marginal
        }
    }

    /// Equal verdicts, or one of them marginal.
    pub fn agrees_with(self, other: Verdict) -> bool {
        self == other || self == Verdict::Marginal || other == Verdict::Marginal
    }

    fn worst(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Unstable, _) | (_, Unstable) => Unstable,
            (Marginal, _) | (_, Marginal) => Marginal,
            _ => Stable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouthResult {
    pub first_column: Vec<f64>,
    pub sign_changes: usize,
    pub verdict: Verdict,
}

/// Routh array of a real polynomial given highest degree first. Returns the
/// first column.
///
/// A zero pivot is replaced by [`MARGINAL_EPS`]; a vanishing row is replaced
/// by the derivative of the auxiliary polynomial formed from the row above.
/// Either substitution makes the verdict marginal.
pub fn routh_array(coeffs: &[f64]) -> Result<RouthResult> {
    if coeffs.is_empty() || coeffs[0] == 0.0 {
        return Err(Error::invalid("polynomial", "leading coefficient must be nonzero"));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    let n = coeffs.len() - 1;
    let width = n / 2 + 1;
    let row_of = |start: usize| -> Vec<f64> {
        (0..width).map(|k| coeffs.get(start + 2 * k).copied().unwrap_or(0.0)).collect()
    };
    let mut rows = vec![row_of(0)];
    if n >= 1 {
        rows.push(row_of(1));
    }
    let mut substituted = false;
    for i in 2..=n {
        let (prev2, prev) = (&rows[i - 2], &rows[i - 1]);
        let pivot = prev[0];
        let mut next: Vec<f64> = (0..width)
            .map(|k| {
                let a = prev2.get(k + 1).copied().unwrap_or(0.0);
                let b = prev.get(k + 1).copied().unwrap_or(0.0);
                (pivot * a - prev2[0] * b) / pivot
            })
            .collect();
        if next.iter().all(|x| x.abs() < MARGINAL_EPS) {
            // Auxiliary polynomial of degree n − i + 1 from the row above.
            let deg = n - (i - 1);
            next = (0..width)
                .map(|k| {
                    let power = deg as isize - 2 * k as isize;
                    if power > 0 {
                        prev.get(k).copied().unwrap_or(0.0) * power as f64
                    } else {
                        0.0
                    }
                })
                .collect();
            substituted = true;
        }
        if next[0].abs() < MARGINAL_EPS {
            next[0] = MARGINAL_EPS;
            substituted = true;
        }
        rows.push(next);
    }
    let first_column: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let marginal = substituted || first_column.iter().any(|x| x.abs() < MARGINAL_EPS);
    let signs: Vec<f64> = first_column
        .iter()
        .filter(|x| x.abs() >= MARGINAL_EPS)
        .map(|x| x.signum())
        .collect();
    let sign_changes = signs.windows(2).filter(|p| p[0] != p[1]).count();
    let verdict = if marginal {
        Verdict::Marginal
    } else if sign_changes > 0 {
        Verdict::Unstable
    } else {
        Verdict::Stable
    };
    Ok(RouthResult { first_column, sign_changes, verdict })
}

fn check_quartic_args(beta: f64, kappa: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be positive"));
    }
    if !(kappa < 0.0 && kappa.is_finite()) {
        return Err(Error::invalid("kappa", "must be negative (an eigenvalue of −AAᵀ)"));
    }
    Ok(())
}

/// `λ⁴ + 2βλ³ + β²λ² − κβ²`, the GDA factor for an eigenvalue `κ` of `−AAᵀ`.
pub fn quartic_gda_coefficients(beta: f64, kappa: f64) -> [f64; 5] {
    [1.0, 2.0 * beta, beta * beta, 0.0, -kappa * beta * beta]
}

/// `λ⁴ + 2βλ³ + (β² − 4κ)λ² − 4βκλ − κβ²`, the OGDA factor.
pub fn quartic_ogda_coefficients(beta: f64, kappa: f64) -> [f64; 5] {
    [
        1.0,
        2.0 * beta,
        beta * beta - 4.0 * kappa,
        -4.0 * beta * kappa,
        -kappa * beta * beta,
    ]
}

/// Routh array of the GDA quartic. First column `[1, 2β, β², 2κβ, −κβ²]`,
/// so it is unstable for every `β > 0`, `κ < 0`.
pub fn routh_quartic_gda(beta: f64, kappa: f64) -> Result<RouthResult> {
    check_quartic_args(beta, kappa)?;
    routh_array(&quartic_gda_coefficients(beta, kappa))
}

/// Routh array of the OGDA quartic. First column
/// `[1, 2β, β² − 2κ, −2βκ(β² − 4κ)/(β² − 2κ), −κβ²]`, all positive.
pub fn routh_quartic_ogda(beta: f64, kappa: f64) -> Result<RouthResult> {
    check_quartic_args(beta, kappa)?;
    routh_array(&quartic_ogda_coefficients(beta, kappa))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexEigenTest {
    pub mu_re: f64,
    pub mu_im: f64,
    pub beta: f64,
    pub stable: bool,
    /// `μ₁ + μ₂²/β²`; negative when stable.
    pub margin: f64,
}

/// Both roots of `λ(β + λ) = μ` lie in the open left half-plane iff
/// `Re μ < −(Im μ)²/β²`.
pub fn complex_quadratic_stable(beta: f64, mu: Complex64) -> ComplexEigenTest {
    let margin = mu.re + mu.im * mu.im / (beta * beta);
    ComplexEigenTest {
        mu_re: mu.re,
        mu_im: mu.im,
        beta,
        stable: margin < 0.0,
        margin,
    }
}

impl ComplexEigenTest {
    pub fn verdict(&self) -> Verdict {
        if self.margin.abs() < MARGINAL_EPS {
            Verdict::Marginal
        } else if self.stable {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityVerdict {
    pub method: StabilityMethod,
    pub gamma: f64,
    pub alpha: Option<f64>,
    /// Abscissa on the range of `J`; the quantity verdicts are taken on.
    pub spectral_abscissa: f64,
    /// Abscissa of the unrestricted matrix (zero whenever a kernel exists).
    pub full_abscissa: f64,
    pub kernel_dim: usize,
    pub abscissa_verdict: Verdict,
    /// Routh arrays, one per nonzero singular value (GDA and OGDA only).
    pub routh: Option<Vec<RouthResult>>,
    /// Closed-form tests, one per eigenvalue of `D` (EG and lookahead only).
    pub complex_tests: Option<Vec<ComplexEigenTest>>,
    pub test_verdict: Verdict,
    pub agrees: bool,
}

/// Decides stability of `method` on `game` at step size `gamma`.
pub fn analyze(
    method: StabilityMethod,
    game: &BilinearGame,
    gamma: f64,
    alpha: Option<f64>,
) -> Result<StabilityVerdict> {
    let restricted = restricted_system_matrix(method, game, gamma, alpha)?;
    let full = assemble_system_matrix(method, game, gamma, alpha)?;
    let abscissa = spectral_abscissa(&restricted.c)?;
    let full_abscissa = spectral_abscissa(&full.c)?;
    let beta = restricted.beta;
    let (routh, complex_tests, test_verdict) = match method {
        StabilityMethod::Gda | StabilityMethod::Ogda => {
            let sigmas = svd(game.matrix())?.s;
            let arrays = sigmas
                .iter()
                .map(|s| {
                    let kappa = -s * s;
                    if method == StabilityMethod::Gda {
                        routh_quartic_gda(beta, kappa)
                    } else {
                        routh_quartic_ogda(beta, kappa)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let v = arrays.iter().fold(Verdict::Stable, |acc, r| acc.worst(r.verdict));
            (Some(arrays), None, v)
        }
        _ => {
            let tests: Vec<ComplexEigenTest> = eigenvalues(&restricted.d_block())?
                .into_iter()
                .map(|mu| complex_quadratic_stable(beta, mu))
                .collect();
            let v = tests.iter().fold(Verdict::Stable, |acc, t| acc.worst(t.verdict()));
            (None, Some(tests), v)
        }
    };
    let abscissa_verdict = Verdict::from_abscissa(abscissa);
    Ok(StabilityVerdict {
        method,
        gamma,
        alpha: restricted.alpha,
        spectral_abscissa: abscissa,
        full_abscissa,
        kernel_dim: restricted.kernel_dim,
        abscissa_verdict,
        routh,
        complex_tests,
        test_verdict,
        agrees: abscissa_verdict.agrees_with(test_verdict),
    })
}

/// [`analyze`] over a grid of step sizes.
pub fn stability_scan(
    method: StabilityMethod,
    game: &BilinearGame,
    gammas: &[f64],
    alpha: Option<f64>,
) -> Result<Vec<StabilityVerdict>> {
    gammas.iter().map(|&g| analyze(method, game, g, alpha)).collect()
}

/// Fails with a diagnostic if any verdict in `scan` has disagreeing tests.
pub fn ensure_agreement(scan: &[StabilityVerdict]) -> Result<()> {
    match scan.iter().find(|v| !v.agrees) {
        None => Ok(()),
        Some(v) => Err(Error::invalid(
            "stability",
            format!(
                "{} at gamma = {}: abscissa {:e} says {:?}, closed-form test says {:?}",
                v.method.id(),
                v.gamma,
                v.spectral_abscissa,
                v.abscissa_verdict,
                v.test_verdict
            ),
        )),
    }
}

/// Upper end of the bracket search for [`eg_hrde_spurious_fixed_point`].
const FIXED_POINT_BRACKET_LIMIT: f64 = 1e6;

/// Nonzero equilibrium `(r, r)` of the EG model with `ω = 0` on the quartic
/// operator `V(x, y) = (4x³, 4y³)`, whose only solution is the origin.
///
/// On the diagonal the right-hand side is `(24r² − β)·4r³` in each
/// coordinate, and `r` is found by bisection on `24r² − β`.
pub fn eg_hrde_spurious_fixed_point(beta: f64) -> Result<Vector> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", "must be positive"));
    }
    let op = QuarticCounterexample;
    let scalar = |r: f64| {
        let z = Vector::from_raw(vec![r, r]);
        let v = op.field(&z);
        let jv = op.jacobian(&z).mul_vec(&v);
        2.0 * jv[0] - beta * v[0]
    };
    // Sign of `scalar` is that of 24r² − β for r > 0.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while scalar(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > FIXED_POINT_BRACKET_LIMIT {
            return Err(Error::NoConvergence {
                what: "eg fixed point bracket",
                iterations: 0,
                residual: scalar(hi).abs(),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if scalar(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = if scalar(hi).abs() < scalar(lo).abs() { hi } else { lo };
    let z = Vector::from_raw(vec![r, r]);
    let resid = fixed_point_residual(&HrdeKind::Eg { beta }, &z)?;
    if !(r > 0.0) || resid > 1e-10 {
        return Err(Error::NoConvergence {
            what: "eg fixed point",
            iterations: 200,
            residual: resid,
        });
    }
    Ok(z)
}

/// `‖rhs(kind, quartic, (z, 0))‖`
pub fn fixed_point_residual(kind: &HrdeKind, z: &Vector) -> Result<f64> {
    let s = PhaseState::at_rest(z.clone());
    let (dz, da) = rhs(kind, &QuarticCounterexample, &s)?;
    Ok((dz.norm_sq() + da.norm_sq()).sqrt())
}

/// `(‖Aᵀx‖² + ‖Ay‖², 2|x̄ᵀAy|²)` for complex `x`, `y`.
pub fn numerical_range_sides(a: &DenseMatrix, x: &[Complex64], y: &[Complex64]) -> (f64, f64) {
    let (m, n) = (a.rows(), a.cols());
    let mut lhs = 0.0;
    for j in 0..n {
        let s: Complex64 = (0..m).map(|i| x[i] * a[(i, j)]).sum();
        lhs += s.norm_sqr();
    }
    let mut ay = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        ay[i] = (0..n).map(|j| y[j] * a[(i, j)]).sum();
        lhs += ay[i].norm_sqr();
    }
    let bilinear: Complex64 = (0..m).map(|i| x[i].conj() * ay[i]).sum();
    (lhs, 2.0 * bilinear.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_game() -> BilinearGame {
        BilinearGame::new(DenseMatrix::from_rows(&[vec![1.0]]).unwrap()).unwrap()
    }

    fn assert_column(r: &RouthResult, expected: &[f64]) {
        assert_eq!(r.first_column.len(), expected.len());
        for (a, b) in r.first_column.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{:?} vs {:?}", r.first_column, expected);
        }
    }

    #[test]
    fn gda_matrix_fixture() {
        let c = assemble_system_matrix(StabilityMethod::Gda, &unit_game(), 1.0, None).unwrap().c;
        let expected = DenseMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, -2.0, -2.0, 0.0],
            vec![2.0, 0.0, 0.0, -2.0],
        ])
        .unwrap();
        assert_eq!(c, expected);
        assert!(spectral_abscissa(&c).unwrap() > 0.0);
    }

    #[test]
    fn ogda_matrix_fixture() {
        let c = assemble_system_matrix(StabilityMethod::Ogda, &unit_game(), 1.0, None).unwrap().c;
        let expected = DenseMatrix::from_rows(&[
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, -2.0, -2.0, -2.0],
            vec![2.0, 0.0, 2.0, -2.0],
        ])
        .unwrap();
        assert_eq!(c, expected);
        assert!(spectral_abscissa(&c).unwrap() < 0.0);
    }

    #[test]
    fn zero_matrix_rejected() {
        let g = BilinearGame::new(DenseMatrix::zeros(1, 1)).unwrap();
        for m in StabilityMethod::ALL {
            assert!(assemble_system_matrix(m, &g, 1.0, Some(0.5)).is_err());
        }
    }

    #[test]
    fn diagonal_abscissa() {
        assert_eq!(spectral_abscissa(&DenseMatrix::diagonal(&[-1.0, -2.0])).unwrap(), -1.0);
    }

    #[test]
    fn gda_routh_fixtures() {
        let r = routh_quartic_gda(2.0, -1.0).unwrap();
        assert_column(&r, &[1.0, 4.0, 4.0, -4.0, 4.0]);
        assert_eq!(r.sign_changes, 2);
        assert_eq!(r.verdict, Verdict::Unstable);
        let r = routh_quartic_gda(10.0, -0.25).unwrap();
        assert_column(&r, &[1.0, 20.0, 100.0, -5.0, 25.0]);
        assert!(routh_quartic_gda(2.0, 0.0).is_err());
    }

    #[test]
    fn ogda_routh_is_stable() {
        let r = routh_quartic_ogda(2.0, -1.0).unwrap();
        assert_column(&r, &[1.0, 4.0, 6.0, 16.0 / 3.0, 4.0]);
        assert_eq!(r.verdict, Verdict::Stable);
        let r = routh_quartic_ogda(1.0, -4.0).unwrap();
        assert_column(&r, &[1.0, 2.0, 9.0, 8.0 * 17.0 / 9.0, 4.0]);
    }

    #[test]
    fn routh_marginal_cases() {
        // λ² + 1: purely imaginary roots, vanishing row.
        assert_eq!(routh_array(&[1.0, 0.0, 1.0]).unwrap().verdict, Verdict::Marginal);
        // (λ + 1)(λ + 2)
        assert_eq!(routh_array(&[1.0, 3.0, 2.0]).unwrap().verdict, Verdict::Stable);
        // (λ − 1)(λ + 2)
        let r = routh_array(&[1.0, 1.0, -2.0]).unwrap();
        assert_eq!((r.verdict, r.sign_changes), (Verdict::Unstable, 1));
    }

    #[test]
    fn complex_test_examples() {
        assert!(complex_quadratic_stable(2.0, Complex64::new(-1.0, 0.0)).stable);
        assert!(!complex_quadratic_stable(2.0, Complex64::new(-0.1, 1.0)).stable);
        assert!(complex_quadratic_stable(2.0, Complex64::new(-0.5, 1.0)).stable);
    }

    #[test]
    fn spurious_fixed_points() {
        let z = eg_hrde_spurious_fixed_point(24.0).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-14 && z[0] == z[1]);
        let z = eg_hrde_spurious_fixed_point(6.0).unwrap();
        assert!((z[0] - 0.5).abs() < 1e-14);
        let resid = fixed_point_residual(&HrdeKind::Eg { beta: 6.0 }, &z).unwrap();
        assert!(resid <= 1e-10);
    }

    #[test]
    fn restricted_matrix_drops_kernel() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0], vec![0.3, 0.2]]).unwrap();
        let g = BilinearGame::new(a).unwrap();
        let v = analyze(StabilityMethod::Ogda, &g, 0.1, None).unwrap();
        assert_eq!(v.kernel_dim, 1);
        assert!(v.spectral_abscissa < 0.0);
        assert!(v.full_abscissa.abs() < 1e-10);
        assert!(v.agrees);
    }
}
