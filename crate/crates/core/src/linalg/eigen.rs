//! Eigenvalues of small nonsymmetric matrices.
//!
//! Balancing and Householder reduction to upper Hessenberg form are followed
//! by the Francis implicit double-shift QR iteration. Only eigenvalues are
//! produced; nothing in the crate needs eigenvectors.

use num_complex::Complex64;

use super::DenseMatrix;
use crate::error::{Error, Result};

const ITERATIONS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of a square matrix, in no particular order.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::invalid("matrix", "eigenvalues need a square matrix"));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("eigenvalue input"));
    }
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    balance(&mut a);
    let mut first_err = None;
    for attempt in 0..=SCRAMBLE_ATTEMPTS {
        let mut h = a.clone();
        if attempt > 0 {
            scramble(&mut h, attempt as u64);
        }
        hessenberg(&mut h);
        match hqr(&mut h) {
            Ok(ev) => return Ok(ev),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one attempt ran"))
}

/// Retries after [`scramble`] when the QR iteration stalls.
const SCRAMBLE_ATTEMPTS: usize = 3;

/// Orthogonal similarity `A ← HAH` with a reflector `H = I − 2vvᵀ` whose
/// direction comes from a fixed pseudo-random sequence.
///
/// Matrices made of decoupled blocks with eigenvalues of equal modulus can
/// make the double-shift iteration cycle without deflating. Mixing the
/// coordinates breaks that symmetry and leaves the spectrum unchanged.
fn scramble(a: &mut [Vec<f64>], seed: u64) {
    let n = a.len();
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    for j in 0..n {
        let s: f64 = (0..n).map(|i| v[i] * a[i][j]).sum();
        for i in 0..n {
            a[i][j] -= 2.0 * v[i] * s;
        }
    }
    for row in a.iter_mut() {
        let s: f64 = (0..n).map(|j| v[j] * row[j]).sum();
        for j in 0..n {
            row[j] -= 2.0 * v[j] * s;
        }
    }
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable. Improves accuracy without changing the spectrum.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut g = r / RADIX;
            let mut f = 1.0;
            let s = c + r;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut [Vec<f64>]) {
    let n = a.len();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // Left: A <- (I - 2vvᵀ) A on rows k+1..n.
        for j in 0..n {
            let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * a[k + 1 + t][j]).sum();
            for (t, vt) in v.iter().enumerate() {
                a[k + 1 + t][j] -= 2.0 * vt * s;
            }
        }
        // Right: A <- A (I - 2vvᵀ) on columns k+1..n.
        for row in a.iter_mut() {
            let s: f64 = v.iter().enumerate().map(|(t, vt)| vt * row[k + 1 + t]).sum();
            for (t, vt) in v.iter().enumerate() {
                row[k + 1 + t] -= 2.0 * vt * s;
            }
        }
        for i in k + 2..n {
            a[i][k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
#[allow(clippy::many_single_char_names)]
fn hqr(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    let (mut x, mut y, mut z, mut w, mut s);
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nn;
            while l >= 1 {
                let lu = l as usize;
                s = a[lu - 1][lu - 1].abs() + a[lu][lu].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[lu][lu - 1].abs() + s == s {
                    a[lu][lu - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            x = a[nu][nu];
            if l == nn {
                out[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            y = a[nu - 1][nu - 1];
            w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nn - 1 {
                p = 0.5 * (y - x);
                q = p * p + w;
                z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    let hi = x + z;
                    let lo = if z != 0.0 { x - w / z } else { hi };
                    out[nu - 1] = Complex64::new(hi, 0.0);
                    out[nu] = Complex64::new(lo, 0.0);
                } else {
                    out[nu - 1] = Complex64::new(x + p, -z);
                    out[nu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == ITERATIONS_PER_EIGENVALUE {
                return Err(Error::NoConvergence {
                    what: "hessenberg qr",
                    iterations: its,
                    residual: a[nu][nu - 1].abs(),
                });
            }
            if its > 0 && its % 10 == 0 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            let lu = l as usize;
            let mut m = nu - 2;
            loop {
                z = a[m][m];
                r = x - z;
                s = y - z;
                p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - r - s;
                r = a[m + 2][m + 1];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == lu {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            x = 0.0;
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if lu != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        p = a[k][j] + q * a[k + 1][j];
                        if k != nu - 1 {
                            p += r * a[k + 2][j];
                            a[k + 2][j] -= p * z;
                        }
                        a[k + 1][j] -= p * y;
                        a[k][j] -= p * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for row in a.iter_mut().take(mmin + 1).skip(lu) {
                        p = x * row[k] + y * row[k + 1];
                        if k != nu - 1 {
                            p += z * row[k + 2];
                            row[k + 2] -= p * r;
                        }
                        row[k + 1] -= p * q;
                        row[k] -= p;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(out)
}

/// Coefficients of `det(λI − M)`, highest degree first, by the
/// Faddeev–LeVerrier recursion. The leading coefficient is always 1.
pub fn characteristic_polynomial(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::invalid("matrix", "characteristic polynomial needs a square matrix"));
    }
    let n = m.rows();
    let mut coeffs = vec![1.0];
    let mut mk = DenseMatrix::zeros(n, n);
    let ident = DenseMatrix::identity(n);
    for k in 1..=n {
        let c_prev = *coeffs.last().unwrap();
        mk = DenseMatrix::lincomb(1.0, &m.matmul(&mk), c_prev, &ident);
        let c = -m.matmul(&mk).trace() / k as f64;
        coeffs.push(c);
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_matrix() {
        let m = DenseMatrix::diagonal(&[-1.0, -2.0]);
        let ev = sorted(eigenvalues(&m).unwrap());
        assert_eq!(ev[0], Complex64::new(-2.0, 0.0));
        assert_eq!(ev[1], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let m = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let ev = sorted(eigenvalues(&m).unwrap());
        assert!(ev[0].re.abs() < 1e-15 && (ev[0].im.abs() - 1.0).abs() < 1e-15);
        assert!((ev[0].im + ev[1].im).abs() < 1e-15);
    }

    #[test]
    fn companion_matrix_roots() {
        // (λ-1)(λ-2)(λ-3)(λ-4) = λ⁴ - 10λ³ + 35λ² - 50λ + 24
        let m = DenseMatrix::from_rows(&[
            vec![10.0, -35.0, 50.0, -24.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let ev = sorted(eigenvalues(&m).unwrap());
        for (k, e) in ev.iter().enumerate() {
            assert!((e.re - (k + 1) as f64).abs() < 1e-10, "{e}");
            assert!(e.im.abs() < 1e-10);
        }
    }

    #[test]
    fn decoupled_blocks_need_repeated_exceptional_shifts() {
        // Two independent damped rotation systems interleaved; plain Francis
        // steps stall on this ordering.
        let (b, s) = (39.07199110761596, 7.267023814164554);
        let mut rows = vec![vec![0.0; 8]; 8];
        for i in 0..4 {
            rows[i][i + 4] = 1.0;
            rows[i + 4][i + 4] = -20.0;
        }
        rows[4][2] = -b;
        rows[6][0] = b;
        rows[5][3] = -s;
        rows[7][1] = s;
        let ev = sorted(eigenvalues(&DenseMatrix::from_rows(&rows).unwrap()).unwrap());
        // numpy.linalg.eigvals on the same matrix.
        let expected = [
            (-20.18238920570407, -1.918606248410162),
            (-20.18238920570407, 1.918606248410162),
            (-20.00659034051676, -0.3631118876097252),
            (-20.00659034051676, 0.3631118876097252),
            (0.006590340516768656, -0.3631118876097244),
            (0.006590340516768656, 0.3631118876097244),
            (0.1823892057040578, -1.9186062484101605),
            (0.1823892057040578, 1.9186062484101605),
        ];
        for (e, (re, im)) in ev.iter().zip(expected) {
            assert!((e.re - re).abs() < 1e-9 && (e.im - im).abs() < 1e-9, "{e}");
        }
    }

    #[test]
    fn faddeev_leverrier_on_known_matrix() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        // λ² - 5λ + 5
        let c = characteristic_polynomial(&m).unwrap();
        assert_eq!(c.len(), 3);
        assert!((c[1] + 5.0).abs() < 1e-14);
        assert!((c[2] - 5.0).abs() < 1e-14);
    }
}
