//! Cross-checks of the hand-written dense solvers against nalgebra.

use nalgebra::DMatrix;
use proptest::prelude::*;
use saddlekit::linalg::{characteristic_polynomial, eigenvalues, svd, DenseMatrix};

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3.0..3.0f64, r * c)
            .prop_map(move |data| DenseMatrix::new(r, c, data).unwrap())
    })
}

fn square_strategy(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-3.0..3.0f64, n * n)
            .prop_map(move |data| DenseMatrix::new(n, n, data).unwrap())
    })
}

/// Matching distance between two eigenvalue multisets: for each of ours the
/// closest unused reference value.
fn spectrum_distance(ours: &[num_complex::Complex64], reference: &[num_complex::Complex64]) -> f64 {
    let mut used = vec![false; reference.len()];
    let mut worst = 0.0_f64;
    for e in ours {
        let (k, d) = reference
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, r)| (k, (e - r).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn singular_values_match_nalgebra(m in matrix_strategy(6)) {
        let ours = svd(&m).unwrap();
        let mut reference: Vec<f64> = to_na(&m).singular_values().iter().copied().collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        prop_assert_eq!(ours.s.len(), reference.len());
        for (a, b) in ours.s.iter().zip(&reference) {
            prop_assert!((a - b).abs() < 1e-11 * (1.0 + b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn eigenvalues_match_nalgebra(m in square_strategy(8)) {
        let ours = eigenvalues(&m).unwrap();
        let reference: Vec<_> = to_na(&m).complex_eigenvalues().iter().copied().collect();
        let scale = 1.0 + m.frobenius_norm();
        // Defective clusters are ill conditioned; random draws rarely hit them.
        prop_assert!(spectrum_distance(&ours, &reference) < 1e-7 * scale);
    }

    #[test]
    fn char_poly_roots_are_eigenvalues(m in square_strategy(5)) {
        let coeffs = characteristic_polynomial(&m).unwrap();
        for lam in eigenvalues(&m).unwrap() {
            let p = coeffs.iter().fold(num_complex::Complex64::new(0.0, 0.0), |acc, c| acc * lam + c);
            let scale: f64 = coeffs.iter().enumerate()
                .map(|(k, c)| c.abs() * lam.norm().powi((coeffs.len() - 1 - k) as i32))
                .sum();
            prop_assert!(p.norm() <= 1e-8 * (1.0 + scale));
        }
    }
}

#[test]
fn large_block_structured_matrix() {
    // The 16x16 system matrices in the stability module have this shape.
    let n = 8;
    let mut c = DenseMatrix::zeros(2 * n, 2 * n);
    c.set_block(0, n, &DenseMatrix::identity(n));
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            d[(i, j)] = ((i * 7 + j * 3) % 5) as f64 - 2.0;
        }
    }
    c.set_block(n, 0, &d);
    c.set_block(n, n, &DenseMatrix::identity(n).scaled(-0.5));
    let ours = eigenvalues(&c).unwrap();
    let reference: Vec<_> = to_na(&c).complex_eigenvalues().iter().copied().collect();
    assert!(spectrum_distance(&ours, &reference) < 1e-8);
}
