//! Dense eigendecomposition through nalgebra, independent of the in-crate
//! Jacobi solver, plus synthetic matrix generators.

#![allow(dead_code)]

use divscope_core::linalg::Matrix;
use divscope_core::rng::SeededRng;
use nalgebra::DMatrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// All eigenvalues of a symmetric matrix sorted by `|λ|` descending.
pub fn dense_eigenvalues(m: &Matrix) -> Vec<f64> {
    let mut vals: Vec<f64> = to_na(m).symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    vals
}

/// Best rank-`r` Frobenius error: the root of the tail `Σ λ²` beyond `r`.
pub fn optimal_error(m: &Matrix, r: usize) -> f64 {
    dense_eigenvalues(m)[r..].iter().map(|l| l * l).sum::<f64>().sqrt()
}

/// `Σ_k λ_k u_k u_kᵀ + noise · sym(N)` with random orthonormal `u_k`.
pub fn planted_low_rank(n: usize, eigenvalues: &[f64], noise: f64, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed);
    let raw = DMatrix::from_fn(n, eigenvalues.len(), |_, _| rng.normal());
    let q = raw.qr().q();
    let mut g = DMatrix::zeros(n, n);
    for (k, &l) in eigenvalues.iter().enumerate() {
        let u = q.column(k);
        g += l * &u * u.transpose();
    }
    if noise > 0.0 {
        let e = DMatrix::from_fn(n, n, |_, _| rng.normal());
        g += noise * 0.5 * (&e + e.transpose());
    }
    Matrix::from_fn(n, n, |i, j| g[(i, j)])
}

/// Pairwise Euclidean distances of the rows of `points`.
pub fn euclidean_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        }
    }
    // exact symmetry regardless of summation order
    for i in 0..n {
        for j in 0..i {
            d[i * n + j] = d[j * n + i];
        }
    }
    d
}
