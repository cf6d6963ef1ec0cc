//! Randomized-projection spectral decomposition of symmetric matrices.
//!
//! The dominant subspace of `G` is captured by a Gaussian sketch
//! `Y = G Ω` with `Ω` of width `rank + oversampling`, sharpened by power
//! iterations and orthonormalized into `Q`. The small projected matrix
//! `B = Qᵀ G Q` is diagonalized densely and its eigenvectors are lifted back
//! as `u = Q v`. For symmetric `G` the singular values of the sketch are the
//! eigenvalue magnitudes, so eigenpairs are ranked by `|λ|` and keep the sign
//! of the small decomposition.
//!
//! All products run row-parallel with a fixed reduction order; a given
//! [`SolverOptions`] (seed included) always produces a bit-identical
//! [`Spectrum`].

use alloc::vec::Vec;

use crate::linalg::{jacobi_eigen, orthonormalize, Matrix};
use crate::rng::SeededRng;

/// Relative symmetry tolerance accepted by [`eigs_sym`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

const POWER_SEED: u64 = 0x5eed_5eed_5eed_5eed;
const POWER_MAX_ITERS: usize = 10_000;
const POWER_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("rank {rank} plus oversampling {oversampling} exceeds matrix size {n}")]
    RankTooLarge {
        rank: usize,
        oversampling: usize,
        n: usize,
    },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |g[{i},{j}] - g[{j},{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("stable rank of a zero matrix is undefined")]
    ZeroMatrix,
}

/// Parameters of the randomized eigensolver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub rank: usize,
    pub oversampling: usize,
    pub power_iters: usize,
    pub seed: u64,
    /// Worker threads for the dense products; never changes the result.
    pub threads: usize,
}

impl SolverOptions {
    pub const DEFAULT_OVERSAMPLING: usize = 10;
    pub const DEFAULT_POWER_ITERS: usize = 2;

    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            oversampling: Self::DEFAULT_OVERSAMPLING,
            power_iters: Self::DEFAULT_POWER_ITERS,
            seed: 0,
            threads: 1,
        }
    }

    pub fn oversampling(mut self, p: usize) -> Self {
        self.oversampling = p;
        self
    }

    pub fn power_iters(mut self, q: usize) -> Self {
        self.power_iters = q;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    /// Width of the sketch, `rank + oversampling`.
    pub fn block_size(&self) -> usize {
        self.rank + self.oversampling
    }

    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        if self.rank == 0 {
            return Err(SolverError::ZeroRank);
        }
        if self.block_size() > n {
            return Err(SolverError::RankTooLarge {
                rank: self.rank,
                oversampling: self.oversampling,
                n,
            });
        }
        Ok(())
    }
}

/// Approximate leading eigenpairs of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Eigenvalues sorted by `|λ|` descending, positive first on ties.
    pub eigenvalues: Vec<f64>,
    /// `n × r` matrix whose column `k` is the unit eigenvector of
    /// `eigenvalues[k]`, signed so its largest-magnitude entry is positive.
    pub vectors: Matrix,
    /// `sqrt(max(0, ‖G‖_F² − Σ λ²))`, a cheap proxy for `‖G − U Λ Uᵀ‖_F`.
    pub resid: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `Σ λ² / max λ²` over the computed eigenvalues.
    pub fn stable_rank(&self) -> Result<f64, SolverError> {
        let top = self.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l * l));
        if top == 0.0 {
            return Err(SolverError::ZeroMatrix);
        }
        Ok(self.eigenvalues.iter().map(|l| l * l).sum::<f64>() / top)
    }

    /// Dense `U Λ Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.vectors.rows();
        let mut scaled = self.vectors.clone();
        for i in 0..n {
            for (k, &l) in self.eigenvalues.iter().enumerate() {
                scaled.set(i, k, scaled.get(i, k) * l);
            }
        }
        scaled.matmul(&self.vectors.transpose(), 1)
    }
}

fn check_square(g: &Matrix) -> Result<usize, SolverError> {
    if !g.is_square() {
        return Err(SolverError::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    Ok(g.rows())
}

fn check_symmetric(g: &Matrix) -> Result<(), SolverError> {
    if let Some((gap, i, j)) = g.asymmetry() {
        if gap > SYMMETRY_TOLERANCE * g.max_abs().max(1.0) {
            return Err(SolverError::NotSymmetric { i, j, gap });
        }
    }
    Ok(())
}

/// Gaussian test matrix `n × l`, filled row-major from [`SeededRng`].
pub fn gaussian_sketch(n: usize, l: usize, seed: u64) -> Matrix {
    let mut rng = SeededRng::new(seed);
    Matrix::from_fn(n, l, |_, _| rng.normal())
}

/// Orthonormal basis `Q` (`n × (rank + oversampling)`) of the dominant range
/// of `g`: `Y = G Ω`, then `power_iters` rounds of `Y ← G (G Y)` with
/// re-orthonormalization before each multiplication.
pub fn randomized_range(g: &Matrix, opts: &SolverOptions) -> Result<Matrix, SolverError> {
    let n = check_square(g)?;
    opts.validate(n)?;
    let omega = gaussian_sketch(n, opts.block_size(), opts.seed);
    let mut y = g.matmul(&omega, opts.threads);
    for _ in 0..opts.power_iters {
        let q = orthonormalize(&y);
        let w = orthonormalize(&g.matmul(&q, opts.threads));
        y = g.matmul(&w, opts.threads);
    }
    Ok(orthonormalize(&y))
}

/// Leading `opts.rank` eigenpairs of symmetric `g`, ranked by `|λ|`.
pub fn eigs_sym(g: &Matrix, opts: &SolverOptions) -> Result<Spectrum, SolverError> {
    let n = check_square(g)?;
    opts.validate(n)?;
    check_symmetric(g)?;

    let q = randomized_range(g, opts)?;
    let gq = g.matmul(&q, opts.threads);
    let b = q.transpose_matmul(&gq, opts.threads);
    let l = b.rows();
    let b = Matrix::from_fn(l, l, |i, j| 0.5 * (b.get(i, j) + b.get(j, i)));
    let (values, small_vecs) = jacobi_eigen(&b);

    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&x, &y| {
        let (a, b) = (values[x], values[y]);
        b.abs()
            .total_cmp(&a.abs())
            .then(b.total_cmp(&a))
            .then(x.cmp(&y))
    });
    order.truncate(opts.rank);

    let picked = Matrix::from_fn(l, order.len(), |i, k| small_vecs.get(i, order[k]));
    let mut vectors = q.matmul(&picked, opts.threads);
    for k in 0..order.len() {
        normalize_sign(&mut vectors, k);
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();

    let total = g.as_slice().iter().map(|v| v * v).sum::<f64>();
    let captured = eigenvalues.iter().map(|l| l * l).sum::<f64>();
    Ok(Spectrum {
        eigenvalues,
        vectors,
        resid: libm::sqrt((total - captured).max(0.0)),
    })
}

/// Flips column `k` so that its first largest-magnitude entry is positive.
fn normalize_sign(m: &mut Matrix, k: usize) {
    let mut best = (0.0f64, 0usize);
    for i in 0..m.rows() {
        let v = m.get(i, k).abs();
        if v > best.0 {
            best = (v, i);
        }
    }
    if m.get(best.1, k) < 0.0 {
        for i in 0..m.rows() {
            m.set(i, k, -m.get(i, k));
        }
    }
}

/// `‖G‖_S = max |λ|` of a symmetric matrix by power iteration from a fixed
/// seeded start vector, iterated until the estimate changes by less than
/// `1e-14` relative.
pub fn spectral_norm(g: &Matrix, threads: usize) -> Result<f64, SolverError> {
    let n = check_square(g)?;
    let mut v = gaussian_sketch(n, 1, POWER_SEED);
    let norm = v.frobenius_norm();
    v.as_mut_slice().iter_mut().for_each(|x| *x /= norm);

    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let mut w = g.matmul(&v, threads);
        let next = w.frobenius_norm();
        if next == 0.0 {
            return Ok(0.0);
        }
        w.as_mut_slice().iter_mut().for_each(|x| *x /= next);
        v = w;
        let converged = (next - estimate).abs() <= POWER_RTOL * next;
        estimate = next;
        if converged {
            break;
        }
    }
    Ok(estimate)
}

/// Stable rank `‖G‖_F² / ‖G‖_S²` of a symmetric matrix. The Frobenius norm
/// is exact; the spectral norm comes from [`spectral_norm`].
pub fn stable_rank(g: &Matrix) -> Result<f64, SolverError> {
    check_square(g)?;
    let fro2: f64 = g.as_slice().iter().map(|v| v * v).sum();
    if fro2 == 0.0 {
        return Err(SolverError::ZeroMatrix);
    }
    let s = spectral_norm(g, 1)?;
    Ok(fro2 / (s * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn orthonormality_defect(q: &Matrix) -> f64 {
        q.transpose_matmul(q, 1).sub(&Matrix::identity(q.cols())).max_abs()
    }

    #[test]
    fn identity_range_is_orthonormal() {
        let g = Matrix::identity(12);
        let q = randomized_range(&g, &SolverOptions::new(3).oversampling(2)).unwrap();
        assert_eq!((q.rows(), q.cols()), (12, 5));
        assert!(orthonormality_defect(&q) < 1e-12);
        // G restricted to span(Q) is reproduced exactly
        let gq = g.matmul(&q, 1);
        let back = q.matmul(&q.transpose_matmul(&gq, 1), 1);
        assert!(back.sub(&gq).max_abs() < 1e-12);
    }

    #[test]
    fn diagonal_range_contains_leading_axes() {
        let mut d = vec![0.0; 30];
        d[0] = 10.0;
        d[1] = 5.0;
        d[2] = 1.0;
        let g = Matrix::from_diagonal(&d);
        let q = randomized_range(&g, &SolverOptions::new(3).oversampling(5).seed(11)).unwrap();
        for axis in 0..3 {
            // distance of e_axis from span(Q)
            let coeffs: Vec<f64> = (0..q.cols()).map(|k| q.get(axis, k)).collect();
            let captured: f64 = coeffs.iter().map(|c| c * c).sum();
            let sin_angle = libm::sqrt((1.0 - captured).max(0.0));
            assert!(sin_angle < 1e-10, "axis {axis}: {sin_angle}");
        }
    }

    #[test]
    fn range_is_thread_invariant() {
        let g = Matrix::from_fn(40, 40, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let opts = SolverOptions::new(4).seed(9);
        let a = randomized_range(&g, &opts.threads(1)).unwrap();
        let b = randomized_range(&g, &opts.threads(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signed_diagonal_spectrum() {
        let g = Matrix::from_diagonal(&[3.0, -2.0, 1.0]);
        let s = eigs_sym(&g, &SolverOptions::new(2).oversampling(1)).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 2.0).abs() < 1e-12);
        assert!((s.vectors.get(0, 0) - 1.0).abs() < 1e-12);
        assert!((s.vectors.get(1, 1) - 1.0).abs() < 1e-12);
        assert!(s.vectors.get(2, 0).abs() < 1e-12 && s.vectors.get(2, 1).abs() < 1e-12);
    }

    #[test]
    fn rank_one() {
        let mut rng = SeededRng::new(5);
        let mut x: Vec<f64> = (0..25).map(|_| rng.normal()).collect();
        let nx = libm::sqrt(x.iter().map(|v| v * v).sum());
        x.iter_mut().for_each(|v| *v /= nx);
        let g = Matrix::from_fn(25, 25, |i, j| x[i] * x[j]);
        let s = eigs_sym(&g, &SolverOptions::new(1)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        let u = s.vector(0);
        let dot: f64 = u.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-12);
        assert!((stable_rank(&g).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stable_rank_examples() {
        assert!((stable_rank(&Matrix::identity(17)).unwrap() - 17.0).abs() < 1e-9);
        let st = stable_rank(&Matrix::from_diagonal(&[10.0, 5.0, 1.0])).unwrap();
        assert!((st - 1.26).abs() < 1e-9, "{st}");
        assert_eq!(stable_rank(&Matrix::zeros(4, 4)), Err(SolverError::ZeroMatrix));
    }

    #[test]
    fn option_errors() {
        let g = Matrix::identity(5);
        assert!(matches!(
            eigs_sym(&g, &SolverOptions::new(3)),
            Err(SolverError::RankTooLarge { .. })
        ));
        assert_eq!(eigs_sym(&g, &SolverOptions::new(0).oversampling(0)), Err(SolverError::ZeroRank));
        let mut asym = Matrix::identity(5);
        asym.set(0, 1, 0.5);
        assert!(matches!(
            eigs_sym(&asym, &SolverOptions::new(2).oversampling(0)),
            Err(SolverError::NotSymmetric { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            eigs_sym(&Matrix::zeros(3, 4), &SolverOptions::new(1)),
            Err(SolverError::NotSquare { .. })
        ));
    }
}
