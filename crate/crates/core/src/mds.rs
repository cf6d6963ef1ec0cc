//! Classical multidimensional scaling.
//!
//! Squared distances are double-centered into the Gram matrix
//!
//! ```text
//! γ_ij = -½ (d_ij² - mean_k d_ik² - mean_k d_kj² + mean_kl d_kl²)
//! ```
//!
//! whose leading eigenpairs give the coordinates `X = U Σ`, `Σ = Λ^½`.
//! Distance matrices that are not Euclidean produce negative eigenvalues;
//! those directions are dropped and their mass is reported.

use alloc::vec;
use alloc::vec::Vec;

use crate::distmat::DistanceMatrix;
use crate::linalg::Matrix;
use crate::par::fill_chunks;
use crate::rsvd::{eigs_sym, SolverError, SolverOptions, Spectrum};

/// Eigenvalues at or below this fraction of `max |λ|` are treated as zero.
pub const POSITIVITY_CUTOFF: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MdsError {
    #[error("distance matrix is not symmetric")]
    NotSymmetric,
    #[error("rank {rank} is out of range for {n} points")]
    RankTooLarge { rank: usize, n: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("Gram matrix has {gram} points but embedding has {embedding}")]
    DimensionMismatch { gram: usize, embedding: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Double-centered inner-product matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    matrix: Matrix,
}

impl GramMatrix {
    /// Wraps an existing symmetric matrix.
    pub fn from_matrix(matrix: Matrix) -> Result<Self, MdsError> {
        if !matrix.is_square() {
            return Err(MdsError::NotSymmetric);
        }
        Ok(Self { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

/// Point-cloud coordinates: row `i` is `x_i`, column `α` is `u_α √λ_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: Matrix,
    /// Retained eigenvalues, strictly positive and descending.
    pub eigenvalues: Vec<f64>,
    /// `Σ |λ|` over the negative eigenvalues among those computed.
    pub dropped_negative_mass: f64,
    /// Rank asked for; larger than [`Embedding::rank`] when truncated.
    pub requested_rank: usize,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.rows()
    }

    pub fn rank(&self) -> usize {
        self.coords.cols()
    }

    /// Fewer positive eigenvalues than requested were available.
    pub fn is_truncated(&self) -> bool {
        self.rank() < self.requested_rank
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.coords.row(i)
    }

    /// Builds an embedding from coordinates alone, estimating each
    /// eigenvalue as the squared norm of its column.
    pub fn from_coords(coords: Matrix) -> Self {
        let eigenvalues = (0..coords.cols())
            .map(|k| coords.column(k).iter().map(|v| v * v).sum())
            .collect();
        let requested_rank = coords.cols();
        Self {
            coords,
            eigenvalues,
            dropped_negative_mass: 0.0,
            requested_rank,
        }
    }
}

/// Double-centers the squared distances of a symmetric matrix. Squares are
/// taken on the fly from the upper triangle, so no `D²` is stored.
pub fn gram_from_distances(d: &DistanceMatrix, threads: usize) -> Result<GramMatrix, MdsError> {
    if !d.is_symmetric() || d.rows() != d.cols() {
        return Err(MdsError::NotSymmetric);
    }
    let n = d.rows();
    let sq = |i: usize, j: usize| {
        let v = if i <= j { d.get(i, j) } else { d.get(j, i) };
        v * v
    };

    let mut row_means = vec![0.0f64; n];
    let _ = fill_chunks::<_, (), _>(&mut row_means, threads, |offset, part| {
        for (k, m) in part.iter_mut().enumerate() {
            let i = offset + k;
            *m = (0..n).map(|j| sq(i, j)).sum::<f64>() / n as f64;
        }
        Ok(())
    });
    let grand = row_means.iter().sum::<f64>() / n as f64;

    let mut values = vec![0.0f64; n * n];
    let mut rows: Vec<&mut [f64]> = values.chunks_mut(n.max(1)).collect();
    let _ = fill_chunks::<_, (), _>(&mut rows, threads, |offset, part| {
        for (k, row) in part.iter_mut().enumerate() {
            let i = offset + k;
            for (j, g) in row.iter_mut().enumerate() {
                *g = -0.5 * (sq(i, j) - row_means[i] - row_means[j] + grand);
            }
        }
        Ok(())
    });
    drop(rows);
    Ok(GramMatrix {
        matrix: Matrix::from_row_major(n, n, values),
    })
}

/// Embeds `g` in (at most) `rank` dimensions using the randomized
/// eigensolver configured by `opts`. See [`embedding_spectrum`] and
/// [`embedding_from_spectrum`] for the two halves.
pub fn embed(g: &GramMatrix, rank: usize, opts: &SolverOptions) -> Result<Embedding, MdsError> {
    let spectrum = embedding_spectrum(g, rank, opts)?;
    Ok(embedding_from_spectrum(&spectrum, rank))
}

/// Leading `rank` eigenpairs of `g` by `|λ|`. The `rank` field of `opts` is
/// overridden and its oversampling is clamped to `n - rank`.
pub fn embedding_spectrum(g: &GramMatrix, rank: usize, opts: &SolverOptions) -> Result<Spectrum, MdsError> {
    let n = g.n();
    if rank == 0 {
        return Err(MdsError::ZeroRank);
    }
    if rank > n {
        return Err(MdsError::RankTooLarge { rank, n });
    }
    let opts = SolverOptions {
        rank,
        oversampling: opts.oversampling.min(n - rank),
        ..*opts
    };
    Ok(eigs_sym(&g.matrix, &opts)?)
}

/// Keeps the eigenpairs with `λ > 1e-9 · max |λ|` and scales each vector by
/// `√λ`. Negative eigenvalues are summed into `dropped_negative_mass`.
pub fn embedding_from_spectrum(spectrum: &Spectrum, requested_rank: usize) -> Embedding {
    let n = spectrum.vectors.rows();
    let top = spectrum.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cutoff = POSITIVITY_CUTOFF * top;
    let dropped_negative_mass = spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l < 0.0)
        .map(|l| l.abs())
        .sum();

    let kept: Vec<usize> = (0..spectrum.len())
        .filter(|&k| top > 0.0 && spectrum.eigenvalues[k] > cutoff)
        .collect();
    let eigenvalues: Vec<f64> = kept.iter().map(|&k| spectrum.eigenvalues[k]).collect();
    let scales: Vec<f64> = eigenvalues.iter().map(|&l| libm::sqrt(l)).collect();
    let coords = Matrix::from_fn(n, kept.len(), |i, a| spectrum.vectors.get(i, kept[a]) * scales[a]);

    Embedding {
        coords,
        eigenvalues,
        dropped_negative_mass,
        requested_rank,
    }
}

/// `‖G − X Xᵀ‖_F` for an embedding of `g`.
pub fn reconstruction_error(g: &GramMatrix, e: &Embedding) -> Result<f64, MdsError> {
    if g.n() != e.n() {
        return Err(MdsError::DimensionMismatch {
            gram: g.n(),
            embedding: e.n(),
        });
    }
    let n = g.n();
    let mut total = 0.0;
    for i in 0..n {
        let xi = e.point(i);
        for j in 0..n {
            let dot: f64 = xi.iter().zip(e.point(j)).map(|(a, b)| a * b).sum();
            let diff = g.get(i, j) - dot;
            total += diff * diff;
        }
    }
    Ok(libm::sqrt(total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn euclidean(points: &Matrix) -> DistanceMatrix {
        let n = points.rows();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2: f64 = points.row(i).iter().zip(points.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                v[i * n + j] = libm::sqrt(d2);
            }
        }
        DistanceMatrix::new(n, n, v, true).unwrap()
    }

    #[test]
    fn two_points() {
        let d = DistanceMatrix::new(2, 2, vec![0., 2., 2., 0.], true).unwrap();
        let g = gram_from_distances(&d, 1).unwrap();
        assert_eq!(g.as_matrix().as_slice(), &[1., -1., -1., 1.]);
        let e = embed(&g, 1, &SolverOptions::new(1)).unwrap();
        assert_eq!(e.rank(), 1);
        assert!((e.eigenvalues[0] - 2.0).abs() < 1e-12);
        // (+1, -1) up to a global sign
        let (x0, x1) = (e.point(0)[0], e.point(1)[0]);
        assert!((x0.abs() - 1.0).abs() < 1e-12);
        assert!((x0 + x1).abs() < 1e-12);
    }

    #[test]
    fn zero_distances() {
        let d = DistanceMatrix::new(4, 4, vec![0.; 16], true).unwrap();
        let g = gram_from_distances(&d, 2).unwrap();
        assert!(g.as_matrix().as_slice().iter().all(|&v| v == 0.0));
        let e = embed(&g, 3, &SolverOptions::new(3)).unwrap();
        assert_eq!(e.rank(), 0);
        assert!(e.is_truncated());
        assert_eq!(e.dropped_negative_mass, 0.0);
        assert_eq!(reconstruction_error(&g, &e).unwrap(), 0.0);
    }

    #[test]
    fn rejects_rectangular_and_bad_rank() {
        let d = DistanceMatrix::new(1, 2, vec![1., 2.], false).unwrap();
        assert_eq!(gram_from_distances(&d, 1), Err(MdsError::NotSymmetric));
        let g = gram_from_distances(&DistanceMatrix::new(2, 2, vec![0., 1., 1., 0.], true).unwrap(), 1).unwrap();
        assert_eq!(embed(&g, 3, &SolverOptions::new(3)), Err(MdsError::RankTooLarge { rank: 3, n: 2 }));
        assert_eq!(embed(&g, 0, &SolverOptions::new(1)), Err(MdsError::ZeroRank));
    }

    #[test]
    fn gram_rows_sum_to_zero_and_thread_invariant() {
        let mut rng = SeededRng::new(1);
        let pts = Matrix::from_fn(30, 4, |_, _| rng.normal() * 3.0);
        let d = euclidean(&pts);
        let g1 = gram_from_distances(&d, 1).unwrap();
        let g5 = gram_from_distances(&d, 5).unwrap();
        assert_eq!(g1, g5);
        for i in 0..30 {
            let s: f64 = (0..30).map(|j| g1.get(i, j)).sum();
            assert!(s.abs() < 1e-8 * 30.0);
            for j in 0..30 {
                assert!((g1.get(i, j) - g1.get(j, i)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn column_norms_match_eigenvalues() {
        let mut rng = SeededRng::new(2);
        let pts = Matrix::from_fn(60, 3, |_, _| rng.normal());
        let g = gram_from_distances(&euclidean(&pts), 1).unwrap();
        let e = embed(&g, 3, &SolverOptions::new(3).seed(4)).unwrap();
        for (a, &l) in e.eigenvalues.iter().enumerate() {
            let norm2: f64 = e.coords.column(a).iter().map(|v| v * v).sum();
            assert!((norm2 / l - 1.0).abs() <= 1e-6);
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] > w[1]));
        let err = reconstruction_error(&g, &e).unwrap();
        assert!(err <= 1e-8 * g.as_matrix().frobenius_norm());
    }

    #[test]
    fn star_metric_drops_negative_direction() {
        // centre at distance 1 from three leaves that are 2 apart pairwise
        let d = DistanceMatrix::new(
            4,
            4,
            vec![0., 1., 1., 1., 1., 0., 2., 2., 1., 2., 0., 2., 1., 2., 2., 0.],
            true,
        )
        .unwrap();
        let g = gram_from_distances(&d, 1).unwrap();
        let e = embed(&g, 4, &SolverOptions::new(4)).unwrap();
        assert!(e.dropped_negative_mass > 0.0);
        assert!(e.eigenvalues.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let g = GramMatrix::from_matrix(Matrix::identity(3)).unwrap();
        let e = Embedding::from_coords(Matrix::zeros(2, 1));
        assert_eq!(
            reconstruction_error(&g, &e),
            Err(MdsError::DimensionMismatch { gram: 3, embedding: 2 })
        );
        // r = 0 embedding leaves all of G
        let e0 = Embedding::from_coords(Matrix::zeros(3, 0));
        assert!((reconstruction_error(&g, &e0).unwrap() - libm::sqrt(3.0)).abs() < 1e-15);
    }
}
