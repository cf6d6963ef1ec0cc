//! Parallel construction of dense alignment-distance matrices.
//!
//! For a single read set only the strict upper triangle is aligned
//! (`n(n-1)/2` pairs) and mirrored. The pair index space is cut into
//! contiguous chunks, one per worker, and each worker writes its own disjoint
//! slice of the output, so the matrix is identical for every thread count.

use alloc::vec;
use alloc::vec::Vec;

use crate::align::{distance, AlignError, ScoringScheme};
use crate::par::fill_chunks;
use crate::seqio::ReadSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("alignment of pair ({i}, {j}) failed: {source}")]
    Align {
        i: usize,
        j: usize,
        #[source]
        source: AlignError,
    },
    #[error("need at least {needed} reads, got {got}")]
    TooFewReads { needed: usize, got: usize },
    #[error("matrix data has {len} values, expected {rows}x{cols}")]
    Shape { rows: usize, cols: usize, len: usize },
    #[error("entry ({i}, {j}) = {value} is negative or not finite")]
    BadValue { i: usize, j: usize, value: f64 },
    #[error("symmetric matrix violates symmetry or zero diagonal at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
}

/// Dense row-major `rows × cols` distance matrix. Row `i` and column `j`
/// follow the order of the read sets it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    symmetric: bool,
}

impl DistanceMatrix {
    /// Validates and wraps row-major values. Symmetric matrices must be
    /// square, exactly symmetric and zero on the diagonal.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, symmetric: bool) -> Result<Self, DistError> {
        if values.len() != rows * cols || (symmetric && rows != cols) {
            return Err(DistError::Shape {
                rows,
                cols,
                len: values.len(),
            });
        }
        for (k, &value) in values.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(DistError::BadValue {
                    i: k / cols,
                    j: k % cols,
                    value,
                });
            }
        }
        if symmetric {
            for i in 0..rows {
                if values[i * cols + i] != 0.0 {
                    return Err(DistError::Asymmetric { i, j: i });
                }
                for j in i + 1..cols {
                    if values[i * cols + j] != values[j * cols + i] {
                        return Err(DistError::Asymmetric { i, j });
                    }
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            values,
            symmetric,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Number of unordered pairs among `n` items.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `(i, j)` of the `k`-th pair in row-major upper-triangle order.
fn pair_at(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// Fills an `n × n` symmetric matrix by calling `dist(i, j)` exactly once
/// for every `i < j`.
pub fn pairwise_self_with<E, F>(n: usize, threads: usize, dist: F) -> Result<DistanceMatrix, E>
where
    E: Send,
    F: Fn(usize, usize) -> Result<f64, E> + Sync,
{
    let mut upper = vec![0.0f64; pair_count(n)];
    fill_chunks(&mut upper, threads, |offset, part| {
        if part.is_empty() {
            return Ok(());
        }
        let (mut i, mut j) = pair_at(n, offset);
        for slot in part.iter_mut() {
            *slot = dist(i, j)?;
            j += 1;
            if j == n {
                i += 1;
                j = i + 1;
            }
        }
        Ok(())
    })?;

    let mut values = vec![0.0f64; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            values[i * n + j] = upper[k];
            values[j * n + i] = upper[k];
            k += 1;
        }
    }
    Ok(DistanceMatrix {
        rows: n,
        cols: n,
        values,
        symmetric: true,
    })
}

/// Fills an `m × n` matrix with `dist(i, j)` for every cell.
pub fn pairwise_cross_with<E, F>(m: usize, n: usize, threads: usize, dist: F) -> Result<DistanceMatrix, E>
where
    E: Send,
    F: Fn(usize, usize) -> Result<f64, E> + Sync,
{
    let mut values = vec![0.0f64; m * n];
    fill_chunks(&mut values, threads, |offset, part| {
        for (k, slot) in part.iter_mut().enumerate() {
            let idx = offset + k;
            *slot = dist(idx / n, idx % n)?;
        }
        Ok(())
    })?;
    Ok(DistanceMatrix {
        rows: m,
        cols: n,
        values,
        symmetric: false,
    })
}

/// All-pairs alignment distances within one read set.
pub fn pairwise_self(rs: &ReadSet, scheme: &ScoringScheme, threads: usize) -> Result<DistanceMatrix, DistError> {
    if rs.len() < 2 {
        return Err(DistError::TooFewReads {
            needed: 2,
            got: rs.len(),
        });
    }
    let reads = rs.reads();
    pairwise_self_with(reads.len(), threads, |i, j| {
        distance(reads[i].sequence(), reads[j].sequence(), scheme)
            .map(f64::from)
            .map_err(|source| DistError::Align { i, j, source })
    })
}

/// Distances from every query (rows) to every reference (columns).
pub fn pairwise_cross(
    queries: &ReadSet,
    refs: &ReadSet,
    scheme: &ScoringScheme,
    threads: usize,
) -> Result<DistanceMatrix, DistError> {
    for set in [queries, refs] {
        if set.is_empty() {
            return Err(DistError::TooFewReads { needed: 1, got: 0 });
        }
    }
    let (q, r) = (queries.reads(), refs.reads());
    pairwise_cross_with(q.len(), r.len(), threads, |i, j| {
        distance(q[i].sequence(), r[j].sequence(), scheme)
            .map(f64::from)
            .map_err(|source| DistError::Align { i, j, source })
    })
}
