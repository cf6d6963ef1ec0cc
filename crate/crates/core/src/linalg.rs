//! Small dense linear-algebra kit: a row-major matrix, row-parallel products,
//! Householder orthonormalization and a cyclic Jacobi symmetric eigensolver.

use alloc::vec;
use alloc::vec::Vec;

use crate::par::fill_chunks;

/// Dense row-major `f64` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Wraps row-major data. Panics if `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self - other`, elementwise. Panics on shape mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::from_row_major(self.rows, self.cols, data)
    }

    /// Product `self * rhs`, computed by row blocks on up to `threads`
    /// workers. Every output row is accumulated in the same fixed order, so the
    /// result does not depend on `threads`.
    pub fn matmul(&self, rhs: &Self, threads: usize) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let m = rhs.cols;
        let mut out = Self::zeros(self.rows, m);
        if m == 0 {
            return out;
        }
        let mut row_slices: Vec<&mut [f64]> = out.data.chunks_mut(m).collect();
        let _ = fill_chunks::<_, (), _>(&mut row_slices, threads, |offset, part| {
            for (k, out_row) in part.iter_mut().enumerate() {
                let lhs_row = self.row(offset + k);
                for (p, &a) in lhs_row.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (o, &b) in out_row.iter_mut().zip(rhs.row(p)) {
                        *o += a * b;
                    }
                }
            }
            Ok(())
        });
        drop(row_slices);
        out
    }

    /// Product `selfᵀ * rhs`.
    pub fn transpose_matmul(&self, rhs: &Self, threads: usize) -> Self {
        self.transpose().matmul(rhs, threads)
    }

    /// Largest `|a_ij - a_ji|`, or `None` when the matrix is not square.
    pub fn asymmetry(&self) -> Option<(f64, usize, usize)> {
        if !self.is_square() {
            return None;
        }
        let mut worst = (0.0, 0, 0);
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        Some(worst)
    }
}

/// Orthonormal basis of the column space of `y` (`n × l`, `n ≥ l`) via
/// Householder QR. Returns the thin `n × l` factor `Q`. Rank-deficient
/// columns still yield orthonormal (arbitrary) completions.
pub fn orthonormalize(y: &Matrix) -> Matrix {
    let (n, l) = (y.rows(), y.cols());
    assert!(n >= l, "orthonormalize needs at least as many rows as columns");
    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..l).map(|j| y.column(j)).collect();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(l);

    for k in 0..l {
        let x = &cols[k][k..];
        let norm = libm::sqrt(x.iter().map(|v| v * v).sum());
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = x.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|a| a * a).sum();
        if vnorm2 == 0.0 {
            reflectors.push(None);
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            apply_reflector(&v, vnorm2, &mut col[k..]);
        }
        reflectors.push(Some(v));
    }

    let mut q = Matrix::zeros(n, l);
    for j in 0..l {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (k, refl) in reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                let vnorm2: f64 = v.iter().map(|a| a * a).sum();
                apply_reflector(v, vnorm2, &mut e[k..]);
            }
        }
        for (i, val) in e.into_iter().enumerate() {
            q.set(i, j, val);
        }
    }
    q
}

#[inline]
fn apply_reflector(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let scale = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= scale * vi;
    }
}

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Returns unsorted eigenvalues and the matrix whose column `k` is
/// the eigenvector of eigenvalue `k`.
pub fn jacobi_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    assert!(a.is_square(), "jacobi_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * m.get(i, j))
            .sum();
        if libm::sqrt(off) <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }
    let values = (0..n).map(|i| m.get(i, i)).collect();
    (values, v)
}

fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m.get(k, p);
        let mkq = m.get(k, q);
        m.set(k, p, c * mkp - s * mkq);
        m.set(k, q, s * mkp + c * mkq);
    }
    for k in 0..n {
        let mpk = m.get(p, k);
        let mqk = m.get(q, k);
        m.set(p, k, c * mpk - s * mqk);
        m.set(q, k, s * mpk + c * mqk);
    }
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, c * vkp - s * vkq);
        v.set(k, q, s * vkp + c * vkq);
    }
}
