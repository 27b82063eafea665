//! Cholesky factorizations: dense for reduced systems, banded for the
//! finite element matrices.

use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseMatrix;
use super::sparse::SparseSymMatrix;
use crate::error::{Error, Result};

/// Dense lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    /// Factorizes a symmetric positive definite matrix, reading the lower
    /// triangle only.
    pub fn new(a: &DenseMatrix, what: &'static str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                context: "cholesky",
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { what, pivot: j });
            }
            let djj = libm::sqrt(d);
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.l.nrows();
        for j in 0..n {
            b[j] /= self.l[(j, j)];
            let bj = b[j];
            let col = self.l.col(j);
            for i in (j + 1)..n {
                b[i] -= col[i] * bj;
            }
        }
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.l.nrows();
        for j in (0..n).rev() {
            let col = self.l.col(j);
            let mut s = b[j];
            for i in (j + 1)..n {
                s -= col[i] * b[i];
            }
            b[j] = s / col[j];
        }
    }

    /// Returns `L⁻¹ A L⁻ᵀ`, symmetrized.
    pub fn congruence_inverse(&self, a: &DenseMatrix) -> DenseMatrix {
        let n = self.l.nrows();
        // W = L⁻¹ A (column by column), then C = L⁻¹ Wᵀ = L⁻¹ A L⁻ᵀ.
        let mut w = a.clone();
        for j in 0..n {
            self.solve_lower_in_place(w.col_mut(j));
        }
        let mut c = w.transpose();
        for j in 0..n {
            self.solve_lower_in_place(c.col_mut(j));
        }
        c.symmetrize();
        c
    }
}

/// Banded Cholesky factor of a sparse SPD matrix; `L` stored row-wise over
/// the half bandwidth.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    // row i holds L[i][i-bw ..= i] at offsets 0..=bw
    rows: Vec<f64>,
}

impl BandedCholesky {
    pub fn new(a: &SparseSymMatrix, what: &'static str) -> Result<Self> {
        let n = a.dim();
        let bw = a.half_bandwidth();
        let w = bw + 1;
        let mut rows = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    rows[i * w + (j + bw - i)] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw).max(lo);
                let mut s = rows[i * w + (j + bw - i)];
                for k in jlo..j {
                    s -= rows[i * w + (k + bw - i)] * rows[j * w + (k + bw - j)];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { what, pivot: i });
                    }
                    rows[i * w + bw] = libm::sqrt(s);
                } else {
                    rows[i * w + (j + bw - i)] = s / rows[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, rows })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.rows[i * w..(i + 1) * w];
            let mut s = b[i];
            for k in lo..i {
                s -= row[k + bw - i] * b[k];
            }
            b[i] = s / row[bw];
        }
        for i in (0..n).rev() {
            b[i] /= self.rows[i * w + bw];
            let bi = b[i];
            let lo = i.saturating_sub(bw);
            let row = &self.rows[i * w..(i + 1) * w];
            for k in lo..i {
                b[k] -= row[k + bw - i] * bi;
            }
        }
    }
}
