//! Generalized symmetric-definite eigenproblems `A u = lambda M u`.
//!
//! Two routes share one contract (ascending values, M-orthonormal,
//! sign-fixed vectors):
//! * dense: Cholesky `M = L Lᵀ`, symmetric eigen of `L⁻¹ A L⁻ᵀ`;
//! * block Krylov: Rayleigh-Ritz on `span{X, A⁻¹M X, (A⁻¹M)² X, ...}` built
//!   M-orthonormally with a banded Cholesky of `A`, thick-restarted from the
//!   current Ritz block until every requested pair meets the residual bound.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::fem::AffineOperator;
use crate::linalg::dense::{axpy, dot, norm2, scale_vec};
use crate::linalg::{BandedCholesky, Cholesky, DenseMatrix, SparseSymMatrix, SymmetricEigen};

/// Relative residual the Krylov route iterates down to.
pub const KRYLOV_TOLERANCE: f64 = 1e-10;
/// Relative gap under which neighbouring eigenvalues are reported as a cluster.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;
/// Relative magnitude under which two entries compete for the sign pivot.
const SIGN_TIE_TOLERANCE: f64 = 1e-9;
/// Problems up to this size are always solved densely.
const DENSE_LIMIT: usize = 256;
const MAX_RESTARTS: usize = 60;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GevpMethod {
    /// Dense for small problems, Krylov otherwise (dense if `A` is not SPD).
    #[default]
    Auto,
    Dense,
    Krylov,
}

/// Ascending eigenpairs of one pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSet {
    pub mu: Vec<f64>,
    pub values: Vec<f64>,
    /// Eigenvectors as columns, M-orthonormal.
    pub vectors: DenseMatrix,
}

/// Worst-case invariant violations of an [`EigenSet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenCheck {
    pub orthonormality: f64,
    pub residual: f64,
}

impl EigenSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn space_dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// Eigenvector `i` (0-based).
    pub fn vector(&self, i: usize) -> &[f64] {
        self.vectors.col(i)
    }

    /// Measures `max |u_iᵀ M u_j - delta_ij|` and the largest relative residual
    /// `||A u - lambda M u|| / (lambda ||M u||)`.
    pub fn check(&self, a: &SparseSymMatrix, m: &SparseSymMatrix) -> EigenCheck {
        let k = self.len();
        let mu_vecs: Vec<Vec<f64>> = (0..k).map(|i| m.matvec(self.vector(i))).collect();
        let mut orth = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { 1.0 } else { 0.0 };
                orth = orth.max((dot(self.vector(i), &mu_vecs[j]) - target).abs());
            }
        }
        let mut res = 0.0f64;
        for (i, &lam) in self.values.iter().enumerate() {
            let mut r = a.matvec(self.vector(i));
            axpy(-lam, &mu_vecs[i], &mut r);
            res = res.max(norm2(&r) / (lam.abs() * norm2(&mu_vecs[i])));
        }
        EigenCheck {
            orthonormality: orth,
            residual: res,
        }
    }

    /// Index ranges of eigenvalues within [`CLUSTER_TOLERANCE`] of each other.
    pub fn clusters(&self) -> Vec<core::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.len() {
            let split = i == self.len() || {
                let (a, b) = (self.values[i - 1], self.values[i]);
                (b - a).abs() > CLUSTER_TOLERANCE * b.abs().max(a.abs())
            };
            if split {
                if i - start > 1 {
                    out.push(start..i);
                }
                start = i;
            }
        }
        out
    }
}

/// Flips each column so that its largest-magnitude entry is positive; entries
/// within a relative 1e-9 of the maximum count as tied and the lowest index
/// wins.
pub fn fix_signs(vectors: &mut DenseMatrix) {
    for j in 0..vectors.ncols() {
        let col = vectors.col_mut(j);
        let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if max == 0.0 {
            continue;
        }
        let pivot = col
            .iter()
            .position(|x| x.abs() >= max * (1.0 - SIGN_TIE_TOLERANCE))
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            scale_vec(col, -1.0);
        }
    }
}

/// `k` smallest eigenpairs of the sparse pencil `(A, M)`.
pub fn solve_gevp(a: &SparseSymMatrix, m: &SparseSymMatrix, k: usize) -> Result<EigenSet> {
    solve_gevp_with(a, m, k, GevpMethod::Auto)
}

pub fn solve_gevp_with(a: &SparseSymMatrix, m: &SparseSymMatrix, k: usize, method: GevpMethod) -> Result<EigenSet> {
    let n = a.dim();
    if m.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "mass matrix",
            expected: n,
            found: m.dim(),
        });
    }
    if k == 0 || k > n {
        return Err(Error::DimensionMismatch {
            context: "requested eigenpairs (1..=n)",
            expected: n,
            found: k,
        });
    }
    let (values, mut vectors) = match method {
        GevpMethod::Dense => dense_route(&a.to_dense(), &m.to_dense(), k)?,
        GevpMethod::Krylov => krylov_route(a, m, k)?,
        GevpMethod::Auto if n <= DENSE_LIMIT => dense_route(&a.to_dense(), &m.to_dense(), k)?,
        GevpMethod::Auto => match krylov_route(a, m, k) {
            Err(Error::NotPositiveDefinite { what: "stiffness", .. }) => dense_route(&a.to_dense(), &m.to_dense(), k)?,
            other => other?,
        },
    };
    fix_signs(&mut vectors);
    Ok(EigenSet {
        mu: Vec::new(),
        values,
        vectors,
    })
}

/// `k` smallest eigenpairs of a dense pencil; vectors M-orthonormal and
/// sign-fixed.
pub fn solve_dense_gevp(a: &DenseMatrix, m: &DenseMatrix, k: usize) -> Result<(Vec<f64>, DenseMatrix)> {
    if !a.is_square() || a.nrows() != m.nrows() || !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "dense pencil",
            expected: a.nrows(),
            found: m.nrows(),
        });
    }
    if k == 0 || k > a.nrows() {
        return Err(Error::DimensionMismatch {
            context: "requested eigenpairs (1..=n)",
            expected: a.nrows(),
            found: k,
        });
    }
    let (values, mut vectors) = dense_route(a, m, k)?;
    fix_signs(&mut vectors);
    Ok((values, vectors))
}

fn dense_route(a: &DenseMatrix, m: &DenseMatrix, k: usize) -> Result<(Vec<f64>, DenseMatrix)> {
    let chol = Cholesky::new(m, "mass")?;
    let c = chol.congruence_inverse(a);
    let eig = SymmetricEigen::new(&c)?;
    let mut vectors = eig.vectors.leading_columns(k);
    for j in 0..k {
        chol.solve_upper_in_place(vectors.col_mut(j));
    }
    Ok((eig.values[..k].to_vec(), vectors))
}

/// M-orthonormal basis under construction, with `M q` cached per column.
struct MBasis {
    q: Vec<Vec<f64>>,
    mq: Vec<Vec<f64>>,
}

impl MBasis {
    fn new() -> Self {
        Self {
            q: Vec::new(),
            mq: Vec::new(),
        }
    }

    /// Two rounds of classical Gram-Schmidt in the M-inner product; returns
    /// `false` (and drops the vector) when it is numerically dependent.
    fn push(&mut self, mut v: Vec<f64>, m: &SparseSymMatrix) -> bool {
        let mut mv = m.matvec(&v);
        let before = libm::sqrt(dot(&v, &mv).max(0.0));
        if !(before > 0.0) {
            return false;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = self.mq.iter().map(|mq| dot(mq, &v)).collect();
            for (c, q) in coeffs.iter().zip(&self.q) {
                axpy(-c, q, &mut v);
            }
            m.matvec_into(&v, &mut mv);
        }
        let after = libm::sqrt(dot(&v, &mv).max(0.0));
        if !(after > 1e-13 * before) {
            return false;
        }
        scale_vec(&mut v, 1.0 / after);
        scale_vec(&mut mv, 1.0 / after);
        self.q.push(v);
        self.mq.push(mv);
        true
    }

    fn len(&self) -> usize {
        self.q.len()
    }
}

fn start_block(n: usize, p: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15 ^ n as u64);
    (0..p)
        .map(|_| {
            (0..n)
                .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) - 0.5)
                .collect()
        })
        .collect()
}

fn krylov_route(a: &SparseSymMatrix, m: &SparseSymMatrix, k: usize) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.dim();
    // Both factorizations double as definiteness checks.
    BandedCholesky::new(m, "mass")?;
    let solver = BandedCholesky::new(a, "stiffness")?;
    let p = (k + k.max(6)).min(n);
    let max_basis = n.min((6 * p).max(60));

    let mut block = start_block(n, p);
    for _restart in 0..MAX_RESTARTS {
        let mut basis = MBasis::new();
        loop {
            let first_new = basis.len();
            for v in block.drain(..) {
                if basis.len() >= max_basis {
                    break;
                }
                basis.push(v, m);
            }
            let added = basis.len() - first_new;
            if added == 0 || basis.len() >= max_basis {
                break;
            }
            block = basis.mq[first_new..]
                .iter()
                .map(|mq| {
                    let mut w = mq.clone();
                    solver.solve_in_place(&mut w);
                    w
                })
                .collect();
        }
        let s = basis.len();
        if s < k {
            return Err(Error::NotConverged {
                what: "block Krylov basis (space exhausted)",
                iterations: s,
            });
        }

        let aq: Vec<Vec<f64>> = basis.q.iter().map(|q| a.matvec(q)).collect();
        let mut h = DenseMatrix::zeros(s, s);
        for j in 0..s {
            for i in 0..=j {
                let v = dot(&basis.q[i], &aq[j]);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h.symmetrize();
        let ritz = SymmetricEigen::new(&h)?;

        let keep = p.min(s);
        let mut xs = Vec::with_capacity(keep);
        let mut converged = true;
        for i in 0..keep {
            let y = ritz.vectors.col(i);
            let mut x = vec![0.0; n];
            for (j, &yj) in y.iter().enumerate() {
                axpy(yj, &basis.q[j], &mut x);
            }
            if i < k {
                let theta = ritz.values[i];
                let mut r = vec![0.0; n];
                let mut mx = vec![0.0; n];
                for (j, &yj) in y.iter().enumerate() {
                    axpy(yj, &aq[j], &mut r);
                    axpy(yj, &basis.mq[j], &mut mx);
                }
                axpy(-theta, &mx, &mut r);
                let rel = norm2(&r) / (theta.abs() * norm2(&mx));
                if !(rel <= KRYLOV_TOLERANCE) {
                    converged = false;
                }
            }
            xs.push(x);
        }
        if converged {
            let mut vectors = DenseMatrix::zeros(n, k);
            for (j, x) in xs.iter().take(k).enumerate() {
                let mx = m.matvec(x);
                let nrm = libm::sqrt(dot(x, &mx));
                for (dst, src) in vectors.col_mut(j).iter_mut().zip(x) {
                    *dst = src / nrm;
                }
            }
            return Ok((ritz.values[..k].to_vec(), vectors));
        }
        block = xs;
    }
    Err(Error::NotConverged {
        what: "block Krylov eigensolver",
        iterations: MAX_RESTARTS,
    })
}

/// High-fidelity solve of the affine problem at one parameter.
pub fn solve_at(op: &AffineOperator, mu: &[f64], k: usize) -> Result<EigenSet> {
    let (a, m) = op.evaluate(mu)?;
    let mut set = solve_gevp(&a, &m, k).map_err(|e| Error::at(mu, e))?;
    set.mu = mu.to_vec();
    Ok(set)
}

/// One independent solve per parameter, in input order.
pub fn sweep_hifi(op: &AffineOperator, mus: &[Vec<f64>], k: usize) -> Result<Vec<EigenSet>> {
    mus.iter().map(|mu| solve_at(op, mu, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> SparseSymMatrix {
        SparseSymMatrix::from_dense(&DenseMatrix::diagonal(vals))
    }

    #[test]
    fn diagonal_pencil() {
        let set = solve_gevp(&diag(&[2.0, 1.0]), &diag(&[1.0, 1.0]), 2).unwrap();
        assert_eq!(set.values, vec![1.0, 2.0]);
        assert_eq!(set.vectors, DenseMatrix::from_row_major(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn scalar_pencil() {
        let set = solve_gevp(&diag(&[4.0]), &diag(&[0.125]), 1).unwrap();
        assert!((set.values[0] - 32.0).abs() < 1e-13);
        assert!((set.vectors[(0, 0)] - 1.0 / 0.125f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn errors() {
        let a = diag(&[1.0, 2.0]);
        assert!(matches!(solve_gevp(&a, &diag(&[1.0, -1.0]), 1), Err(Error::NotPositiveDefinite { what: "mass", .. })));
        assert!(matches!(solve_gevp(&a, &diag(&[1.0, 1.0]), 3), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(solve_gevp(&a, &diag(&[1.0, 1.0]), 0), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(solve_gevp(&a, &diag(&[1.0]), 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sign_convention() {
        let mut v = DenseMatrix::from_row_major(3, 2, &[0.1, -0.5, -0.9, 0.5, 0.3, 0.2]);
        fix_signs(&mut v);
        assert_eq!(v.col(0), &[-0.1, 0.9, -0.3]);
        // tie between -0.5 and 0.5: lowest index decides
        assert_eq!(v.col(1), &[0.5, -0.5, -0.2]);
    }

    #[test]
    fn krylov_agrees_with_dense_on_random_banded_pencil() {
        let n = 300;
        let mut a_entries = Vec::new();
        let mut m_entries = Vec::new();
        for i in 0..n {
            a_entries.push((i, i, 2.5 + 0.01 * i as f64));
            m_entries.push((i, i, 1.0 + 0.3 * ((i * 7) % 5) as f64));
            if i + 1 < n {
                a_entries.push((i, i + 1, -1.0));
                m_entries.push((i, i + 1, 0.1));
            }
            if i + 9 < n {
                a_entries.push((i, i + 9, -0.2));
            }
        }
        let a = SparseSymMatrix::from_upper_triplets(n, &a_entries);
        let m = SparseSymMatrix::from_upper_triplets(n, &m_entries);
        let d = solve_gevp_with(&a, &m, 6, GevpMethod::Dense).unwrap();
        let kr = solve_gevp_with(&a, &m, 6, GevpMethod::Krylov).unwrap();
        for (x, y) in d.values.iter().zip(&kr.values) {
            assert!((x - y).abs() <= 1e-11 * x.abs(), "{x} vs {y}");
        }
        for ch in [d.check(&a, &m), kr.check(&a, &m)] {
            assert!(ch.orthonormality < 1e-10 && ch.residual < 1e-9, "{ch:?}");
        }
        for j in 0..6 {
            let diff = d.vector(j).iter().zip(kr.vector(j)).fold(0.0f64, |s, (p, q)| s.max((p - q).abs()));
            assert!(diff < 1e-7, "vector {j} differs by {diff}");
        }
    }

    #[test]
    fn clusters_are_reported() {
        let set = EigenSet {
            mu: vec![],
            values: vec![1.0, 2.0, 2.0 + 1e-12, 3.0],
            vectors: DenseMatrix::zeros(4, 4),
        };
        assert_eq!(set.clusters(), vec![1..3]);
    }
}
