//! Galerkin reduced-order eigenproblem on a POD space.
//!
//! [`OnlineRom`] holds only `N x N` matrices, so evaluating it never touches
//! a high-fidelity dimension. [`RomSystem`] pairs it with the basis needed to
//! lift reduced eigenvectors back.

use alloc::vec::Vec;

use crate::eigensolve::{fix_signs, solve_dense_gevp, EigenSet};
use crate::error::{Error, Result};
use crate::fem::{AffineOperator, Coefficient, ProblemDef};
use crate::linalg::dense::scale_vec;
use crate::linalg::{DenseMatrix, SparseSymMatrix};
use crate::pod::PodBasis;

/// Reduced eigenpairs: values ascending, coefficient vectors `M_N`-orthonormal.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedEigen {
    pub mu: Vec<f64>,
    pub values: Vec<f64>,
    pub coeffs: DenseMatrix,
}

#[derive(Clone, Debug)]
pub struct OnlineRom {
    pub problem: ProblemDef,
    pub stiffness: Vec<(DenseMatrix, Coefficient)>,
    pub mass: Vec<(DenseMatrix, Coefficient)>,
    /// `sigma_N / sigma_1` of the basis this was projected from.
    pub sigma_ratio: f64,
}

fn combine(terms: &[(DenseMatrix, Coefficient)], mu: &[f64]) -> DenseMatrix {
    let n = terms[0].0.nrows();
    let mut out = DenseMatrix::zeros(n, n);
    for (m, c) in terms {
        out.add_scaled(c.at(mu), m);
    }
    out
}

impl OnlineRom {
    pub fn dim(&self) -> usize {
        self.stiffness[0].0.nrows()
    }

    /// `(A_N(mu), M_N(mu))`.
    pub fn matrices_at(&self, mu: &[f64]) -> Result<(DenseMatrix, DenseMatrix)> {
        self.problem.check_admissible(mu)?;
        Ok((combine(&self.stiffness, mu), combine(&self.mass, mu)))
    }

    /// `k <= N` smallest reduced eigenpairs.
    pub fn solve(&self, mu: &[f64], k: usize) -> Result<ReducedEigen> {
        let (a, m) = self.matrices_at(mu)?;
        let (values, coeffs) = solve_dense_gevp(&a, &m, k).map_err(|e| match e {
            Error::NotPositiveDefinite { what: "mass", .. } => Error::ReducedMassNotSpd {
                relative_sigma_tail: self.sigma_ratio,
            },
            other => Error::at(mu, other),
        })?;
        Ok(ReducedEigen {
            mu: mu.to_vec(),
            values,
            coeffs,
        })
    }

    /// Leading `n x n` blocks of every reduced matrix.
    pub fn truncated(&self, n: usize, sigma_ratio: f64) -> Result<Self> {
        if n == 0 || n > self.dim() {
            return Err(Error::invalid("reduced truncation outside 1..=N"));
        }
        let cut = |terms: &[(DenseMatrix, Coefficient)]| terms.iter().map(|(m, c)| (m.leading_block(n), *c)).collect();
        Ok(Self {
            problem: self.problem.clone(),
            stiffness: cut(&self.stiffness),
            mass: cut(&self.mass),
            sigma_ratio,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RomSystem {
    pub online: OnlineRom,
    pub basis: PodBasis,
}

fn sigma_ratio(basis: &PodBasis) -> f64 {
    let s = &basis.singular_values;
    s[basis.dim() - 1] / s[0]
}

impl RomSystem {
    /// `V^T A_h^k V` and `V^T M_h^k V` for every affine term.
    pub fn project(op: &AffineOperator, basis: &PodBasis) -> Result<Self> {
        if basis.space_dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                context: "basis rows vs high-fidelity dimension",
                expected: op.dim(),
                found: basis.space_dim(),
            });
        }
        if basis.dim() == 0 {
            return Err(Error::RankZero);
        }
        let v = &basis.vectors;
        let reduce = |terms: &[(SparseSymMatrix, Coefficient)]| terms.iter().map(|(m, c)| (m.congruence(v), *c)).collect();
        Ok(Self {
            online: OnlineRom {
                problem: op.problem.clone(),
                stiffness: reduce(&op.stiffness_terms),
                mass: reduce(&op.mass_terms),
                sigma_ratio: sigma_ratio(basis),
            },
            basis: basis.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.online.dim()
    }

    /// Same system on the first `n` basis vectors, without re-projecting.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        let basis = crate::pod::truncate(&self.basis, n)?;
        let online = self.online.truncated(n, sigma_ratio(&basis))?;
        Ok(Self { online, basis })
    }

    pub fn solve(&self, mu: &[f64], k: usize) -> Result<ReducedEigen> {
        self.online.solve(mu, k)
    }

    /// `u = V c`, renormalized in `M_h` and sign-fixed like the
    /// high-fidelity vectors.
    pub fn lift(&self, reduced: &ReducedEigen, m_h: &SparseSymMatrix) -> EigenSet {
        let mut vectors = self.basis.vectors.matmul(&reduced.coeffs);
        for j in 0..vectors.ncols() {
            let col = vectors.col_mut(j);
            let norm = libm::sqrt(m_h.inner(col, col));
            if norm > 0.0 {
                scale_vec(col, 1.0 / norm);
            }
        }
        fix_signs(&mut vectors);
        EigenSet {
            mu: reduced.mu.clone(),
            values: reduced.values.clone(),
            vectors,
        }
    }

    pub fn solve_lifted(&self, op: &AffineOperator, mu: &[f64], k: usize) -> Result<EigenSet> {
        let reduced = self.solve(mu, k)?;
        let m_h = op.mass_at(mu)?;
        Ok(self.lift(&reduced, &m_h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::solve_at;
    use crate::fem::build_problem_1d;
    use crate::mesh::{Rect, TriMesh};
    use crate::pod::{collect_snapshots, gram_svd, SnapshotStrategy};
    use crate::sampling::{uniform_1d, SampleSet};
    use alloc::vec;

    fn small_op() -> AffineOperator {
        let mesh = TriMesh::structured(Rect::centered_square(), 8, 8).unwrap();
        AffineOperator::assemble(&build_problem_1d(), &mesh).unwrap()
    }

    fn identity_basis(n: usize) -> PodBasis {
        PodBasis {
            vectors: DenseMatrix::identity(n),
            singular_values: vec![1.0; n],
            right_vectors: DenseMatrix::identity(n),
            eps_tol: None,
        }
    }

    #[test]
    fn full_basis_reproduces_high_fidelity() {
        let op = small_op();
        let rom = RomSystem::project(&op, &identity_basis(op.dim())).unwrap();
        let mu = [0.3];
        let fem = solve_at(&op, &mu, 4).unwrap();
        let red = rom.solve_lifted(&op, &mu, 4).unwrap();
        for i in 0..4 {
            assert!((fem.values[i] - red.values[i]).abs() < 1e-10 * fem.values[i]);
        }
        assert!(red.vectors.max_abs_diff(&fem.vectors) < 1e-8);
    }

    #[test]
    fn exact_at_training_point_and_upper_bound() {
        let op = small_op();
        let train = SampleSet::explicit(vec![vec![-0.4]]).unwrap();
        let snaps = collect_snapshots(&op, &train, &SnapshotStrategy::Modes(vec![1, 2, 3]), 3).unwrap();
        let rom = RomSystem::project(&op, &gram_svd(&snaps.matrix).unwrap()).unwrap();
        assert_eq!(rom.dim(), 3);
        let fem = solve_at(&op, &[-0.4], 3).unwrap();
        let red = rom.solve(&[-0.4], 3).unwrap();
        for i in 0..3 {
            assert!((red.values[i] - fem.values[i]).abs() <= 1e-9 * fem.values[i]);
        }
        let fem = solve_at(&op, &[0.9], 3).unwrap();
        let red = rom.solve(&[0.9], 3).unwrap();
        for i in 0..3 {
            assert!(red.values[i] >= fem.values[i] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn truncation_matches_reprojection_and_improves_monotonically() {
        let op = small_op();
        let train = uniform_1d(-1.4, 1.4, 0.35).unwrap();
        let snaps = collect_snapshots(&op, &train, &SnapshotStrategy::Modes(vec![1]), 1).unwrap();
        let basis = gram_svd(&snaps.matrix).unwrap();
        let rom = RomSystem::project(&op, &basis).unwrap();
        let direct = RomSystem::project(&op, &crate::pod::truncate(&basis, 3).unwrap()).unwrap();
        let cut = rom.truncated(3).unwrap();
        let (a1, m1) = cut.online.matrices_at(&[0.2]).unwrap();
        let (a2, m2) = direct.online.matrices_at(&[0.2]).unwrap();
        assert!(a1.max_abs_diff(&a2) < 1e-12 * a2.frobenius_norm());
        assert!(m1.max_abs_diff(&m2) < 1e-12 * m2.frobenius_norm());

        let mut prev = f64::INFINITY;
        for n in 1..=rom.dim() {
            let l = rom.truncated(n).unwrap().solve(&[0.65], 1).unwrap().values[0];
            assert!(l <= prev * (1.0 + 1e-12));
            prev = l;
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let op = small_op();
        let rom = RomSystem::project(&op, &identity_basis(op.dim())).unwrap();
        assert!(matches!(rom.solve(&[1.5], 1), Err(Error::Inadmissible { .. })));
        assert!(rom.solve(&[0.0], op.dim() + 1).is_err());
        assert!(rom.truncated(0).is_err());
        let mut wrong = identity_basis(3);
        wrong.vectors = DenseMatrix::identity(3);
        assert!(RomSystem::project(&op, &wrong).is_err());
    }
}
