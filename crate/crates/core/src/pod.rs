//! Snapshot matrices built from high-fidelity eigenvectors and their POD
//! basis, computed by the method of snapshots (eigendecomposition of the
//! Gram matrix `SᵀS`).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::eigensolve::{solve_at, EigenSet};
use crate::error::{Error, Result};
use crate::fem::AffineOperator;
use crate::linalg::dense::{axpy, dot, norm2, scale_vec};
use crate::linalg::{DenseMatrix, SymmetricEigen};
use crate::sampling::SampleSet;

/// Default energy tolerance for [`select_dim`].
pub const DEFAULT_EPS_TOL: f64 = 1e-8;

/// Which eigenvectors enter the snapshot matrix at every sample.
#[derive(Clone, Debug, PartialEq)]
pub enum SnapshotStrategy {
    /// One column per listed mode (1-based), modes ascending within a sample.
    Modes(Vec<usize>),
    /// A single column `sum_j c_j u_{m_j}` per sample.
    Combination { modes: Vec<usize>, coeffs: Vec<f64> },
}

impl SnapshotStrategy {
    /// `u_1 + ... + u_n`.
    pub fn sum_of_first(n: usize) -> Self {
        SnapshotStrategy::Combination {
            modes: (1..=n).collect(),
            coeffs: vec![1.0; n],
        }
    }

    pub fn modes(&self) -> &[usize] {
        match self {
            SnapshotStrategy::Modes(m) => m,
            SnapshotStrategy::Combination { modes, .. } => modes,
        }
    }

    pub fn max_mode(&self) -> usize {
        self.modes().iter().copied().max().unwrap_or(0)
    }

    pub fn columns_per_sample(&self) -> usize {
        match self {
            SnapshotStrategy::Modes(m) => m.len(),
            SnapshotStrategy::Combination { .. } => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let modes = self.modes();
        if modes.is_empty() {
            return Err(Error::invalid("snapshot strategy lists no modes"));
        }
        if modes[0] == 0 || modes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("mode indices must be positive and strictly increasing"));
        }
        if let SnapshotStrategy::Combination { coeffs, .. } = self {
            if coeffs.len() != modes.len() {
                return Err(Error::invalid("one coefficient per mode required"));
            }
            if coeffs.iter().any(|&c| c == 0.0 || !c.is_finite()) {
                return Err(Error::invalid("combination coefficients must be finite and nonzero"));
            }
        }
        Ok(())
    }

    /// Short human-readable label, e.g. `u1,u2,u3` or `u1+u2+u3`.
    pub fn label(&self) -> String {
        match self {
            SnapshotStrategy::Modes(m) => m.iter().map(|i| format!("u{i}")).collect::<Vec<_>>().join(","),
            SnapshotStrategy::Combination { modes, coeffs } => modes
                .iter()
                .zip(coeffs)
                .map(|(i, c)| if *c == 1.0 { format!("u{i}") } else { format!("{c}*u{i}") })
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnSource {
    /// 1-based mode index.
    Mode(usize),
    Combination,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnProvenance {
    pub mu: Vec<f64>,
    pub source: ColumnSource,
}

/// Snapshot matrix `S` (`N_h x N_s`) with per-column provenance.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub matrix: DenseMatrix,
    pub provenance: Vec<ColumnProvenance>,
    pub strategy: SnapshotStrategy,
    pub samples: SampleSet,
}

impl SnapshotSet {
    pub fn num_snapshots(&self) -> usize {
        self.matrix.ncols()
    }

    /// Builds `S` from already computed eigensets, one per sample in order.
    pub fn from_solutions(samples: &SampleSet, solutions: &[EigenSet], strategy: &SnapshotStrategy) -> Result<Self> {
        strategy.validate()?;
        if samples.is_empty() {
            return Err(Error::invalid("no training samples"));
        }
        if solutions.len() != samples.len() {
            return Err(Error::DimensionMismatch {
                context: "eigensets per sample",
                expected: samples.len(),
                found: solutions.len(),
            });
        }
        let n_h = solutions[0].space_dim();
        let mut columns = Vec::with_capacity(samples.len() * strategy.columns_per_sample());
        let mut provenance = Vec::with_capacity(columns.capacity());
        for (mu, set) in samples.points.iter().zip(solutions) {
            if set.len() < strategy.max_mode() {
                return Err(Error::invalid(format!(
                    "snapshot needs mode {} but only {} eigenpairs were computed",
                    strategy.max_mode(),
                    set.len()
                )));
            }
            match strategy {
                SnapshotStrategy::Modes(modes) => {
                    for &m in modes {
                        columns.push(set.vector(m - 1).to_vec());
                        provenance.push(ColumnProvenance {
                            mu: mu.clone(),
                            source: ColumnSource::Mode(m),
                        });
                    }
                }
                SnapshotStrategy::Combination { modes, coeffs } => {
                    let mut col = vec![0.0; n_h];
                    for (&m, &c) in modes.iter().zip(coeffs) {
                        axpy(c, set.vector(m - 1), &mut col);
                    }
                    columns.push(col);
                    provenance.push(ColumnProvenance {
                        mu: mu.clone(),
                        source: ColumnSource::Combination,
                    });
                }
            }
        }
        if columns.iter().any(|c| !(norm2(c) > 0.0)) {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            matrix: DenseMatrix::from_columns(n_h, &columns),
            provenance,
            strategy: strategy.clone(),
            samples: samples.clone(),
        })
    }
}

/// Solves the high-fidelity problem at every sample and assembles `S`.
pub fn collect_snapshots(op: &AffineOperator, samples: &SampleSet, strategy: &SnapshotStrategy, k: usize) -> Result<SnapshotSet> {
    strategy.validate()?;
    if strategy.max_mode() > k {
        return Err(Error::invalid("strategy uses a mode beyond the requested eigenpair count"));
    }
    let solutions = samples
        .points
        .iter()
        .map(|mu| solve_at(op, mu, k))
        .collect::<Result<Vec<_>>>()?;
    SnapshotSet::from_solutions(samples, &solutions, strategy)
}

/// Orthonormal POD basis with the full singular value spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct PodBasis {
    /// `N_h x N`, Euclidean-orthonormal columns.
    pub vectors: DenseMatrix,
    /// `sigma_1 >= ... >= sigma_r > 0`.
    pub singular_values: Vec<f64>,
    /// Right singular vectors `psi_i` as columns (`N_s x r`).
    pub right_vectors: DenseMatrix,
    pub eps_tol: Option<f64>,
}

impl PodBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn space_dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// `||S - V Vᵀ S||_F^2` for the current (possibly truncated) basis.
    pub fn projection_error_sq(&self, s: &DenseMatrix) -> f64 {
        let coeffs = self.vectors.tr_matmul(s);
        let recon = self.vectors.matmul(&coeffs);
        let mut diff = s.clone();
        diff.add_scaled(-1.0, &recon);
        let f = diff.frobenius_norm();
        f * f
    }

    /// Sum of squared discarded singular values.
    pub fn tail_energy(&self) -> f64 {
        self.singular_values[self.dim()..].iter().map(|s| s * s).sum()
    }
}

/// Untruncated POD of `S` by the method of snapshots.
///
/// The Gram matrix is symmetrized and decomposed; `sigma_i = sqrt` of its
/// eigenvalues, descending. Indices with `sigma_i <= max(N_h, N_s) eps sigma_1`
/// are dropped. Left vectors `S psi_i / sigma_i` are re-orthonormalized by two
/// Gram-Schmidt passes; a vector that collapses there ends the numerical rank.
pub fn gram_svd(s: &DenseMatrix) -> Result<PodBasis> {
    let (n_h, n_s) = (s.nrows(), s.ncols());
    if n_h == 0 || n_s == 0 {
        return Err(Error::invalid("empty snapshot matrix"));
    }
    let mut gram = s.tr_matmul(s);
    gram.symmetrize();
    let eig = SymmetricEigen::new(&gram)?;
    let lambda_max = eig.values[n_s - 1];
    if !(lambda_max > 0.0) {
        return Err(Error::RankZero);
    }
    let sigma_1 = libm::sqrt(lambda_max);
    let tau = n_h.max(n_s) as f64 * f64::EPSILON * sigma_1;

    let mut sigmas = Vec::new();
    let mut psis: Vec<Vec<f64>> = Vec::new();
    for i in (0..n_s).rev() {
        let sigma = libm::sqrt(eig.values[i].max(0.0));
        if !(sigma > tau) {
            break;
        }
        sigmas.push(sigma);
        psis.push(eig.vectors.col(i).to_vec());
    }

    let mut left: Vec<Vec<f64>> = Vec::with_capacity(sigmas.len());
    for (sigma, psi) in sigmas.iter().zip(&psis) {
        let mut z = s.matvec(psi);
        scale_vec(&mut z, 1.0 / sigma);
        let before = norm2(&z);
        for _ in 0..2 {
            for q in &left {
                let c = dot(q, &z);
                axpy(-c, q, &mut z);
            }
        }
        let after = norm2(&z);
        if !(after > 1e-8 * before) || !(after > 0.0) {
            break;
        }
        scale_vec(&mut z, 1.0 / after);
        left.push(z);
    }
    let r = left.len();
    sigmas.truncate(r);
    psis.truncate(r);
    Ok(PodBasis {
        vectors: DenseMatrix::from_columns(n_h, &left),
        singular_values: sigmas,
        right_vectors: DenseMatrix::from_columns(n_s, &psis),
        eps_tol: None,
    })
}

/// Smallest `N` with `sum_{i<=N} sigma_i^2 / sum_{i<=r} sigma_i^2 >= 1 - eps_tol`.
pub fn select_dim(singular_values: &[f64], eps_tol: f64) -> Result<usize> {
    if singular_values.is_empty() {
        return Err(Error::RankZero);
    }
    if !(eps_tol > 0.0 && eps_tol < 1.0) {
        return Err(Error::invalid("eps_tol must lie in (0, 1)"));
    }
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    let mut acc = 0.0;
    for (i, s) in singular_values.iter().enumerate() {
        acc += s * s;
        if acc / total >= 1.0 - eps_tol {
            return Ok(i + 1);
        }
    }
    Ok(singular_values.len())
}

/// Keeps the first `n` basis vectors; singular values are kept for reporting.
pub fn truncate(basis: &PodBasis, n: usize) -> Result<PodBasis> {
    if n == 0 || n > basis.dim() {
        return Err(Error::invalid(format!("truncation size {n} outside 1..={}", basis.dim())));
    }
    Ok(PodBasis {
        vectors: basis.vectors.leading_columns(n),
        singular_values: basis.singular_values.clone(),
        right_vectors: basis.right_vectors.clone(),
        eps_tol: basis.eps_tol,
    })
}

/// [`gram_svd`] followed by [`select_dim`] and [`truncate`].
pub fn pod_with_tolerance(s: &DenseMatrix, eps_tol: f64) -> Result<PodBasis> {
    let full = gram_svd(s)?;
    let n = select_dim(&full.singular_values, eps_tol)?;
    let mut b = truncate(&full, n)?;
    b.eps_tol = Some(eps_tol);
    Ok(b)
}
