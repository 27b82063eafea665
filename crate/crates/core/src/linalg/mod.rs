//! Minimal dense and sparse linear algebra used by the solvers.

pub mod cholesky;
pub mod dense;
pub mod sparse;
pub mod sym_eigen;

pub use cholesky::{BandedCholesky, Cholesky};
pub use dense::DenseMatrix;
pub use sparse::SparseSymMatrix;
pub use sym_eigen::SymmetricEigen;
