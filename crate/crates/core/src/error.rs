use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the numerical core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// Shapes of two operands do not agree.
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// The mesh has no interior degrees of freedom.
    EmptySystem,
    /// Cholesky factorization hit a non-positive pivot.
    NotPositiveDefinite { what: &'static str, pivot: usize },
    /// An iterative method ran out of iterations.
    NotConverged { what: &'static str, iterations: usize },
    /// Parameter outside the admissible set of the problem.
    Inadmissible { mu: Vec<f64> },
    /// `(b - a) / step` is not an integer.
    NonCommensurateStep { a: f64, b: f64, step: f64 },
    /// The snapshot matrix is numerically zero.
    RankZero,
    /// A vector that must be nonzero was zero.
    ZeroVector,
    /// The reduced mass matrix lost definiteness; carries the smallest
    /// retained singular value relative to the largest.
    ReducedMassNotSpd { relative_sigma_tail: f64 },
    /// Two candidate assignments in mode tracking are indistinguishable.
    AmbiguousAssignment {
        step: usize,
        mode: usize,
        best: f64,
        runner_up: f64,
    },
    /// A high-fidelity solve failed at the given parameter.
    AtParameter { mu: Vec<f64>, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at(mu: &[f64], source: Error) -> Self {
        Error::AtParameter {
            mu: mu.to_vec(),
            source: Box::new(source),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch {
                context,
                expected,
                found,
            } => write!(f, "{context}: expected dimension {expected}, found {found}"),
            Error::EmptySystem => write!(f, "empty system: mesh has no interior degrees of freedom"),
            Error::NotPositiveDefinite { what, pivot } => {
                write!(f, "{what} not positive definite (pivot {pivot})")
            }
            Error::NotConverged { what, iterations } => {
                write!(f, "{what} did not converge after {iterations} iterations")
            }
            Error::Inadmissible { mu } => write!(f, "parameter {mu:?} is not admissible"),
            Error::NonCommensurateStep { a, b, step } => write!(
                f,
                "step {step} does not divide the interval [{a}, {b}] into an integer number of parts"
            ),
            Error::RankZero => write!(f, "snapshot matrix has numerical rank 0"),
            Error::ZeroVector => write!(f, "zero vector"),
            Error::ReducedMassNotSpd {
                relative_sigma_tail,
            } => write!(
                f,
                "reduced mass not positive definite (smallest retained sigma / sigma_1 = {relative_sigma_tail:e})"
            ),
            Error::AmbiguousAssignment {
                step,
                mode,
                best,
                runner_up,
            } => write!(
                f,
                "ambiguous mode assignment at sweep step {step} for mode {mode}: correlations {best} and {runner_up}"
            ),
            Error::AtParameter { mu, source } => write!(f, "at mu = {mu:?}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtParameter { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
