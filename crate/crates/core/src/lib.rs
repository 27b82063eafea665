//! Reduced-basis approximation of parametric elliptic eigenvalue problems.
//!
//! The pipeline is: P1 finite elements on a structured triangulation
//! ([`mesh`], [`fem`]), high-fidelity generalized eigensolves
//! ([`eigensolve`]), snapshot collection and POD by the method of snapshots
//! ([`sampling`], [`pod`]), Galerkin projection with an offline/online split
//! ([`rom`]) and mode matching / tracking diagnostics ([`diagnostics`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod diagnostics;
pub mod eigensolve;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod mesh;
pub mod pod;
pub mod rom;
pub mod sampling;

pub use error::{Error, Result};
