//! Symmetric cones, their self-scaled barriers, and a Nesterov-Todd
//! interior-point method.
//!
//! * [`eja`]: Jordan algebra arithmetic, spectral frames, quadratic
//!   representations.
//! * [`barrier`]: the weighted log-determinant barriers, their duals,
//!   scaling points and an identity-verification suite.
//! * [`symmetry`]: automorphism sampling, polar decomposition, isotropy.
//! * [`decompose`]: recovery of the irreducible decomposition from
//!   structure constants and of barrier weights from a value oracle.
//! * [`ipm`]: long-step primal-dual path following with NT scaling.
//! * [`io`]: JSON documents shared with the command-line tool.

// `!(v > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod decompose;
pub mod eja;
pub mod error;
pub mod io;
pub mod ipm;
pub mod linalg;
pub mod symmetry;

pub use error::{Error, Result};
