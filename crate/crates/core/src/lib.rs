//! Exact-arithmetic toolkit for unimodular smooth Fano polytopes and their
//! monotone duals.
//!
//! All arithmetic is over arbitrary-precision integers and rationals.

pub mod classify;
pub mod error;
pub mod ewald;
pub mod fixtures;
pub mod linalg;
pub mod matroid;
pub mod monotone;
pub mod par;
pub mod polytope;
pub mod tumatrix;

pub use error::{Error, Result};
pub use linalg::{IntMatrix, IntVector, RatVector};
pub use par::Execution;
pub use polytope::{FaceRef, Facet, LatticePolytope};
