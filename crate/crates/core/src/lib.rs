//! Convex hulls of Poisson point processes on the Clifford torus.
//!
//! The crate builds exact 4D convex hulls of homogeneous Poisson samples on
//! `T² ⊂ E⁴`, extracts their f-vectors and mean vertex valence, evaluates the
//! analytic cap geometry of the torus, and checks the integral formulas and
//! growth laws for the hull statistics by Monte Carlo.

// `!(x > 0.0)` is the NaN-rejecting form used for every domain check, and the
// small dense matrix kernels read better with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod estimators;
pub mod experiment;
pub mod hull;
pub mod measure;
pub mod quadrature;
pub mod sampling;
pub mod stats;
pub mod torus;

pub use error::{Error, Result};
