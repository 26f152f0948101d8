//! Numerical laboratory for multiple chordal SLE(κ).
//!
//! The crate builds Coulomb-gas screening solutions of the multiple-SLE
//! null-vector system, verifies the identities they satisfy (null-vector
//! PDEs, Ward identities, dilatation scaling, Calogero-Moser conjugation,
//! generator commutators, half-plane capacity expansions), and simulates
//! the induced Loewner flow.
//!
//! Modules:
//! - [`params`]: κ-derived charges and conformal dimensions.
//! - [`pattern`]: planar link-pattern enumeration.
//! - [`config`]: boundary-point configurations.
//! - [`contour`]: branch-tracked complex contour quadrature.
//! - [`coulomb`]: master functions and the screening integrals 𝒥 and 𝒦.
//! - [`operators`]: stencil-based differential-operator residual checks.
//! - [`loewner`]: slit-map Loewner simulation and capacity identities.
//! - [`report`]: machine-readable check summaries.

// `!(x > 0.0)`-style guards must reject NaN along with the wrong sign;
// indexed loops here walk parallel arrays (nodes, weights, branch logs)
// in lockstep.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod contour;
pub mod coulomb;
pub mod error;
pub mod loewner;
pub mod operators;
pub mod params;
pub mod pattern;
pub mod report;

pub use error::{Result, SleError};

/// The real scalar type used throughout the crate.
///
/// All tolerances in the verification contracts sit between 1e-4 and 1e-12,
/// which rules out single precision; the crate is concretely f64.
pub type Real = f64;

/// The complex scalar type used throughout the crate.
pub type Cplx = num_complex::Complex64;

/// Shorthand for building a complex number.
#[inline]
pub fn cplx(re: f64, im: f64) -> Cplx {
    Cplx::new(re, im)
}
