//! Numerical laboratory for kernel drift fields.
//!
//! Given two finite measures `p` (target) and `q` (current), each kernel
//! `κ` induces a drifting field
//!
//! ```text
//! V_{p,q}(x) = a_p(x) − a_q(x),      a_r(x) = ∫ y κ(x−y) r(dy) / ∫ κ(x−y) r(dy),
//! ```
//!
//! the difference of the kernel-weighted local barycenters seen from `x`.
//! For the kernel families implemented here (Laplace, Gaussian, Matérn) the
//! displacement `a_r(x) − x` is a gradient/elliptic quotient of a companion
//! potential, which makes the field unusually checkable: every module below
//! either evaluates a piece of that structure or verifies one of its exact
//! identities numerically.
//!
//! - [`specfun`]: modified Bessel functions `K_ν` and the gamma function.
//! - [`kernels`]: kernel families, companion functions, spectral densities.
//! - [`measures`]: discrete measures, heavy-tailed densities, tilts, quadrature.
//! - [`field`]: kernel mass, barycenters, drift samples, grid reports.
//! - [`identities`]: finite-difference verifiers for the companion identities.
//! - [`counterexamples`]: two mass-escape constructions with analytic bounds.
//! - [`stability`]: overlap scalar, defect-ray estimate, anchor checks, a
//!   particle simulator driven by the field.
//! - [`config`]: the kernel/measure expression grammar used by the CLI.

// Validation guards are written `!(x > 0.0)` on purpose: NaN fails every
// ordered comparison, so the negated form rejects NaN along with the
// out-of-range values, which `x <= 0.0` would silently admit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod counterexamples;
pub mod field;
pub mod identities;
pub mod kernels;
pub mod measures;
pub mod quad;
pub mod report;
pub mod specfun;
pub mod stability;
pub mod tol;

pub use field::{Barycenter, FieldSample, GridSpec};
pub use kernels::{CompanionConstants, KernelFamily, KernelSpec};
pub use measures::{Density, DiscreteMeasure, PowerLawDensity, TiltedDensity};
pub use specfun::BesselOrder;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A result (or an intermediate) exceeds the representable f64 range.
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// Config / expression grammar errors; `context` names the offending field.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Checks that a slice has the expected dimension.
pub(crate) fn check_dim(expected: usize, v: &[f64]) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Euclidean norm.
pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Euclidean distance between equal-length slices.
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
