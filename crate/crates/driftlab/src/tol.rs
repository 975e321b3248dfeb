//! Central tolerance constants.
//!
//! Every numeric gate in the verifiers and experiments references one of
//! these named constants so the accepted error budget is visible in one
//! place and cannot drift between a check and its tests.

/// Bit-level identities (antisymmetry, linearity, p = q ⇒ V = 0): these are
/// algebraically exact, so the budget only covers f64 rounding.
pub const EXACT: f64 = 1e-12;

/// Relative error for the first-order finite-difference gradient identity
/// at step `h = GRAD_STEP_FACTOR * length_scale`.
pub const GRADIENT_REL: f64 = 1e-6;

/// Relative error for the second-order finite-difference elliptic identity
/// at step `h = LAP_STEP_FACTOR * length_scale`.
pub const ELLIPTIC_REL: f64 = 1e-4;

/// The Gaussian companion equals the kernel, so its elliptic identity has no
/// Laplacian term and is checked to rounding accuracy.
pub const ELLIPTIC_GAUSSIAN_REL: f64 = 1e-12;

/// Relative residual of the spectral transport ODE checked by central
/// differences on the radial profile.
pub const SPECTRAL_ODE_REL: f64 = 1e-6;

/// Cosine-transform cross-check error in units of the numeric transform at
/// xi = 0 (pointwise relative error is not resolvable in f64 once the
/// normalized density falls below quadrature cancellation noise).
pub const SPECTRAL_QUAD: f64 = 1e-6;

/// Central-difference step for gradients, as a multiple of the length scale.
pub const GRAD_STEP_FACTOR: f64 = 1e-5;

/// Central-difference step for Laplacians, as a multiple of the length scale.
pub const LAP_STEP_FACTOR: f64 = 1e-3;

/// Matérn ν = 1/2 kernels have a radial cusp at the origin; the elliptic
/// verifier excludes test points closer than this (times ℓ) to an atom.
pub const MATERN_HALF_EXCLUSION_FACTOR: f64 = 1e-2;

/// Matérn evaluations below this radius (times ℓ) return the small-argument
/// limit instead of `r^ν K_ν(r/ℓ)`, which is 0·∞ at the origin.
pub const MATERN_ORIGIN_FACTOR: f64 = 1e-8;

/// Slack added to analytic proof bounds before comparing a measured sup
/// against them (absorbs grid quadrature rounding, not discretization bias).
pub const BOUND_SLACK: f64 = 1e-10;

/// Probability-mass tolerance: a measure is a probability measure when its
/// total mass is within this of 1.
pub const MASS: f64 = 1e-12;
