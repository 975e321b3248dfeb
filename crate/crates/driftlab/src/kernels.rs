//! Kernel families and their companion structure.
//!
//! Each family pairs a radial kernel `κ` with a companion function `η` and
//! constants `(c₁, c₂, λ₀, λ₁)` satisfying, away from the origin,
//!
//! ```text
//! ∇η(z)  = −(z / c₁) κ(z)                 (gradient pairing)
//! (λ₀ − λ₁ Δ) η = c₂ κ                    (elliptic pairing)
//! ```
//!
//! Families and their data, with `r = ‖z‖`:
//!
//! | family          | κ(z)                    | η(z)                       | c₁  | c₂     | λ₀ | λ₁  |
//! |-----------------|-------------------------|----------------------------|-----|--------|----|-----|
//! | Laplace(τ)      | e^{−r/τ}                | (1 + r/τ) e^{−r/τ}         | τ²  | d + 1  | 1  | τ²  |
//! | Gaussian(σ)     | e^{−r²/(2σ²)}           | κ itself                   | σ²  | 1      | 1  | 0   |
//! | Matérn(ν, ℓ)    | ℓ r^ν K_ν(r/ℓ)          | r^{ν+1} K_{ν+1}(r/ℓ)       | ℓ²  | d + 2ν | 1  | ℓ²  |
//!
//! The Matérn normalization is kept exactly as above (no unit-peak
//! rescaling): `κ(0) = ℓ^{ν+1} 2^{ν−1} Γ(ν)`. Barycenters, drifts and the
//! normalized spectral density are invariant under kernel scaling, so only
//! the κ/η pairing has to be internally consistent. At ν = 1/2 the family
//! reduces to a scalar multiple of Laplace(ℓ).
//!
//! The normalized spectral density `κ̂(ξ)/κ̂(0)` follows a single transport
//! law driven by the constants:
//!
//! ```text
//! κ̂(ξ)/κ̂(0) = exp(−c₁c₂‖ξ‖² / (2λ₀))                 if λ₁ = 0,
//! κ̂(ξ)/κ̂(0) = (1 + (λ₁/λ₀)‖ξ‖²)^{−c₁c₂/(2λ₁)}        if λ₁ > 0.
//! ```

use crate::specfun::{bessel_k_log, gamma_fn, BesselOrder};
use crate::{check_dim, norm, tol, Error, Result};
use serde::Serialize;

/// Maximum spatial dimension accepted by kernel specs (matches the discrete
/// measure cap; densities are further restricted to d ∈ {1, 2}).
pub const MAX_DIM: usize = 16;

/// Largest Matérn smoothness; `ν + 1` must stay within the Bessel order cap.
pub const MAX_MATERN_NU: f64 = 49.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelFamily {
    Laplace { tau: f64 },
    Gaussian { sigma: f64 },
    Matern { nu: f64, ell: f64 },
}

/// A kernel family with its spatial dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    family: KernelFamily,
    dim: usize,
}

/// Constants of the companion pairing; see the module docs for the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompanionConstants {
    pub c1: f64,
    pub c2: f64,
    pub lambda0: f64,
    pub lambda1: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::invalid(
                "dim",
                format!("dimension must be in 1..={MAX_DIM}, got {dim}"),
            ));
        }
        match family {
            KernelFamily::Laplace { tau } => {
                if !(tau > 0.0) || !tau.is_finite() {
                    return Err(Error::invalid(
                        "tau",
                        format!("must be positive, got {tau}"),
                    ));
                }
            }
            KernelFamily::Gaussian { sigma } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::invalid(
                        "sigma",
                        format!("must be positive, got {sigma}"),
                    ));
                }
            }
            KernelFamily::Matern { nu, ell } => {
                if !(ell > 0.0) || !ell.is_finite() {
                    return Err(Error::invalid(
                        "ell",
                        format!("must be positive, got {ell}"),
                    ));
                }
                if !(nu > 0.0) || nu > MAX_MATERN_NU {
                    return Err(Error::invalid(
                        "nu",
                        format!("must be in (0, {MAX_MATERN_NU}], got {nu}"),
                    ));
                }
            }
        }
        Ok(KernelSpec { family, dim })
    }

    pub fn laplace(tau: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Laplace { tau }, dim)
    }

    pub fn gaussian(sigma: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Gaussian { sigma }, dim)
    }

    pub fn matern(nu: f64, ell: f64, dim: usize) -> Result<Self> {
        Self::new(KernelFamily::Matern { nu, ell }, dim)
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// τ, σ, or ℓ: the natural length unit for grids and difference steps.
    pub fn length_scale(&self) -> f64 {
        match self.family {
            KernelFamily::Laplace { tau } => tau,
            KernelFamily::Gaussian { sigma } => sigma,
            KernelFamily::Matern { ell, .. } => ell,
        }
    }

    pub fn is_laplace(&self) -> bool {
        matches!(self.family, KernelFamily::Laplace { .. })
    }

    /// Matérn ν = 1/2 has a radial cusp at the origin (like Laplace); the
    /// elliptic verifier keeps test points away from atoms for it.
    pub fn is_matern_half(&self) -> bool {
        matches!(self.family, KernelFamily::Matern { nu, .. } if (nu - 0.5).abs() < 1e-12)
    }

    /// κ(0), the continuous extension of the kernel at the origin.
    pub fn kernel_at_zero(&self) -> f64 {
        match self.family {
            KernelFamily::Laplace { .. } | KernelFamily::Gaussian { .. } => 1.0,
            KernelFamily::Matern { nu, ell } => {
                ell.powf(nu + 1.0) * 2f64.powf(nu - 1.0) * gamma_fn(nu).expect("nu > 0")
            }
        }
    }

    /// η(0), the continuous extension of the companion at the origin.
    fn companion_at_zero(&self) -> f64 {
        match self.family {
            KernelFamily::Laplace { .. } | KernelFamily::Gaussian { .. } => 1.0,
            KernelFamily::Matern { nu, ell } => {
                ell.powf(nu + 1.0) * 2f64.powf(nu) * gamma_fn(nu + 1.0).expect("nu > -1")
            }
        }
    }

    /// ln κ at radius `r ≥ 0`.
    pub fn kernel_log_radial(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self.family {
            KernelFamily::Laplace { tau } => -r / tau,
            KernelFamily::Gaussian { sigma } => -0.5 * r * r / (sigma * sigma),
            KernelFamily::Matern { nu, ell } => {
                if r < tol::MATERN_ORIGIN_FACTOR * ell {
                    self.kernel_at_zero().ln()
                } else {
                    let order = BesselOrder::new(nu).expect("validated nu");
                    ell.ln() + nu * r.ln() + bessel_k_log(order, r / ell).expect("r > 0")
                }
            }
        }
    }

    /// κ at radius `r ≥ 0`. Computed as exp of the log form: the log never
    /// overflows, and the exponential tail underflows gracefully to 0.
    pub fn kernel_radial(&self, r: f64) -> f64 {
        self.kernel_log_radial(r).exp()
    }

    /// η at radius `r ≥ 0`.
    pub fn companion_radial(&self, r: f64) -> f64 {
        match self.family {
            KernelFamily::Laplace { tau } => (1.0 + r / tau) * (-r / tau).exp(),
            KernelFamily::Gaussian { .. } => self.kernel_radial(r),
            KernelFamily::Matern { nu, ell } => {
                if r < tol::MATERN_ORIGIN_FACTOR * ell {
                    self.companion_at_zero()
                } else {
                    let order = BesselOrder::new(nu + 1.0).expect("nu + 1 <= 50");
                    let log = (nu + 1.0) * r.ln() + bessel_k_log(order, r / ell).expect("r > 0");
                    log.exp()
                }
            }
        }
    }

    /// κ(z).
    pub fn kernel_eval(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dim, z)?;
        Ok(self.kernel_radial(norm(z)))
    }

    /// ln κ(z); stays finite far into the tail where `kernel_eval` underflows.
    pub fn kernel_log_eval(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dim, z)?;
        Ok(self.kernel_log_radial(norm(z)))
    }

    /// η(z).
    pub fn companion_eval(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dim, z)?;
        Ok(self.companion_radial(norm(z)))
    }

    /// ∇η(z) = −z κ(z) / c₁ (exact, not a finite difference). Zero at z = 0.
    pub fn companion_grad(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, z)?;
        let kappa = self.kernel_radial(norm(z));
        let c1 = self.companion_constants().c1;
        Ok(z.iter().map(|&zi| -zi * kappa / c1).collect())
    }

    pub fn companion_constants(&self) -> CompanionConstants {
        let d = self.dim as f64;
        match self.family {
            KernelFamily::Laplace { tau } => CompanionConstants {
                c1: tau * tau,
                c2: d + 1.0,
                lambda0: 1.0,
                lambda1: tau * tau,
            },
            KernelFamily::Gaussian { sigma } => CompanionConstants {
                c1: sigma * sigma,
                c2: 1.0,
                lambda0: 1.0,
                lambda1: 0.0,
            },
            KernelFamily::Matern { nu, ell } => CompanionConstants {
                c1: ell * ell,
                c2: d + 2.0 * nu,
                lambda0: 1.0,
                lambda1: ell * ell,
            },
        }
    }

    /// Normalized spectral density `κ̂(ξ)/κ̂(0)` at radial frequency `rho`.
    pub fn spectral_density_radial(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0);
        let k = self.companion_constants();
        if k.lambda1 == 0.0 {
            (-k.c1 * k.c2 * rho * rho / (2.0 * k.lambda0)).exp()
        } else {
            let base = 1.0 + k.lambda1 / k.lambda0 * rho * rho;
            base.powf(-k.c1 * k.c2 / (2.0 * k.lambda1))
        }
    }

    /// Normalized spectral density at frequency vector ξ.
    pub fn spectral_density(&self, xi: &[f64]) -> Result<f64> {
        check_dim(self.dim, xi)?;
        Ok(self.spectral_density_radial(norm(xi)))
    }
}

impl std::fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            KernelFamily::Laplace { tau } => write!(f, "laplace(tau={tau}), dim={}", self.dim),
            KernelFamily::Gaussian { sigma } => {
                write!(f, "gaussian(sigma={sigma}), dim={}", self.dim)
            }
            KernelFamily::Matern { nu, ell } => {
                write!(f, "matern(nu={nu},ell={ell}), dim={}", self.dim)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn laplace_values() {
        let spec = KernelSpec::laplace(1.0, 1).unwrap();
        assert_relative_eq!(spec.kernel_eval(&[1.0]).unwrap(), (-1f64).exp());
        assert_relative_eq!(spec.companion_eval(&[1.0]).unwrap(), 2.0 * (-1f64).exp());
        assert_eq!(spec.kernel_log_eval(&[700.0]).unwrap(), -700.0);
    }

    #[test]
    fn gaussian_values() {
        let spec = KernelSpec::gaussian(2.0, 2).unwrap();
        let z = [1.0, 1.0];
        assert_relative_eq!(spec.kernel_eval(&z).unwrap(), (-0.25f64).exp());
        // The Gaussian companion is the kernel itself, bit for bit.
        assert_eq!(
            spec.companion_eval(&z).unwrap(),
            spec.kernel_eval(&z).unwrap()
        );
    }

    #[test]
    fn matern_at_origin() {
        // kappa(0) = ell^{nu+1} 2^{nu-1} Gamma(nu); at nu = 3/2, ell = 1 that
        // is sqrt(2) Gamma(3/2) = sqrt(pi/2).
        let spec = KernelSpec::matern(1.5, 1.0, 1).unwrap();
        assert_relative_eq!(
            spec.kernel_eval(&[0.0]).unwrap(),
            (PI / 2.0).sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn matern_origin_threshold_is_continuous() {
        let spec = KernelSpec::matern(1.5, 1.0, 1).unwrap();
        let below = spec.kernel_radial(0.9e-8);
        let above = spec.kernel_radial(1.1e-8);
        assert_relative_eq!(below, above, max_relative = 1e-6);
        let below = spec.companion_radial(0.9e-8);
        let above = spec.companion_radial(1.1e-8);
        assert_relative_eq!(below, above, max_relative = 1e-6);
    }

    #[test]
    fn matern_half_is_scaled_laplace() {
        // kappa_{1/2,ell} = ell^{3/2} sqrt(pi/2) e^{-r/ell}: a constant
        // multiple of Laplace(tau = ell), for both kernel and companion.
        for ell in [0.7, 1.0, 2.3] {
            let matern = KernelSpec::matern(0.5, ell, 1).unwrap();
            let laplace = KernelSpec::laplace(ell, 1).unwrap();
            let scale = ell.powf(1.5) * (PI / 2.0).sqrt();
            for r in [0.0, 0.4, 1.0, 3.0, 10.0] {
                assert_relative_eq!(
                    matern.kernel_radial(r),
                    scale * laplace.kernel_radial(r),
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    matern.companion_radial(r),
                    scale * laplace.companion_radial(r),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn matern_far_tail_log_form() {
        // At nu = 1/2 the log kernel is exactly log kappa(0) - r/ell.
        let spec = KernelSpec::matern(0.5, 1.0, 1).unwrap();
        let got = spec.kernel_log_eval(&[200.0]).unwrap();
        let oracle = spec.kernel_at_zero().ln() - 200.0;
        assert!((got - oracle).abs() < 1e-6, "got {got}, oracle {oracle}");
    }

    #[test]
    fn companion_constants_examples() {
        let c = KernelSpec::laplace(2.0, 3).unwrap().companion_constants();
        assert_eq!((c.c1, c.c2, c.lambda0, c.lambda1), (4.0, 4.0, 1.0, 4.0));
        let c = KernelSpec::matern(1.5, 1.0, 1)
            .unwrap()
            .companion_constants();
        assert_eq!((c.c1, c.c2, c.lambda0, c.lambda1), (1.0, 4.0, 1.0, 1.0));
        let c = KernelSpec::gaussian(0.5, 2).unwrap().companion_constants();
        assert_eq!((c.c1, c.c2, c.lambda0, c.lambda1), (0.25, 1.0, 1.0, 0.0));
    }

    #[test]
    fn gradient_pairing_by_finite_difference() {
        // d/dr eta(r) = -(r/c1) kappa(r) for every family, checked centrally.
        let specs = [
            KernelSpec::laplace(0.7, 1).unwrap(),
            KernelSpec::gaussian(1.3, 1).unwrap(),
            KernelSpec::matern(0.5, 1.0, 1).unwrap(),
            KernelSpec::matern(1.0, 0.8, 1).unwrap(),
            KernelSpec::matern(2.5, 1.2, 1).unwrap(),
        ];
        for spec in specs {
            let c1 = spec.companion_constants().c1;
            let h = 1e-6 * spec.length_scale();
            for r in [0.3, 0.9, 2.0, 5.0] {
                let fd = (spec.companion_radial(r + h) - spec.companion_radial(r - h)) / (2.0 * h);
                let closed = -(r / c1) * spec.kernel_radial(r);
                assert_relative_eq!(fd, closed, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn spectral_examples() {
        let spec = KernelSpec::laplace(1.0, 1).unwrap();
        assert_eq!(spec.spectral_density(&[1.0]).unwrap(), 0.5);
        let spec = KernelSpec::gaussian(1.0, 1).unwrap();
        assert_relative_eq!(spec.spectral_density(&[1.0]).unwrap(), (-0.5f64).exp());
        // Matérn exponent: (1 + ell^2 rho^2)^{-(nu + d/2)}.
        let spec = KernelSpec::matern(1.5, 2.0, 2).unwrap();
        let rho: f64 = 0.9;
        let oracle = (1.0 + 4.0 * rho * rho).powf(-2.5);
        assert_relative_eq!(
            spec.spectral_density_radial(rho),
            oracle,
            max_relative = 1e-13
        );
    }

    #[test]
    fn spectral_exponent_consistency_is_exact() {
        // c1 c2 / (2 lambda1) == nu + d/2 bit-exactly: c1 and lambda1 are the
        // same computed double, and c2 = d + 2 nu with integer-valued 2 nu in
        // the supported acceptance families.
        for dim in 1..=3usize {
            for (nu, ell) in [(0.5, 1.0), (1.0, 1.0), (1.5, 0.7), (2.5, 1.3)] {
                let c = KernelSpec::matern(nu, ell, dim)
                    .unwrap()
                    .companion_constants();
                assert_eq!(c.c1 * c.c2 / (2.0 * c.lambda1), nu + dim as f64 / 2.0);
            }
            for tau in [0.5, 1.0, 2.0] {
                let c = KernelSpec::laplace(tau, dim).unwrap().companion_constants();
                assert_eq!(c.c1 * c.c2 / (2.0 * c.lambda1), 0.5 + dim as f64 / 2.0);
            }
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(KernelSpec::laplace(0.0, 1).is_err());
        assert!(KernelSpec::gaussian(-1.0, 1).is_err());
        assert!(KernelSpec::matern(0.0, 1.0, 1).is_err());
        assert!(KernelSpec::matern(49.5, 1.0, 1).is_err());
        assert!(KernelSpec::laplace(1.0, 0).is_err());
        assert!(KernelSpec::laplace(1.0, 17).is_err());
        assert!(KernelSpec::laplace(1.0, 1)
            .unwrap()
            .kernel_eval(&[1.0, 2.0])
            .is_err());
    }

    proptest! {
        #[test]
        fn kernel_positive_decreasing(r1 in 0.0..20.0f64, dr in 1e-6..5.0f64, tau in 0.2..3.0f64) {
            let spec = KernelSpec::laplace(tau, 1).unwrap();
            let a = spec.kernel_radial(r1);
            let b = spec.kernel_radial(r1 + dr);
            prop_assert!(a > 0.0 && b > 0.0 && a >= b);
        }

        #[test]
        fn matern_kernel_decreasing(r1 in 0.0..10.0f64, dr in 1e-4..3.0f64, nu in 0.3..6.0f64, ell in 0.3..2.0f64) {
            let spec = KernelSpec::matern(nu, ell, 1).unwrap();
            prop_assert!(spec.kernel_radial(r1) >= spec.kernel_radial(r1 + dr));
        }

        #[test]
        fn log_eval_consistent(r in 1e-4..30.0f64, nu in 0.3..6.0f64) {
            let spec = KernelSpec::matern(nu, 1.0, 1).unwrap();
            let v = spec.kernel_radial(r);
            let lv = spec.kernel_log_radial(r);
            prop_assert!((lv.exp() - v).abs() <= 1e-12 * v.abs().max(1e-300));
        }

        #[test]
        fn spectral_density_in_unit_interval(rho in 0.0..40.0f64, nu in 0.3..6.0f64, ell in 0.3..2.0f64, dim in 1usize..4) {
            let spec = KernelSpec::matern(nu, ell, dim).unwrap();
            let s = spec.spectral_density_radial(rho);
            prop_assert!(s > 0.0 && s <= 1.0);
            prop_assert!(spec.spectral_density_radial(0.0) == 1.0);
        }
    }
}
