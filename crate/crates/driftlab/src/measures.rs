//! Measures: discrete atoms, heavy-tailed densities, and tilts.
//!
//! Discrete measures are finite weighted atom clouds with total mass in
//! (0, 1]; sub-probability measures are legal inputs to the linear
//! functionals (kernel mass, overlap), while the drift itself requires
//! probability measures.
//!
//! The continuous side is the radial power-law family
//! `ρ(y) = Z⁻¹ (1 + ‖y‖)^{−m}` (m > d, d ∈ {1, 2}) together with its
//! slowly-varying exponential tilt: with `ψ(r) = clamp(r − 1, 0, 1)`,
//! `t_n = p(‖Y‖ > 2n)` and `α_n = −ln t_n`, the tilted density is
//!
//! ```text
//! q_n(dy) = Z_n⁻¹ exp(α_n ψ(‖y‖/n)) p(dy),
//! ```
//!
//! which leaves the ball of radius `n` untouched, ramps across `[n, 2n]`
//! with Lipschitz constant `α_n/n`, and rescales the outer tail so that
//! `q_n(‖Y‖ > 2n) = 1/Z_n` exactly. Densities are reduced to atom clouds by
//! midpoint quadrature on a quadratically graded radial grid.

use crate::kernels::MAX_DIM;
use crate::{norm, quad, tol, Error, Result};

/// Surface measure of the unit sphere boundary: 2 for d = 1, 2π for d = 2.
fn sphere_surface(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => unreachable!("densities are restricted to d in {{1, 2}}"),
    }
}

/// `ψ(r) = clamp(r − 1, 0, 1)`: the unit ramp driving the tilt.
pub fn ramp(r: f64) -> f64 {
    (r - 1.0).clamp(0.0, 1.0)
}

/// Finite weighted atom cloud with mass in (0, 1 + 1e−12].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>, // flattened, len = n * dim
    weights: Vec<f64>,
}

/// Builds a [`DiscreteMeasure`], validating dimensions, weight signs, and
/// the mass cap. With `normalize` the weights are rescaled to total mass 1.
pub fn make_discrete(
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    normalize: bool,
) -> Result<DiscreteMeasure> {
    if atoms.is_empty() {
        return Err(Error::invalid("atoms", "measure needs at least one atom"));
    }
    if atoms.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: atoms.len(),
            got: weights.len(),
        });
    }
    let dim = atoms[0].len();
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::invalid(
            "atoms",
            format!("atom dimension must be in 1..={MAX_DIM}, got {dim}"),
        ));
    }
    let mut flat = Vec::with_capacity(atoms.len() * dim);
    for a in &atoms {
        if a.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: a.len(),
            });
        }
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("atoms", "atom coordinates must be finite"));
        }
        flat.extend_from_slice(a);
    }
    for &w in &weights {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::invalid(
                "weights",
                format!("weights must be finite and non-negative, got {w}"),
            ));
        }
    }
    let mass: f64 = weights.iter().sum();
    if mass <= 0.0 {
        return Err(Error::invalid("weights", "total mass must be positive"));
    }
    let weights = if normalize {
        weights.iter().map(|w| w / mass).collect()
    } else {
        if mass > 1.0 + tol::MASS {
            return Err(Error::invalid(
                "weights",
                format!("total mass {mass} exceeds 1 (pass normalize to rescale)"),
            ));
        }
        weights
    };
    Ok(DiscreteMeasure {
        dim,
        atoms: flat,
        weights,
    })
}

impl DiscreteMeasure {
    /// Unit point mass at `x`.
    pub fn dirac(x: &[f64]) -> Result<Self> {
        make_discrete(vec![x.to_vec()], vec![1.0], false)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one atom
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.atoms
            .chunks_exact(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= tol::MASS
    }

    pub fn normalized(&self) -> Self {
        let mass = self.total_mass();
        DiscreteMeasure {
            dim: self.dim,
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w / mass).collect(),
        }
    }

    /// `c · r` for `c ∈ [0, 1]`: the defect ray through this measure.
    ///
    /// `c = 0` is the zero measure, which no constructor otherwise admits;
    /// it is allowed here because the overlap scalar is linear at 0 too.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::invalid(
                "c",
                format!("scale must be in [0, 1], got {c}"),
            ));
        }
        Ok(DiscreteMeasure {
            dim: self.dim,
            atoms: self.atoms.clone(),
            weights: self.weights.iter().map(|w| w * c).collect(),
        })
    }

    /// Total weight of atoms with `‖y‖ > R`.
    pub fn tail_mass_beyond(&self, radius: f64) -> f64 {
        let tail: f64 = self
            .iter()
            .filter(|(a, _)| norm(a) > radius)
            .map(|(_, w)| w)
            .sum();
        // std's float Sum starts from -0.0, so an empty tail would print as
        // a negative zero; adding +0.0 canonicalizes it.
        tail + 0.0
    }

    /// Atoms sorted lexicographically with exactly-coincident positions
    /// merged: equality of the results is equality as measures.
    fn canonical(&self) -> Vec<(Vec<f64>, f64)> {
        let mut rows: Vec<(Vec<f64>, f64)> = self
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(a, w)| (a.to_vec(), w))
            .collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite coords"));
        let mut merged: Vec<(Vec<f64>, f64)> = Vec::with_capacity(rows.len());
        for (a, w) in rows {
            match merged.last_mut() {
                Some((prev, pw)) if *prev == a => *pw += w,
                _ => merged.push((a, w)),
            }
        }
        merged
    }

    /// Equality as measures: same merged atom set with identical weights.
    pub fn measure_eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.canonical() == other.canonical()
    }
}

/// `α·a + β·b` as one measure; the combination must stay sub-probability.
pub fn mix(
    alpha: f64,
    a: &DiscreteMeasure,
    beta: f64,
    b: &DiscreteMeasure,
) -> Result<DiscreteMeasure> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::invalid("alpha", "mixture coefficients must be >= 0"));
    }
    let mut atoms: Vec<Vec<f64>> = a.iter().map(|(p, _)| p.to_vec()).collect();
    let mut weights: Vec<f64> = a.weights.iter().map(|w| alpha * w).collect();
    atoms.extend(b.iter().map(|(p, _)| p.to_vec()));
    weights.extend(b.weights.iter().map(|w| beta * w));
    make_discrete(atoms, weights, false)
}

/// The satellite construction `(1 − ε)·base + ε·δ_z`.
///
/// Applying it twice with the same `z` simply accumulates weight at `z`:
/// the result then carries `ε + (1 − ε)ε` there.
pub fn satellite(base: &DiscreteMeasure, eps: f64, z: &[f64]) -> Result<DiscreteMeasure> {
    if !base.is_probability() {
        return Err(Error::invalid(
            "base",
            "satellite base must be a probability measure",
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(
            "eps",
            format!("must be in (0, 1), got {eps}"),
        ));
    }
    crate::check_dim(base.dim, z)?;
    let mut atoms: Vec<Vec<f64>> = base.iter().map(|(p, _)| p.to_vec()).collect();
    let mut weights: Vec<f64> = base.weights.iter().map(|w| (1.0 - eps) * w).collect();
    atoms.push(z.to_vec());
    weights.push(eps);
    make_discrete(atoms, weights, false)
}

/// `ρ(y) = Z⁻¹ (1 + ‖y‖)^{−m}`, `m > d`, `d ∈ {1, 2}`, with closed-form
/// normalization and tail function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawDensity {
    m: f64,
    dim: usize,
    z: f64,
}

impl PowerLawDensity {
    pub fn new(m: f64, dim: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::invalid(
                "dim",
                format!("densities support d in {{1, 2}}, got {dim}"),
            ));
        }
        if !(m > dim as f64) || !m.is_finite() {
            return Err(Error::invalid(
                "m",
                format!("power-law exponent must satisfy m > d = {dim}, got {m}"),
            ));
        }
        // Z = ∫ (1+‖y‖)^{−m} dy: 2/(m−1) in d = 1, 2π/((m−1)(m−2)) in d = 2.
        let z = match dim {
            1 => 2.0 / (m - 1.0),
            _ => 2.0 * std::f64::consts::PI / ((m - 1.0) * (m - 2.0)),
        };
        Ok(PowerLawDensity { m, dim, z })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The normalization constant Z.
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Normalized density at radius `r`.
    pub fn rho_radial(&self, r: f64) -> f64 {
        (1.0 + r).powf(-self.m) / self.z
    }

    pub fn rho(&self, y: &[f64]) -> Result<f64> {
        crate::check_dim(self.dim, y)?;
        Ok(self.rho_radial(norm(y)))
    }

    /// `p(‖Y‖ > R)`, closed form.
    pub fn tail_mass(&self, radius: f64) -> f64 {
        let a = 1.0 + radius.max(0.0);
        match self.dim {
            1 => a.powf(1.0 - self.m),
            _ => {
                // (m−1)(m−2) ∫_R^∞ r (1+r)^{−m} dr restores the Z factor.
                (self.m - 1.0) * a.powf(2.0 - self.m) - (self.m - 2.0) * a.powf(1.0 - self.m)
            }
        }
    }
}

/// The tilted density `q_n ∝ exp(α_n ψ(‖y‖/n)) p`; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltedDensity {
    base: PowerLawDensity,
    n: u32,
    t_n: f64,
    alpha_n: f64,
    z_n: f64,
    ramp_integral: f64, // ∫_{n<‖y‖<2n} e^{φ_n} p(dy), cached for tails
}

/// Quadrature tolerance for the tilt normalizer (absolute, in mass units).
const TILT_QUAD_TOL: f64 = 1e-11;

pub fn tilt_density(base: PowerLawDensity, n: u32) -> Result<TiltedDensity> {
    if n == 0 {
        return Err(Error::invalid("n", "tilt index must be >= 1"));
    }
    let nf = n as f64;
    let t_n = base.tail_mass(2.0 * nf);
    let alpha_n = -t_n.ln();
    let surface = sphere_surface(base.dim);
    let dm1 = (base.dim - 1) as i32;
    // ∫ over the ramp region [n, 2n], where φ = α_n (r/n − 1).
    let ramp_integral = quad::integrate(
        |r| (alpha_n * (r / nf - 1.0)).exp() * base.rho_radial(r) * surface * r.powi(dm1),
        nf,
        2.0 * nf,
        TILT_QUAD_TOL,
    );
    // Beyond 2n the tilt is the constant e^{α_n} = 1/t_n, so that region
    // contributes exactly t_n / t_n = 1 to the normalizer.
    let z_n = (1.0 - base.tail_mass(nf)) + ramp_integral + 1.0;
    Ok(TiltedDensity {
        base,
        n,
        t_n,
        alpha_n,
        z_n,
        ramp_integral,
    })
}

impl TiltedDensity {
    pub fn base(&self) -> PowerLawDensity {
        self.base
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `t_n = p(‖Y‖ > 2n)` of the base law.
    pub fn t_n(&self) -> f64 {
        self.t_n
    }

    /// Tilt height `α_n = −ln t_n`.
    pub fn alpha_n(&self) -> f64 {
        self.alpha_n
    }

    /// Normalizer `Z_n = ∫ e^{φ_n} dp`.
    pub fn z_n(&self) -> f64 {
        self.z_n
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// Tilt exponent `φ_n(r) = α_n ψ(r/n)`.
    pub fn phi(&self, r: f64) -> f64 {
        self.alpha_n * ramp(r / self.n as f64)
    }

    /// Normalized tilted density at radius `r`.
    pub fn weight_radial(&self, r: f64) -> f64 {
        self.phi(r).exp() * self.base.rho_radial(r) / self.z_n
    }

    /// `q_n(‖Y‖ > R)`: analytic outside the ramp band, quadrature across it.
    pub fn tail_mass(&self, radius: f64) -> f64 {
        let nf = self.n as f64;
        let r = radius.max(0.0);
        if r >= 2.0 * nf {
            return self.base.tail_mass(r) / (self.t_n * self.z_n);
        }
        let ramp_part = if r <= nf {
            self.ramp_integral
        } else {
            let surface = sphere_surface(self.base.dim);
            let dm1 = (self.base.dim - 1) as i32;
            quad::integrate(
                |s| {
                    (self.alpha_n * (s / nf - 1.0)).exp()
                        * self.base.rho_radial(s)
                        * surface
                        * s.powi(dm1)
                },
                r,
                2.0 * nf,
                TILT_QUAD_TOL,
            )
        };
        let inner_part = if r < nf {
            self.base.tail_mass(r) - self.base.tail_mass(nf)
        } else {
            0.0
        };
        (inner_part + ramp_part + 1.0) / self.z_n
    }
}

/// Either continuous law, with a uniform radial interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    PowerLaw(PowerLawDensity),
    Tilted(TiltedDensity),
}

impl Density {
    pub fn dim(&self) -> usize {
        match self {
            Density::PowerLaw(p) => p.dim(),
            Density::Tilted(t) => t.dim(),
        }
    }

    /// Normalized density value at radius `r`.
    pub fn weight_radial(&self, r: f64) -> f64 {
        match self {
            Density::PowerLaw(p) => p.rho_radial(r),
            Density::Tilted(t) => t.weight_radial(r),
        }
    }

    pub fn tail_mass(&self, radius: f64) -> f64 {
        match self {
            Density::PowerLaw(p) => p.tail_mass(radius),
            Density::Tilted(t) => t.tail_mass(radius),
        }
    }

    pub fn mass_inside(&self, radius: f64) -> f64 {
        1.0 - self.tail_mass(radius)
    }
}

/// Radial quadrature grid: `cells` quadratically graded radial cells on
/// [0, r_max] (finer near the origin), and for d = 2 a uniform split of each
/// annulus into `sectors` angular sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_max: f64,
    pub cells: usize,
    pub sectors: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, cells: usize) -> Result<Self> {
        Self::with_sectors(r_max, cells, 64)
    }

    pub fn with_sectors(r_max: f64, cells: usize, sectors: usize) -> Result<Self> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(Error::invalid(
                "r_max",
                format!("must be positive, got {r_max}"),
            ));
        }
        if cells == 0 {
            return Err(Error::invalid("cells", "need at least one radial cell"));
        }
        if sectors < 4 {
            return Err(Error::invalid("sectors", "need at least 4 angular sectors"));
        }
        Ok(RadialGrid {
            r_max,
            cells,
            sectors,
        })
    }
}

/// Truncation and quadrature diagnostics for a discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationInfo {
    /// Analytic mass beyond `r_max`, lost by truncation.
    pub truncated_tail: f64,
    /// |quadrature mass − analytic mass inside r_max|: the measured
    /// quadrature error of the mass integral on the same grid.
    pub mass_error: f64,
}

/// Midpoint-rule reduction of a density to an atom cloud on the graded grid.
///
/// With `normalize` the cloud is rescaled to a probability measure (the
/// barycenter field is invariant under that rescaling). The degenerate
/// single-cell grid in d = 1 collapses to one atom at the origin carrying
/// the analytic inside-mass.
pub fn discretize_density(
    density: &Density,
    grid: &RadialGrid,
    normalize: bool,
) -> Result<(DiscreteMeasure, DiscretizationInfo)> {
    let dim = density.dim();
    let inside_mass = density.mass_inside(grid.r_max);
    if dim == 1 && grid.cells == 1 {
        let measure = make_discrete(vec![vec![0.0]], vec![inside_mass], normalize)?;
        return Ok((
            measure,
            DiscretizationInfo {
                truncated_tail: density.tail_mass(grid.r_max),
                mass_error: 0.0,
            },
        ));
    }

    let nodes: Vec<f64> = (0..=grid.cells)
        .map(|k| grid.r_max * (k as f64 / grid.cells as f64).powi(2))
        .collect();
    let mut atoms: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for cell in nodes.windows(2) {
        let (a, b) = (cell[0], cell[1]);
        let mid = 0.5 * (a + b);
        let dr = b - a;
        match dim {
            1 => {
                // One atom per side; weight_radial is the density on the line.
                let w = density.weight_radial(mid) * dr;
                atoms.push(vec![mid]);
                weights.push(w);
                atoms.push(vec![-mid]);
                weights.push(w);
            }
            2 => {
                let dtheta = 2.0 * std::f64::consts::PI / grid.sectors as f64;
                let w = density.weight_radial(mid) * mid * dr * dtheta;
                for j in 0..grid.sectors {
                    let theta = (j as f64 + 0.5) * dtheta;
                    atoms.push(vec![mid * theta.cos(), mid * theta.sin()]);
                    weights.push(w);
                }
            }
            _ => unreachable!("density dims are validated to 1 or 2"),
        }
    }
    let quad_mass: f64 = weights.iter().sum();
    let info = DiscretizationInfo {
        truncated_tail: density.tail_mass(grid.r_max),
        mass_error: (quad_mass - inside_mass).abs(),
    };
    Ok((make_discrete(atoms, weights, normalize)?, info))
}

/// `tail_mass` over every measure kind the experiments touch.
pub fn tail_mass_of(measure: &MeasureRef<'_>, radius: f64) -> f64 {
    match measure {
        MeasureRef::Discrete(m) => m.tail_mass_beyond(radius),
        MeasureRef::PowerLaw(p) => p.tail_mass(radius),
        MeasureRef::Tilted(t) => t.tail_mass(radius),
    }
}

/// Borrowed view over the three measure kinds.
pub enum MeasureRef<'a> {
    Discrete(&'a DiscreteMeasure),
    PowerLaw(&'a PowerLawDensity),
    Tilted(&'a TiltedDensity),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn construction_rules() {
        assert!(make_discrete(vec![], vec![], false).is_err());
        assert!(make_discrete(vec![vec![0.0]], vec![1.0, 2.0], false).is_err());
        assert!(make_discrete(vec![vec![0.0], vec![1.0, 2.0]], vec![0.5, 0.5], false).is_err());
        assert!(make_discrete(vec![vec![0.0]], vec![-0.1], false).is_err());
        assert!(make_discrete(vec![vec![0.0]], vec![0.0], false).is_err());
        assert!(make_discrete(vec![vec![0.0]], vec![1.5], false).is_err());
        let m = make_discrete(vec![vec![0.0]], vec![1.5], true).unwrap();
        assert!(m.is_probability());
        let sub = make_discrete(vec![vec![0.0]], vec![0.5], false).unwrap();
        assert!(!sub.is_probability());
        assert_eq!(sub.total_mass(), 0.5);
        assert!(make_discrete(vec![vec![0.0; 17]], vec![1.0], false).is_err());
    }

    #[test]
    fn satellite_reweights() {
        let p = DiscreteMeasure::dirac(&[0.0]).unwrap();
        let q = satellite(&p, 0.25, &[3.0]).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.weight(0), 0.75);
        assert_eq!(q.weight(1), 0.25);
        assert_eq!(q.atom(1), &[3.0]);
        assert!(q.is_probability());

        // Twice-applied satellite accumulates z-weight eps + (1-eps)eps.
        let qq = satellite(&q, 0.25, &[3.0]).unwrap();
        let z_weight: f64 = qq.iter().filter(|(a, _)| *a == [3.0]).map(|(_, w)| w).sum();
        assert_relative_eq!(z_weight, 0.25 + 0.75 * 0.25, max_relative = 1e-15);

        assert!(satellite(&p, 0.0, &[1.0]).is_err());
        assert!(satellite(&p, 1.0, &[1.0]).is_err());
        let sub = make_discrete(vec![vec![0.0]], vec![0.5], false).unwrap();
        assert!(satellite(&sub, 0.5, &[1.0]).is_err());
    }

    #[test]
    fn measure_equality_ignores_order_and_splitting() {
        let a = make_discrete(vec![vec![1.0], vec![0.0]], vec![0.5, 0.5], false).unwrap();
        let b = make_discrete(vec![vec![0.0], vec![1.0]], vec![0.5, 0.5], false).unwrap();
        assert!(a.measure_eq(&b));
        let split = make_discrete(
            vec![vec![0.0], vec![1.0], vec![0.0]],
            vec![0.25, 0.5, 0.25],
            false,
        )
        .unwrap();
        assert!(a.measure_eq(&split));
        let c = make_discrete(vec![vec![0.0], vec![1.0]], vec![0.4, 0.6], false).unwrap();
        assert!(!a.measure_eq(&c));
    }

    #[test]
    fn power_law_normalization() {
        // d = 1, m = 3: Z = 1 and tail(R) = (1+R)^{-2}.
        let p = PowerLawDensity::new(3.0, 1).unwrap();
        assert_eq!(p.z(), 1.0);
        assert_relative_eq!(p.tail_mass(2.0), 1.0 / 9.0, max_relative = 1e-15);
        assert_eq!(p.tail_mass(0.0), 1.0);

        // Quadrature cross-checks of Z in both dimensions.
        for (dim, m) in [(1usize, 3.0f64), (1, 4.5), (2, 3.5), (2, 4.0)] {
            let p = PowerLawDensity::new(m, dim).unwrap();
            let surface = sphere_surface(dim);
            let dm1 = (dim - 1) as i32;
            let mass = quad::integrate(|r| p.rho_radial(r) * surface * r.powi(dm1), 0.0, 1e6, 1e-9);
            assert_relative_eq!(mass, 1.0 - p.tail_mass(1e6), max_relative = 1e-6);
            let tail_quad =
                quad::integrate(|r| p.rho_radial(r) * surface * r.powi(dm1), 3.0, 1e7, 1e-10);
            assert_relative_eq!(
                tail_quad,
                p.tail_mass(3.0) - p.tail_mass(1e7),
                max_relative = 1e-6
            );
        }

        assert!(PowerLawDensity::new(1.0, 1).is_err());
        assert!(PowerLawDensity::new(2.0, 2).is_err());
        assert!(PowerLawDensity::new(3.0, 3).is_err());
    }

    #[test]
    fn tilt_worked_schedule() {
        // d = 1, m = 3: t_n = (1+2n)^{-2}, alpha_n = 2 ln(1+2n).
        let base = PowerLawDensity::new(3.0, 1).unwrap();
        for n in [1u32, 2, 4, 8, 16] {
            let t = tilt_density(base, n).unwrap();
            let nf = n as f64;
            assert_relative_eq!(t.t_n(), (1.0 + 2.0 * nf).powi(-2), max_relative = 1e-14);
            assert_relative_eq!(
                t.alpha_n(),
                2.0 * (1.0 + 2.0 * nf).ln(),
                max_relative = 1e-14
            );
            // Z_n <= 1 + tail(n)/tail(2n) = 1 + ((1+2n)/(1+n))^2 <= 5.
            let bound = 1.0 + ((1.0 + 2.0 * nf) / (1.0 + nf)).powi(2);
            assert!(
                t.z_n() > 1.9 && t.z_n() <= bound + 1e-9,
                "Z_{n} = {}",
                t.z_n()
            );
            // Outer tail identity: q_n(‖Y‖ > 2n) Z_n = 1.
            assert_relative_eq!(t.tail_mass(2.0 * nf) * t.z_n(), 1.0, max_relative = 1e-8);
        }
        assert_eq!(tilt_density(base, 1).unwrap().phi(0.5), 0.0);
        let t = tilt_density(base, 1).unwrap();
        assert_relative_eq!(t.phi(3.0), t.alpha_n(), max_relative = 1e-15);
    }

    #[test]
    fn tilt_tail_is_monotone_and_consistent() {
        let base = PowerLawDensity::new(3.0, 1).unwrap();
        let t = tilt_density(base, 4).unwrap();
        assert_relative_eq!(t.tail_mass(0.0), 1.0, max_relative = 1e-9);
        let radii = [0.0, 2.0, 4.0, 5.0, 6.5, 8.0, 12.0, 40.0];
        let tails: Vec<f64> = radii.iter().map(|&r| t.tail_mass(r)).collect();
        for w in tails.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "tail must decrease: {tails:?}");
        }
        // Direct quadrature of the tilted density over [5, 8] against the
        // difference of tails.
        let direct = quad::integrate(|r| 2.0 * t.weight_radial(r), 5.0, 8.0, 1e-12);
        assert_relative_eq!(
            direct,
            t.tail_mass(5.0) - t.tail_mass(8.0),
            max_relative = 1e-7
        );
    }

    #[test]
    fn discretization_mass_tracks_analytics() {
        let base = PowerLawDensity::new(3.0, 1).unwrap();
        let density = Density::PowerLaw(base);
        let grid = RadialGrid::new(200.0, 2000).unwrap();
        let (cloud, info) = discretize_density(&density, &grid, false).unwrap();
        assert_eq!(cloud.len(), 4000);
        assert!(info.truncated_tail < 3e-5);
        // Midpoint error on the graded grid is ~R/(3N^2) for this density.
        assert!(info.mass_error < 2e-5, "mass error {}", info.mass_error);
        assert_relative_eq!(
            cloud.total_mass(),
            density.mass_inside(200.0),
            epsilon = 3e-5
        );
        // Cloud tails match analytic tails up to truncation, quadrature, and
        // the one grid cell the threshold radius cuts through.
        for radius in [1.0, 4.0, 30.0] {
            let analytic = density.tail_mass(radius) - density.tail_mass(200.0);
            assert_relative_eq!(
                cloud.tail_mass_beyond(radius),
                analytic,
                max_relative = 2e-2
            );
        }

        let (prob, _) = discretize_density(&density, &grid, true).unwrap();
        assert!(prob.is_probability());

        // Degenerate single-cell grid in d = 1.
        let (one, info) =
            discretize_density(&density, &RadialGrid::new(5.0, 1).unwrap(), false).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.atom(0), &[0.0]);
        assert_relative_eq!(
            one.total_mass(),
            density.mass_inside(5.0),
            max_relative = 1e-14
        );
        assert_eq!(info.mass_error, 0.0);
    }

    #[test]
    fn discretization_d2() {
        let base = PowerLawDensity::new(4.0, 2).unwrap();
        let density = Density::PowerLaw(base);
        let grid = RadialGrid::with_sectors(60.0, 400, 32).unwrap();
        let (cloud, info) = discretize_density(&density, &grid, false).unwrap();
        assert_eq!(cloud.len(), 400 * 32);
        assert!(info.mass_error < 1e-4, "mass error {}", info.mass_error);
        assert_relative_eq!(
            cloud.total_mass() + info.truncated_tail,
            1.0,
            epsilon = 2e-4
        );
    }

    #[test]
    fn refining_halves_mass_error() {
        let base = PowerLawDensity::new(3.0, 1).unwrap();
        let density = Density::PowerLaw(base);
        let coarse = discretize_density(&density, &RadialGrid::new(100.0, 500).unwrap(), false)
            .unwrap()
            .1;
        let fine = discretize_density(&density, &RadialGrid::new(100.0, 1000).unwrap(), false)
            .unwrap()
            .1;
        // Midpoint rule is second order: doubling cells cuts the error ~4x.
        assert!(fine.mass_error < 0.5 * coarse.mass_error);
    }

    proptest! {
        #[test]
        fn tail_sandwich(m in 1.6..8.0f64, radius in 1.0..50.0f64, dim in 1usize..3) {
            prop_assume!(m > dim as f64 + 0.5);
            let p = PowerLawDensity::new(m, dim).unwrap();
            let c_d = sphere_surface(dim);
            let c_minus = c_d * 2f64.powf(-m) / (p.z() * (m - dim as f64));
            let c_plus = c_d / (p.z() * (m - dim as f64));
            let tail = p.tail_mass(radius);
            let power = radius.powf(dim as f64 - m);
            prop_assert!(tail >= c_minus * power * (1.0 - 1e-12));
            prop_assert!(tail <= c_plus * power * (1.0 + 1e-12));
        }

        #[test]
        fn scaled_measures_stay_on_ray(c in 0.0..1.0f64, w in 0.1..1.0f64) {
            let p = make_discrete(vec![vec![0.0], vec![1.0]], vec![w / 2.0, w / 2.0], false).unwrap();
            let scaled = p.scaled(c).unwrap();
            prop_assert!((scaled.total_mass() - c * w).abs() <= 1e-12);
        }
    }
}
