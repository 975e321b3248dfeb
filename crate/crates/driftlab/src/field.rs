//! The drifting field and its building blocks.
//!
//! For a kernel κ and a finite measure r, the smoothed mass and barycenter at
//! a point x are
//!
//! ```text
//! u_r(x) = ∫ κ(x − y) r(dy),      a_r(x) = ∫ y κ(x − y) r(dy) / u_r(x),
//! ```
//!
//! and the drifting field of a pair of probability measures (p, q) is
//! `V_{p,q}(x) = a_p(x) − a_q(x)`: the displacement that pulls mass of q
//! toward p. All accumulations run in the log domain: far from the atoms the
//! kernel mass underflows to zero long before the barycenter loses meaning,
//! so the barycenter weights are normalized against the largest log term
//! rather than against `u_r` itself.

use rayon::prelude::*;
use serde::Serialize;

use crate::kernels::KernelSpec;
use crate::measures::DiscreteMeasure;
use crate::{check_dim, Error, Result};

/// Smoothed mass and barycenter of one measure at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Barycenter {
    /// `a_r(x)`: kernel-weighted mean of the atoms. Always lies in the
    /// convex hull of the atoms with positive weight.
    pub a: Vec<f64>,
    /// `u_r(x)`; may underflow to 0 far from the atoms while `a` stays exact.
    pub u: f64,
    /// `ln u_r(x)`, finite whenever some atom has positive weight.
    pub log_u: f64,
}

/// One evaluation of the drifting field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub u_p: f64,
    pub u_q: f64,
    pub log_u_p: f64,
    pub log_u_q: f64,
    pub a_p: Vec<f64>,
    pub a_q: Vec<f64>,
    /// `V_{p,q}(x) = a_p(x) − a_q(x)`.
    pub v: Vec<f64>,
}

fn check_measure(spec: &KernelSpec, r: &DiscreteMeasure) -> Result<()> {
    if r.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: r.dim(),
        });
    }
    Ok(())
}

/// Log-domain accumulation shared by [`kernel_mass`] and [`barycenter`]:
/// returns the max log term, the normalized weights, and their sum.
fn log_terms(spec: &KernelSpec, r: &DiscreteMeasure, x: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    check_measure(spec, r)?;
    check_dim(spec.dim(), x)?;
    let mut logs = Vec::with_capacity(r.len());
    let mut diff = vec![0.0; x.len()];
    let mut max_log = f64::NEG_INFINITY;
    for (y, w) in r.iter() {
        if w <= 0.0 {
            logs.push(f64::NEG_INFINITY);
            continue;
        }
        for (d, (xi, yi)) in diff.iter_mut().zip(x.iter().zip(y)) {
            *d = xi - yi;
        }
        let l = w.ln() + spec.kernel_log_eval(&diff)?;
        max_log = max_log.max(l);
        logs.push(l);
    }
    if !max_log.is_finite() {
        return Err(Error::Numerical(
            "kernel mass vanished: no atom with positive weight contributes".into(),
        ));
    }
    let mut sum = 0.0;
    let weights: Vec<f64> = logs
        .iter()
        .map(|&l| {
            let w = (l - max_log).exp();
            sum += w;
            w
        })
        .collect();
    Ok((max_log, weights, sum))
}

/// `u_r(x)` as `(value, ln value)`. The value may underflow to 0; the log
/// never does.
pub fn kernel_mass(spec: &KernelSpec, r: &DiscreteMeasure, x: &[f64]) -> Result<(f64, f64)> {
    let (max_log, _, sum) = log_terms(spec, r, x)?;
    let log_u = max_log + sum.ln();
    Ok((log_u.exp(), log_u))
}

/// Kernel mass and barycenter of `r` at `x`.
pub fn barycenter(spec: &KernelSpec, r: &DiscreteMeasure, x: &[f64]) -> Result<Barycenter> {
    let (max_log, weights, sum) = log_terms(spec, r, x)?;
    let mut a = vec![0.0; spec.dim()];
    for ((y, _), w) in r.iter().zip(&weights) {
        for (ai, yi) in a.iter_mut().zip(y) {
            *ai += w * yi;
        }
    }
    for ai in &mut a {
        *ai /= sum;
    }
    let log_u = max_log + sum.ln();
    Ok(Barycenter {
        a,
        u: log_u.exp(),
        log_u,
    })
}

/// Companion potential `Ψ_r(x) = ∫ η(x − y) r(dy)` and its exact gradient
/// `∇Ψ_r(x) = −(1/c₁) ∫ (x − y) κ(x − y) r(dy)`.
pub fn companion_potential(
    spec: &KernelSpec,
    r: &DiscreteMeasure,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    check_measure(spec, r)?;
    check_dim(spec.dim(), x)?;
    let mut psi = 0.0;
    let mut grad = vec![0.0; spec.dim()];
    let mut diff = vec![0.0; x.len()];
    for (y, w) in r.iter() {
        if w <= 0.0 {
            continue;
        }
        for (d, (xi, yi)) in diff.iter_mut().zip(x.iter().zip(y)) {
            *d = xi - yi;
        }
        psi += w * spec.companion_eval(&diff)?;
        let g = spec.companion_grad(&diff)?;
        for (gi, gy) in grad.iter_mut().zip(g) {
            *gi += w * gy;
        }
    }
    Ok((psi, grad))
}

/// The drifting field `V_{p,q}` at `x`. Both measures must be probability
/// measures; the field is not defined for deficient mass.
pub fn drift(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    x: &[f64],
) -> Result<FieldSample> {
    if !p.is_probability() || !q.is_probability() {
        return Err(Error::invalid(
            "measures",
            "the drifting field needs probability measures on both sides",
        ));
    }
    let bp = barycenter(spec, p, x)?;
    let bq = barycenter(spec, q, x)?;
    let v = bp.a.iter().zip(&bq.a).map(|(ap, aq)| ap - aq).collect();
    Ok(FieldSample {
        x: x.to_vec(),
        u_p: bp.u,
        u_q: bq.u,
        log_u_p: bp.log_u,
        log_u_q: bq.log_u,
        a_p: bp.a,
        a_q: bq.a,
        v,
    })
}

/// Evaluates the field on a batch of points in parallel, preserving order.
pub fn drift_on_points(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    points: &[Vec<f64>],
) -> Result<Vec<FieldSample>> {
    points
        .par_iter()
        .map(|x| drift(spec, p, q, x))
        .collect::<Result<Vec<_>>>()
}

/// Largest `‖V‖` over a batch of samples, with the attaining point.
/// Sequential scan so the result does not depend on thread scheduling.
pub fn sup_field_norm(samples: &[FieldSample]) -> (f64, Vec<f64>) {
    let mut sup = f64::NEG_INFINITY;
    let mut arg = Vec::new();
    for s in samples {
        let n = crate::norm(&s.v);
        if n > sup {
            sup = n;
            arg = s.x.clone();
        }
    }
    (sup, arg)
}

/// Centered cubic lattice: coordinates `j · spacing` for `|j| ≤ radius/spacing`
/// in each axis, row-major (last axis fastest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub radius: f64,
    pub spacing: f64,
}

/// Hard cap on lattice size; beyond this the grid is almost surely a typo.
const MAX_GRID_POINTS: usize = 4_000_000;

impl GridSpec {
    pub fn new(radius: f64, spacing: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(
                "radius",
                format!("must be positive, got {radius}"),
            ));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid(
                "spacing",
                format!("must be positive, got {spacing}"),
            ));
        }
        Ok(GridSpec { radius, spacing })
    }

    /// Number of lattice sites per axis.
    pub fn per_axis(&self) -> usize {
        // The epsilon absorbs radius/spacing values like 5/0.1 that land a
        // hair under an integer.
        let k = (self.radius / self.spacing + 1e-9).floor() as usize;
        2 * k + 1
    }

    /// All lattice points in row-major order.
    pub fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        let side = self.per_axis();
        let k = (side / 2) as i64;
        let total = side
            .checked_pow(dim as u32)
            .filter(|&t| t <= MAX_GRID_POINTS)
            .ok_or_else(|| {
                Error::invalid(
                    "grid",
                    format!("{side}^{dim} lattice points exceed the cap of {MAX_GRID_POINTS}"),
                )
            })?;
        let mut points = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rem = idx;
            let mut x = vec![0.0; dim];
            for axis in (0..dim).rev() {
                let j = (rem % side) as i64 - k;
                x[axis] = j as f64 * self.spacing;
                rem /= side;
            }
            points.push(x);
        }
        Ok(points)
    }
}
