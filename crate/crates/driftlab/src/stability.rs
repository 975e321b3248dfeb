//! Stability diagnostics: the overlap scalar, anchor observables with a
//! liminf-style verdict, defect-ray mass estimation, and a synchronous
//! particle drift simulator.
//!
//! These are the instruments that distinguish "the field went quiet because
//! the approximating sequence converged" from "the field went quiet because
//! mass escaped": a vanishing drifting field pins every vague cluster point
//! to the ray `c·p`, and any single strictly positive anchor observable
//! (a kernel section, a companion section, or the overlap scalar itself)
//! fixes the scale `c = 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::field::{companion_potential, drift_on_points, kernel_mass, sup_field_norm};
use crate::kernels::KernelSpec;
use crate::measures::DiscreteMeasure;
use crate::{check_dim, Error, Result};

/// Intrinsic overlap scalar `Z_p(μ) = ∫ u_p dμ = Σᵢⱼ wᵢ^μ wⱼ^p κ(xᵢ − yⱼ)`.
///
/// Linear in `μ`, symmetric when both arguments are probabilities, and
/// strictly positive whenever `μ` has mass. Per-atom partial sums are
/// computed in parallel but combined in index order, so the result is
/// deterministic.
pub fn overlap_scalar(spec: &KernelSpec, p: &DiscreteMeasure, mu: &DiscreteMeasure) -> Result<f64> {
    if p.dim() != spec.dim() || mu.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            got: if p.dim() != spec.dim() {
                p.dim()
            } else {
                mu.dim()
            },
        });
    }
    let partials: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let x = mu.atom(i);
            let mut s = 0.0;
            let mut diff = vec![0.0; x.len()];
            for (y, wp) in p.iter() {
                for (d, (xi, yi)) in diff.iter_mut().zip(x.iter().zip(y)) {
                    *d = xi - yi;
                }
                s += wp * spec.kernel_eval(&diff).expect("dims checked");
            }
            mu.weight(i) * s
        })
        .collect();
    Ok(partials.iter().sum())
}

/// What an anchor observable measures.
#[derive(Debug, Clone, PartialEq)]
pub enum AnchorKind {
    /// `u_r(x*)`: the kernel mass at a fixed point.
    KernelSection { x_star: Vec<f64> },
    /// `Ψ_r(x*)`: the companion potential at a fixed point.
    CompanionSection { x_star: Vec<f64> },
    /// `Z_p(r)`: the overlap scalar against the target.
    Overlap,
}

impl AnchorKind {
    fn label(&self) -> String {
        match self {
            AnchorKind::KernelSection { x_star } => format!("kernel_section@{x_star:?}"),
            AnchorKind::CompanionSection { x_star } => format!("companion_section@{x_star:?}"),
            AnchorKind::Overlap => "overlap".to_string(),
        }
    }
}

/// A strictly positive functional of a measure, anchored at the target `p`.
///
/// The scale-fixing role needs `reference_value = F(p) > 0`; construction
/// fails if the value at the target is not strictly positive (it cannot be,
/// for a target with mass, barring underflow at an absurdly remote `x*`).
#[derive(Debug, Clone)]
pub struct AnchorObservable {
    kind: AnchorKind,
    reference_value: f64,
}

impl AnchorObservable {
    pub fn new(spec: &KernelSpec, p: &DiscreteMeasure, kind: AnchorKind) -> Result<Self> {
        let reference_value = evaluate_anchor(spec, p, p, &kind)?;
        if !(reference_value > 0.0) || !reference_value.is_finite() {
            return Err(Error::invalid(
                "observable",
                format!(
                    "anchor {} evaluates to {reference_value} at the target; \
                     anchors must be strictly positive there",
                    kind.label()
                ),
            ));
        }
        Ok(Self {
            kind,
            reference_value,
        })
    }

    pub fn kind(&self) -> &AnchorKind {
        &self.kind
    }

    /// `F(p)`, the value the sequence is measured against.
    pub fn reference_value(&self) -> f64 {
        self.reference_value
    }

    /// `F(q)` for an arbitrary measure of the same dimension.
    pub fn evaluate(
        &self,
        spec: &KernelSpec,
        p: &DiscreteMeasure,
        q: &DiscreteMeasure,
    ) -> Result<f64> {
        evaluate_anchor(spec, p, q, &self.kind)
    }
}

fn evaluate_anchor(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    kind: &AnchorKind,
) -> Result<f64> {
    match kind {
        AnchorKind::KernelSection { x_star } => {
            check_dim(spec.dim(), x_star)?;
            Ok(kernel_mass(spec, q, x_star)?.0)
        }
        AnchorKind::CompanionSection { x_star } => {
            check_dim(spec.dim(), x_star)?;
            Ok(companion_potential(spec, q, x_star)?.0)
        }
        AnchorKind::Overlap => overlap_scalar(spec, p, q),
    }
}

/// Default anchor points for a target: its atom locations plus the origin,
/// where the kernel mass is largest and farthest from underflow. Exact
/// duplicates are dropped.
pub fn default_anchor_points(p: &DiscreteMeasure) -> Vec<Vec<f64>> {
    let mut points: Vec<Vec<f64>> = p.iter().map(|(y, _)| y.to_vec()).collect();
    points.push(vec![0.0; p.dim()]);
    let mut seen: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    for pt in points {
        if !seen.iter().any(|s| s == &pt) {
            seen.push(pt);
        }
    }
    seen
}

/// Where a weak-limit candidate sits on the ray `{c·p : c ∈ [0, 1]}`.
#[derive(Debug, Clone, Serialize)]
pub struct DefectEstimate {
    /// Median of the per-anchor ratios `u_q(x)/u_p(x)`; `1` means no mass
    /// was lost, values below `1` measure the escaped fraction.
    pub c_hat: f64,
    /// Max − min of the ratios. Small dispersion is evidence the sequence
    /// is near the ray; large dispersion means the field is not yet small.
    pub dispersion: f64,
    /// The anchor points the ratios were measured at.
    pub anchor_points: Vec<Vec<f64>>,
}

/// Estimates the defect scalar from kernel-mass ratios at anchor points.
///
/// `q` must be a probability measure unless `allow_subprobability` is set
/// (a sub-probability `q = c·p` then reports `c_hat = c` exactly, by
/// linearity of `u`). Ratios are formed from log kernel masses, so remote
/// anchors whose masses underflow in linear arithmetic still divide cleanly.
pub fn defect_ray_estimate(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    anchor_points: &[Vec<f64>],
    allow_subprobability: bool,
) -> Result<DefectEstimate> {
    if !p.is_probability() {
        return Err(Error::invalid(
            "p",
            "the target must be a probability measure",
        ));
    }
    if !q.is_probability() && !allow_subprobability {
        return Err(Error::invalid(
            "q",
            "q is not a probability measure; pass allow_subprobability to \
             estimate the defect of deficient mass",
        ));
    }
    if anchor_points.len() < 3 {
        return Err(Error::invalid(
            "anchor_points",
            format!(
                "defect estimation needs at least 3 anchor points, got {}",
                anchor_points.len()
            ),
        ));
    }
    let mut ratios = anchor_points
        .iter()
        .map(|x| {
            let (_, log_up) = kernel_mass(spec, p, x)?;
            let (_, log_uq) = kernel_mass(spec, q, x)?;
            Ok((log_uq - log_up).exp())
        })
        .collect::<Result<Vec<f64>>>()?;
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let n = ratios.len();
    let c_hat = if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    };
    Ok(DefectEstimate {
        c_hat,
        dispersion: ratios[n - 1] - ratios[0],
        anchor_points: anchor_points.to_vec(),
    })
}

/// Scale-fixing verdict for one observable along a measure sequence.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorVerdict {
    /// Which observable was tracked.
    pub observable: String,
    /// `F(p)`.
    pub reference_value: f64,
    /// `F(q_n)` for every element of the sequence, in order.
    pub trajectory: Vec<f64>,
    /// Trailing-window length the liminf proxy was taken over.
    pub window: usize,
    /// `min` of the trajectory over the trailing window.
    pub liminf_proxy: f64,
    pub tolerance: f64,
    /// `liminf_proxy ≥ reference_value − tolerance`.
    pub pass: bool,
}

/// Tracks `F(q_n)` along a sequence and applies the single-observable
/// sufficiency test: the verdict is PASS iff the trailing-window minimum
/// (the finite liminf proxy) reaches `F(p) − tol`.
///
/// `window` defaults to the last ⌈25%⌉ of the sequence; the choice is
/// recorded in the verdict since the asymptotic condition has no canonical
/// finite proxy.
pub fn anchor_check(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    sequence: &[DiscreteMeasure],
    observable: &AnchorObservable,
    tol: f64,
    window: Option<usize>,
) -> Result<AnchorVerdict> {
    if sequence.is_empty() {
        return Err(Error::invalid(
            "sequence",
            "anchor check needs a non-empty sequence",
        ));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid(
            "tol",
            format!("tolerance must be ≥ 0, got {tol}"),
        ));
    }
    let window = window.unwrap_or_else(|| sequence.len().div_ceil(4));
    if window == 0 || window > sequence.len() {
        return Err(Error::invalid(
            "window",
            format!("window must be in 1..={}, got {window}", sequence.len()),
        ));
    }
    let trajectory = sequence
        .par_iter()
        .map(|q| observable.evaluate(spec, p, q))
        .collect::<Result<Vec<f64>>>()?;
    let liminf_proxy = trajectory[trajectory.len() - window..]
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let pass = liminf_proxy >= observable.reference_value() - tol;
    Ok(AnchorVerdict {
        observable: observable.kind().label(),
        reference_value: observable.reference_value(),
        trajectory,
        window,
        liminf_proxy,
        tolerance: tol,
        pass,
    })
}

/// Per-step instruments recorded by the simulator.
#[derive(Debug, Clone, Serialize)]
pub struct StepDiagnostics {
    pub step: usize,
    /// `Z_p(q_k)` for the current empirical law.
    pub overlap: f64,
    /// `u_{q_k}(x*)` at each diagnostic anchor point.
    pub anchor_values: Vec<f64>,
    /// `sup ‖V_{p, q_k}‖` over the diagnostic grid; a proxy only, on the
    /// declared grid, not a pointwise-convergence certificate.
    pub field_sup: f64,
}

/// Trajectory of a synchronous particle drift run.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    /// Empirical law at each step, `steps + 1` entries including the
    /// initial state. Atom order is particle order.
    pub states: Vec<DiscreteMeasure>,
    /// Diagnostics at each state, same length as `states`.
    pub diagnostics: Vec<StepDiagnostics>,
    pub step_size: f64,
}

impl SimulationTrace {
    /// Particle `j`'s position at step `k`.
    pub fn position(&self, k: usize, j: usize) -> &[f64] {
        self.states[k].atom(j)
    }
}

/// Anchor points and grid the simulator measures its diagnostics on.
#[derive(Debug, Clone)]
pub struct DiagnosticsSpec {
    pub anchors: Vec<Vec<f64>>,
    pub grid: Vec<Vec<f64>>,
}

impl DiagnosticsSpec {
    /// Anchors at the target's atoms plus the origin; the grid reuses the
    /// anchor points.
    pub fn default_for(p: &DiscreteMeasure) -> Self {
        let anchors = default_anchor_points(p);
        Self {
            grid: anchors.clone(),
            anchors,
        }
    }
}

fn empirical(particles: &[Vec<f64>], dim: usize) -> Result<DiscreteMeasure> {
    let w = 1.0 / particles.len() as f64;
    crate::measures::make_discrete(particles.to_vec(), vec![w; particles.len()], true).and_then(
        |m| {
            if m.dim() != dim {
                Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                })
            } else {
                Ok(m)
            }
        },
    )
}

/// Runs the synchronous particle update
/// `xⱼ ← xⱼ + step_size · V_{p, q_k}(xⱼ)` with `q_k` the equal-weight
/// empirical law of the current particles. All particles advance on the
/// previous state; per-particle field evaluations run in parallel inside
/// the step barrier. Deterministic given inputs.
pub fn drift_simulate(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    particles0: &[Vec<f64>],
    steps: usize,
    step_size: f64,
    diagnostics: &DiagnosticsSpec,
) -> Result<SimulationTrace> {
    if particles0.is_empty() {
        return Err(Error::invalid("particles", "need at least one particle"));
    }
    if !(step_size > 0.0 && step_size <= 1.0) {
        return Err(Error::invalid(
            "step_size",
            format!("step size must lie in (0, 1], got {step_size}"),
        ));
    }
    if !p.is_probability() {
        return Err(Error::invalid(
            "p",
            "the target must be a probability measure",
        ));
    }
    let dim = spec.dim();
    let mut particles: Vec<Vec<f64>> = particles0.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    let mut diag = Vec::with_capacity(steps + 1);

    let mut q = empirical(&particles, dim)?;
    states.push(q.clone());
    diag.push(measure_diagnostics(spec, p, &q, 0, diagnostics)?);

    for k in 0..steps {
        let samples = drift_on_points(spec, p, &q, &particles)?;
        for (j, (x, s)) in particles.iter_mut().zip(&samples).enumerate() {
            for (xi, vi) in x.iter_mut().zip(&s.v) {
                *xi += step_size * vi;
            }
            if x.iter().any(|c| !c.is_finite()) {
                return Err(Error::Numerical(format!(
                    "particle {j} left the finite domain at step {}: {x:?}",
                    k + 1
                )));
            }
        }
        q = empirical(&particles, dim)?;
        states.push(q.clone());
        diag.push(measure_diagnostics(spec, p, &q, k + 1, diagnostics)?);
    }
    Ok(SimulationTrace {
        states,
        diagnostics: diag,
        step_size,
    })
}

fn measure_diagnostics(
    spec: &KernelSpec,
    p: &DiscreteMeasure,
    q: &DiscreteMeasure,
    step: usize,
    spec_pts: &DiagnosticsSpec,
) -> Result<StepDiagnostics> {
    let overlap = overlap_scalar(spec, p, q)?;
    let anchor_values = spec_pts
        .anchors
        .iter()
        .map(|x| Ok(kernel_mass(spec, q, x)?.0))
        .collect::<Result<Vec<f64>>>()?;
    let field_sup = if spec_pts.grid.is_empty() {
        0.0
    } else {
        let samples = drift_on_points(spec, p, q, &spec_pts.grid)?;
        sup_field_norm(&samples).0
    };
    Ok(StepDiagnostics {
        step,
        overlap,
        anchor_values,
        field_sup,
    })
}

/// Mean particle position of one simulation state.
pub fn state_mean(state: &DiscreteMeasure) -> Vec<f64> {
    let mut mean = vec![0.0; state.dim()];
    for (y, _) in state.iter() {
        for (mi, yi) in mean.iter_mut().zip(y) {
            *mi += yi;
        }
    }
    let n = state.len() as f64;
    for mi in &mut mean {
        *mi /= n;
    }
    mean
}
