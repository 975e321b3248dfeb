//! One function per subcommand. Each realizes its inputs from the run
//! config, drives the owning library module, writes CSV/JSON reports into
//! the output directory, and returns whether the scientific assertions
//! passed. All outputs are byte-stable given config + seed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use driftlab::config::{parse_kernel, parse_measure};
use driftlab::counterexamples::{
    satellite_experiment, tilt_experiment, SatelliteSchedule, TiltSchedule,
};
use driftlab::field::{drift_on_points, sup_field_norm, GridSpec};
use driftlab::identities::{run_all, run_explicit, VerifierReport};
use driftlab::measures::make_discrete;
use driftlab::report::{fmt_float, write_csv};
use driftlab::stability::{
    anchor_check, drift_simulate, AnchorKind, AnchorObservable, DiagnosticsSpec,
};
use driftlab::{DiscreteMeasure, Error, KernelSpec, Result};
use serde_json::json;

use crate::runcfg::RunConfig;

/// Everything a command needs besides its own section.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub config_hash: String,
    pub seed: u64,
}

impl Ctx<'_> {
    fn kernel(&self) -> Result<KernelSpec> {
        parse_kernel(self.cfg.kernel_text(), self.cfg.dim())
    }

    fn measure(&self, text: &str, spec: &KernelSpec) -> Result<DiscreteMeasure> {
        let disc = self.cfg.discretization();
        parse_measure(text)?.realize(spec.dim(), &disc)
    }

    /// ½δ₋₁ + ½δ₊₁ on the first axis: the default target for the satellite,
    /// anchor, field, and simulate commands.
    fn default_pair(&self, dim: usize) -> DiscreteMeasure {
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        a[0] = -1.0;
        b[0] = 1.0;
        make_discrete(vec![a, b], vec![0.5, 0.5], false).expect("static atoms")
    }

    fn write_json(&self, name: &str, value: serde_json::Value) -> Result<()> {
        let path = self.out.join(name);
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, &value).map_err(std::io::Error::from)?;
        writeln!(w)?;
        Ok(())
    }

    fn write_rows(
        &self,
        name: &str,
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<()> {
        let path = self.out.join(name);
        let mut w = BufWriter::new(File::create(path)?);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_csv(&mut w, &header, rows)?;
        Ok(())
    }
}

fn axis_headers(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}_{i}")).collect()
}

/// Runs every applicable identity verifier; exit is pass iff all pass.
pub fn cmd_identities(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let section = ctx.cfg.identities.as_ref();
    let texts: Vec<String> = section
        .and_then(|s| s.measures.clone())
        .unwrap_or_else(|| vec!["dirac(x=0)".to_string()]);
    let random = section.and_then(|s| s.random_measures).unwrap_or(6);
    let max_atoms = section.and_then(|s| s.max_atoms).unwrap_or(32);
    let points = section.and_then(|s| s.points).unwrap_or(10);

    let mut explicit = Vec::with_capacity(texts.len());
    for t in &texts {
        explicit.push(ctx.measure(t, &spec)?);
    }
    let mut reports: Vec<VerifierReport> = run_explicit(&spec, &explicit, points, ctx.seed)?;
    reports.extend(run_all(&spec, random, max_atoms, points, ctx.seed)?);
    let pass = reports.iter().all(|r| r.pass);

    ctx.write_json(
        "identities.json",
        json!({
            "command": "identities",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": spec.dim(),
            "explicit_measures": texts,
            "random_measures": random,
            "reports": reports,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}

pub fn cmd_satellite(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let dim = spec.dim();
    let s = ctx.cfg.satellite.as_ref();
    let base = match s.and_then(|s| s.base.as_deref()) {
        Some(text) => ctx.measure(text, &spec)?,
        None => ctx.default_pair(dim),
    };
    let eps = s.and_then(|s| s.eps).unwrap_or(0.3);
    let positions = match s.and_then(|s| s.positions.clone()) {
        Some(p) => p,
        None => (1..=8)
            .map(|n| {
                let mut z = vec![0.0; dim];
                z[0] = 4.0 * n as f64;
                z
            })
            .collect(),
    };
    let radius = s.and_then(|s| s.grid_radius).unwrap_or(5.0);
    let spacing = s.and_then(|s| s.grid_spacing).unwrap_or(0.1);
    let grid = GridSpec::new(radius, spacing)?;
    let schedule = SatelliteSchedule {
        base,
        eps,
        positions,
        compact_grid: grid.points(dim)?,
        grid_radius: radius,
    };
    let report = satellite_experiment(&spec, &schedule)?;

    let header: Vec<String> = [
        "n",
        "z_norm",
        "sup_V_grid",
        "tail_mass",
        "analytic_bound",
        "inside_compact",
    ]
    .map(str::to_string)
    .to_vec();
    ctx.write_rows(
        "satellite.csv",
        &header,
        report.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_float(r.z_norm),
                fmt_float(r.sup_v_grid),
                fmt_float(r.tail_mass),
                fmt_float(r.analytic_bound),
                r.inside_compact.to_string(),
            ]
        }),
    )?;
    ctx.write_json(
        "satellite.json",
        json!({
            "command": "satellite",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": dim,
            "report": report,
        }),
    )?;
    Ok(report.pass)
}

pub fn cmd_tilt(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let dim = spec.dim();
    let s = ctx.cfg.tilt.as_ref();
    let radius = s.and_then(|s| s.grid_radius).unwrap_or(10.0);
    let spacing = s.and_then(|s| s.grid_spacing).unwrap_or(0.1);
    let schedule = TiltSchedule {
        m: s.and_then(|s| s.m).unwrap_or(dim as f64 + 2.0),
        n_values: s
            .and_then(|s| s.n_values.clone())
            .unwrap_or(vec![2, 4, 8, 16]),
        eval_grid: GridSpec::new(radius, spacing)?.points(dim)?,
        lambda: s.and_then(|s| s.lambda).unwrap_or(0.5),
        cells: s.and_then(|s| s.cells).unwrap_or(1200),
        sectors: s.and_then(|s| s.sectors).unwrap_or(64),
        seed: ctx.seed,
    };
    let report = tilt_experiment(&spec, &schedule)?;

    let header: Vec<String> = [
        "n",
        "alpha_n",
        "alpha_over_n",
        "Z_n",
        "sup_V_grid",
        "tail_mass",
        "analytic_bound",
    ]
    .map(str::to_string)
    .to_vec();
    ctx.write_rows(
        "tilt.csv",
        &header,
        report.rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_float(r.alpha_n),
                fmt_float(r.alpha_over_n),
                fmt_float(r.z_n),
                fmt_float(r.sup_v_grid),
                fmt_float(r.tail_mass),
                fmt_float(r.analytic_bound),
            ]
        }),
    )?;
    ctx.write_json(
        "tilt.json",
        json!({
            "command": "tilt",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": dim,
            "report": report,
        }),
    )?;
    Ok(report.pass)
}

pub fn cmd_field(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let dim = spec.dim();
    let s = ctx.cfg.field.as_ref();
    let p_text = s
        .and_then(|s| s.p.clone())
        .unwrap_or_else(|| "dirac(x=0)".to_string());
    let q_text = s
        .and_then(|s| s.q.clone())
        .unwrap_or_else(|| p_text.clone());
    let p = ctx.measure(&p_text, &spec)?;
    let q = ctx.measure(&q_text, &spec)?;
    let radius = s.and_then(|s| s.grid_radius).unwrap_or(5.0);
    let spacing = s.and_then(|s| s.grid_spacing).unwrap_or(0.1);
    let grid = GridSpec::new(radius, spacing)?.points(dim)?;
    let samples = drift_on_points(&spec, &p, &q, &grid)?;
    let (sup, arg) = sup_field_norm(&samples);

    let mut header = axis_headers("x", dim);
    header.push("u_p".to_string());
    header.push("u_q".to_string());
    header.extend(axis_headers("a_p", dim));
    header.extend(axis_headers("a_q", dim));
    header.extend(axis_headers("V", dim));
    header.push("V_norm".to_string());
    ctx.write_rows(
        "field.csv",
        &header,
        samples.iter().map(|smp| {
            let norm = smp.v.iter().map(|v| v * v).sum::<f64>().sqrt();
            smp.x
                .iter()
                .map(|v| fmt_float(*v))
                .chain([fmt_float(smp.u_p), fmt_float(smp.u_q)])
                .chain(smp.a_p.iter().map(|v| fmt_float(*v)))
                .chain(smp.a_q.iter().map(|v| fmt_float(*v)))
                .chain(smp.v.iter().map(|v| fmt_float(*v)))
                .chain([fmt_float(norm)])
                .collect()
        }),
    )?;
    ctx.write_json(
        "field.json",
        json!({
            "command": "field",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": dim,
            "p": p_text,
            "q": q_text,
            "grid_points": samples.len(),
            "sup_V": sup,
            "argmax": arg,
        }),
    )?;
    Ok(true)
}

pub fn cmd_anchor(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let dim = spec.dim();
    let s = ctx.cfg.anchor.as_ref();
    let p = match s.and_then(|s| s.p.as_deref()) {
        Some(text) => ctx.measure(text, &spec)?,
        None => ctx.default_pair(dim),
    };
    let sequence = match s.and_then(|s| s.sequence.clone()) {
        Some(texts) => texts
            .iter()
            .map(|t| ctx.measure(t, &spec))
            .collect::<Result<Vec<_>>>()?,
        None => vec![p.clone(); 4],
    };
    let kind_text = s
        .and_then(|s| s.observable.clone())
        .unwrap_or_else(|| "overlap".to_string());
    let x_star = s
        .and_then(|s| s.x_star.clone())
        .unwrap_or_else(|| vec![0.0; dim]);
    let kind = match kind_text.as_str() {
        "overlap" => AnchorKind::Overlap,
        "kernel_section" => AnchorKind::KernelSection { x_star },
        "companion_section" => AnchorKind::CompanionSection { x_star },
        other => {
            return Err(Error::Parse {
                context: "anchor.observable".to_string(),
                message: format!(
                    "unknown observable `{other}`; expected overlap, \
                     kernel_section, or companion_section"
                ),
            })
        }
    };
    let observable = AnchorObservable::new(&spec, &p, kind)?;
    let tol = s.and_then(|s| s.tol).unwrap_or(1e-9);
    let window = s.and_then(|s| s.window);
    let verdict = anchor_check(&spec, &p, &sequence, &observable, tol, window)?;
    let pass = verdict.pass;

    ctx.write_json(
        "anchor.json",
        json!({
            "command": "anchor",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": dim,
            "verdict": verdict,
        }),
    )?;
    Ok(pass)
}

pub fn cmd_simulate(ctx: &Ctx) -> Result<bool> {
    let spec = ctx.kernel()?;
    let dim = spec.dim();
    let s = ctx.cfg.simulate.as_ref();
    let p = match s.and_then(|s| s.p.as_deref()) {
        Some(text) => ctx.measure(text, &spec)?,
        None => DiscreteMeasure::dirac(&vec![0.0; dim][..])?,
    };
    let particles = s.and_then(|s| s.particles.clone()).unwrap_or_else(|| {
        let mut x = vec![0.0; dim];
        x[0] = -5.0;
        vec![x]
    });
    let steps = s.and_then(|s| s.steps).unwrap_or(30);
    let step_size = s.and_then(|s| s.step_size).unwrap_or(0.5);
    let mut diagnostics = DiagnosticsSpec::default_for(&p);
    if let (Some(radius), Some(spacing)) = (
        s.and_then(|s| s.grid_radius),
        s.and_then(|s| s.grid_spacing),
    ) {
        diagnostics.grid = GridSpec::new(radius, spacing)?.points(dim)?;
    }
    let trace = drift_simulate(&spec, &p, &particles, steps, step_size, &diagnostics)?;

    let mut header = vec!["step".to_string(), "particle".to_string()];
    header.extend(axis_headers("x", dim));
    ctx.write_rows(
        "trajectory.csv",
        &header,
        trace.states.iter().enumerate().flat_map(|(k, state)| {
            (0..state.len())
                .map(|j| {
                    let mut row = vec![k.to_string(), j.to_string()];
                    row.extend(state.atom(j).iter().map(|v| fmt_float(*v)));
                    row
                })
                .collect::<Vec<_>>()
        }),
    )?;

    let mut header = vec!["step".to_string(), "overlap".to_string()];
    header.extend((1..=diagnostics.anchors.len()).map(|i| format!("anchor_{i}")));
    header.push("field_sup".to_string());
    ctx.write_rows(
        "diagnostics.csv",
        &header,
        trace.diagnostics.iter().map(|d| {
            let mut row = vec![d.step.to_string(), fmt_float(d.overlap)];
            row.extend(d.anchor_values.iter().map(|v| fmt_float(*v)));
            row.push(fmt_float(d.field_sup));
            row
        }),
    )?;

    ctx.write_json(
        "simulate.json",
        json!({
            "command": "simulate",
            "config_hash": ctx.config_hash,
            "seed": ctx.seed,
            "kernel": ctx.cfg.kernel_text(),
            "dim": dim,
            "particles": particles.len(),
            "steps": steps,
            "step_size": step_size,
            "final_diagnostics": trace.diagnostics.last(),
        }),
    )?;
    Ok(true)
}
