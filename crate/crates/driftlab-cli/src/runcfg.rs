//! TOML run configuration: top-level kernel/dim/seed plus one optional
//! section per subcommand. Every field has a shipped default, so each
//! subcommand runs without a config file at all.

use driftlab::config::DiscretizationParams;
use driftlab::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: Option<String>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub discretization: Option<DiscSection>,
    pub identities: Option<IdentitiesSection>,
    pub satellite: Option<SatelliteSection>,
    pub tilt: Option<TiltSection>,
    pub field: Option<FieldSection>,
    pub anchor: Option<AnchorSection>,
    pub simulate: Option<SimulateSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscSection {
    pub r_max: Option<f64>,
    pub cells: Option<usize>,
    pub sectors: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesSection {
    /// Measure expressions checked explicitly, in order.
    pub measures: Option<Vec<String>>,
    /// Extra randomly sampled measures (the spectral checks always run).
    pub random_measures: Option<usize>,
    pub max_atoms: Option<usize>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteSection {
    /// Base measure expression; the default is the two-atom pair
    /// ½δ₋₁ + ½δ₊₁ (on the first axis for d > 1).
    pub base: Option<String>,
    pub eps: Option<f64>,
    /// Satellite positions, one per schedule row.
    pub positions: Option<Vec<Vec<f64>>>,
    pub grid_radius: Option<f64>,
    pub grid_spacing: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TiltSection {
    pub m: Option<f64>,
    pub n_values: Option<Vec<u32>>,
    pub lambda: Option<f64>,
    pub grid_radius: Option<f64>,
    pub grid_spacing: Option<f64>,
    pub cells: Option<usize>,
    pub sectors: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub p: Option<String>,
    /// Defaults to `p`, which makes the field identically zero.
    pub q: Option<String>,
    pub grid_radius: Option<f64>,
    pub grid_spacing: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorSection {
    pub p: Option<String>,
    /// Measure expressions forming the sequence q_1, q_2, ...
    pub sequence: Option<Vec<String>>,
    /// "overlap" (default), "kernel_section", or "companion_section".
    pub observable: Option<String>,
    /// Section point for the section observables; defaults to the origin.
    pub x_star: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub window: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub p: Option<String>,
    pub particles: Option<Vec<Vec<f64>>>,
    pub steps: Option<usize>,
    pub step_size: Option<f64>,
    /// Optional diagnostic grid; defaults to the target's anchor points.
    pub grid_radius: Option<f64>,
    pub grid_spacing: Option<f64>,
}

impl RunConfig {
    /// Parses TOML text; an empty string is the all-defaults config.
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            context: "config".to_string(),
            message: e.to_string(),
        })
    }

    pub fn kernel_text(&self) -> &str {
        self.kernel.as_deref().unwrap_or("laplace(tau=1)")
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(1)
    }

    /// Config seed, overridden by the command line when given there.
    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(7)
    }

    pub fn discretization(&self) -> DiscretizationParams {
        let d = DiscretizationParams::default();
        let s = self.discretization.as_ref();
        DiscretizationParams {
            r_max: s.and_then(|s| s.r_max).unwrap_or(d.r_max),
            cells: s.and_then(|s| s.cells).unwrap_or(d.cells),
            sectors: s.and_then(|s| s.sectors).unwrap_or(d.sectors),
        }
    }
}
