use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScanGeometry;
use crate::solver::SolverConfig;
use crate::synth::{make_raster_geometry, PhantomSpec, ProbeSpec};

/// Scan layout: either a raster (`step` + `grid`) or explicit `positions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub n: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[i64; 2]>>,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<ScanGeometry> {
        match (self.step, self.grid, &self.positions) {
            (Some(step), Some(grid), None) => make_raster_geometry(self.n, self.m, step, (grid[0], grid[1])),
            (None, None, Some(p)) => ScanGeometry::new(self.n, self.m, p),
            _ => Err(Error::Config(
                "geometry needs either `step` and `grid`, or `positions`".into(),
            )),
        }
    }
}

/// How the true probe is degraded into the initial guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub blur_sigma_px: f64,
    pub noise_level: f64,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec {
            blur_sigma_px: 2.0,
            noise_level: 0.05,
            seed: 0,
        }
    }
}

fn one() -> usize {
    1
}

/// Complete description of one synthetic experiment and its reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub phantom: PhantomSpec,
    pub probe: ProbeSpec,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    #[serde(default = "one")]
    pub record_every: usize,
}

impl RunConfig {
    /// Parses and validates a JSON config. Errors name the offending field
    /// and its line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config(format!("field `{path}`: {inner}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.geometry.build()?;
        if self.phantom.n != g.n() {
            return Err(Error::Config(format!(
                "field `phantom.n`: {} differs from geometry.n = {}",
                self.phantom.n,
                g.n()
            )));
        }
        if self.probe.m != g.m() {
            return Err(Error::Config(format!(
                "field `probe.m`: {} differs from geometry.m = {}",
                self.probe.m,
                g.m()
            )));
        }
        if !(0.0..1.0).contains(&self.phantom.dc_fraction) {
            return Err(Error::Config(format!(
                "field `phantom.dc_fraction`: {} is outside [0, 1)",
                self.phantom.dc_fraction
            )));
        }
        let r = self.probe.aperture_radius_px;
        if !(r > 0.0 && r <= g.m() as f64 / 2.0) {
            return Err(Error::Config(format!(
                "field `probe.aperture_radius_px`: {r} is outside (0, m/2]"
            )));
        }
        if !(self.perturbation.blur_sigma_px >= 0.0 && self.perturbation.noise_level >= 0.0) {
            return Err(Error::Config("field `perturbation`: blur and noise must be >= 0".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Config("field `record_every`: must be at least 1".into()));
        }
        self.solver.validate()
    }
}
