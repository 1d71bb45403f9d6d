use std::fmt;
use std::path::Path;

use ndarray::{Ix2, Ix3};
use num_complex::Complex64;

use super::config::RunConfig;
use super::{csv, npy, write_atomic};
use crate::arrays::Probe;
use crate::error::{Error, Result};
use crate::fourier::DiffractionAmplitudes;
use crate::geometry::ScanGeometry;
use crate::metrics::MetricsRow;
use crate::solver::{run_reconstruction, History};
use crate::synth::{dc_energy_fraction, make_probe, make_test_object, perturb_probe, simulate_data};

pub const OBJECT_FILE: &str = "object.npy";
pub const PROBE_TRUE_FILE: &str = "probe_true.npy";
pub const AMPLITUDES_FILE: &str = "amplitudes.npy";
pub const GEOMETRY_FILE: &str = "geometry.json";
pub const PROBE_EST_FILE: &str = "probe_est.npy";
pub const OBJECT_EST_FILE: &str = "object_est.npy";
pub const CONVERGENCE_FILE: &str = "convergence.csv";

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSummary {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub dc_fraction: f64,
}

impl fmt::Display for SimulateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "simulated K={} n={} m={} dc_fraction={:.6}",
            self.k, self.n, self.m, self.dc_fraction
        )
    }
}

/// Builds the phantom, the true probe and their amplitudes, and writes them
/// with the scan geometry into `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<SimulateSummary> {
    cfg.validate()?;
    let g = cfg.geometry.build()?;
    let psi = make_test_object(&cfg.phantom)?;
    let w = make_probe(&cfg.probe)?;
    let a = simulate_data(&psi, &w, &g)?;
    ensure_dir(out)?;
    npy::write(&out.join(OBJECT_FILE), &psi.values)?;
    npy::write(&out.join(PROBE_TRUE_FILE), &w.values)?;
    npy::write(&out.join(AMPLITUDES_FILE), a.values())?;
    let geometry_json = serde_json::to_string_pretty(&g).expect("geometry serializes");
    write_atomic(&out.join(GEOMETRY_FILE), geometry_json.as_bytes())?;
    Ok(SimulateSummary {
        k: g.k(),
        n: g.n(),
        m: g.m(),
        dc_fraction: dc_energy_fraction(&psi),
    })
}

#[derive(Debug, Clone)]
pub struct ReconstructSummary {
    pub iterations: usize,
    pub final_row: MetricsRow,
    pub converged: bool,
    pub fallbacks: usize,
}

impl fmt::Display for ReconstructSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nrmse = self
            .final_row
            .nrmse_probe
            .map(|v| format!("{v:.6e}"))
            .unwrap_or_else(|| "n/a".into());
        write!(
            f,
            "iterations={} nrmse_probe={} data_residual={:.6e} converged={} rank1_fallbacks={}",
            self.iterations, nrmse, self.final_row.data_residual, self.converged, self.fallbacks
        )
    }
}

fn load_geometry(path: &Path) -> Result<ScanGeometry> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Rows at multiples of `every`, plus the final row.
fn recorded_rows(history: &History, every: usize) -> Vec<MetricsRow> {
    let last = history.rows.last().map(|r| r.iter);
    history
        .rows
        .iter()
        .filter(|r| r.iter % every == 0 || Some(r.iter) == last)
        .cloned()
        .collect()
}

/// Reconstructs a dataset written by [`cmd_simulate`], starting from the
/// perturbed true probe, and writes estimates and the convergence trace.
pub fn cmd_reconstruct(cfg: &RunConfig, dataset: &Path, out: &Path) -> Result<ReconstructSummary> {
    cfg.validate()?;
    let g = cfg.geometry.build()?;
    let stored = load_geometry(&dataset.join(GEOMETRY_FILE))?;
    if stored != g {
        return Err(Error::Config(format!(
            "dataset geometry (n={}, m={}, K={}) does not match the config (n={}, m={}, K={})",
            stored.n(),
            stored.m(),
            stored.k(),
            g.n(),
            g.m(),
            g.k()
        )));
    }
    let a = DiffractionAmplitudes::new(npy::read_dim::<f64, Ix3>(&dataset.join(AMPLITUDES_FILE))?)?;
    let w_true = Probe::new(npy::read_dim::<Complex64, Ix2>(&dataset.join(PROBE_TRUE_FILE))?)?;
    let p = &cfg.perturbation;
    let w_init = perturb_probe(&w_true, p.blur_sigma_px, p.noise_level, p.seed)?;
    let history = run_reconstruction(&a, &g, &w_init, &cfg.solver, Some(&w_true))?;

    ensure_dir(out)?;
    let state = &history.final_state;
    npy::write(&out.join(PROBE_EST_FILE), &state.w.values)?;
    npy::write(&out.join(OBJECT_EST_FILE), &state.psi.values)?;
    csv::write(&out.join(CONVERGENCE_FILE), &recorded_rows(&history, cfg.record_every))?;
    Ok(ReconstructSummary {
        iterations: state.iter,
        final_row: history.rows.last().cloned().expect("history has an initial row"),
        converged: history.converged,
        fallbacks: history
            .events
            .iter()
            .filter(|e| matches!(e, crate::solver::SolverEvent::Rank1Fallback { .. }))
            .count(),
    })
}

/// Iterations each run needed to reach a probe-NRMSE threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub threshold: f64,
    pub iters_a: Option<usize>,
    pub iters_b: Option<usize>,
}

impl CompareReport {
    /// `iters_a / iters_b` when both runs reached the threshold.
    pub fn ratio(&self) -> Option<f64> {
        match (self.iters_a, self.iters_b) {
            (Some(0), Some(0)) => Some(1.0),
            (Some(a), Some(b)) => Some(a as f64 / b as f64),
            _ => None,
        }
    }

    /// Run A reached the threshold in at most half of run B's iterations.
    pub fn passed(&self) -> bool {
        self.ratio().is_some_and(|r| r <= 0.5)
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<usize>| v.map(|i| i.to_string()).unwrap_or_else(|| "not reached".into());
        write!(
            f,
            "threshold={} a={} b={} ratio={} speedup_2x={}",
            self.threshold,
            show(self.iters_a),
            show(self.iters_b),
            self.ratio().map(|r| format!("{r:.4}")).unwrap_or_else(|| "n/a".into()),
            if self.passed() { "yes" } else { "no" }
        )
    }
}

fn first_reaching(rows: &[MetricsRow], threshold: f64, path: &Path) -> Result<Option<usize>> {
    if rows.iter().all(|r| r.nrmse_probe.is_none()) {
        return Err(Error::Csv {
            path: path.to_path_buf(),
            msg: "nrmse_probe column is empty".into(),
        });
    }
    Ok(rows
        .iter()
        .find(|r| r.nrmse_probe.is_some_and(|e| e <= threshold))
        .map(|r| r.iter))
}

/// Compares two convergence traces at a probe-NRMSE threshold.
pub fn cmd_compare(csv_a: &Path, csv_b: &Path, threshold: f64) -> Result<CompareReport> {
    let a = first_reaching(&csv::read(csv_a)?, threshold, csv_a)?;
    let b = first_reaching(&csv::read(csv_b)?, threshold, csv_b)?;
    if a.is_none() && b.is_none() {
        return Err(Error::InvalidInput(format!(
            "neither run reaches nrmse_probe <= {threshold}"
        )));
    }
    Ok(CompareReport {
        threshold,
        iters_a: a,
        iters_b: b,
    })
}
