//! File formats and the subcommand drivers behind the `ptycho` binary.
//!
//! * arrays: NPY 1.0, `complex128` for fields, `float64` for amplitudes;
//! * configuration: one strict JSON document ([`RunConfig`]);
//! * convergence traces: CSV with header
//!   `iter,nrmse_probe,data_residual,pairwise,wall_ms`.

mod commands;
mod config;
pub mod csv;
pub mod npy;

use std::io::Write;
use std::path::Path;

pub use commands::{
    cmd_compare, cmd_reconstruct, cmd_simulate, CompareReport, ReconstructSummary, SimulateSummary,
    AMPLITUDES_FILE, CONVERGENCE_FILE, GEOMETRY_FILE, OBJECT_EST_FILE, OBJECT_FILE, PROBE_EST_FILE,
    PROBE_TRUE_FILE,
};
pub use config::{GeometryConfig, PerturbationSpec, RunConfig};

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
