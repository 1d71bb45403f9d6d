//! Blind ptychographic reconstruction: joint recovery of an object and its
//! illumination (probe) from far-field diffraction amplitudes.
//!
//! The forward model is `a = |F Q ψ|` with `Q = diag(S w) T`: `T` cuts `K`
//! circular `m`×`m` windows from the `n`×`n` object `ψ`, `S` replicates the
//! probe `w` onto every window and `F` is a per-frame unitary 2D DFT.
//!
//! Reconstruction alternates an object least-squares fit, a probe update and
//! a Fourier-magnitude projection. Besides the classic least-squares probe
//! update the crate provides a power-iteration update that minimizes the
//! pairwise discrepancy between overlapping frames, and a rank-1 variant
//! that first removes the object's estimated average transmission, aimed at
//! weak-contrast objects.
//!
//! ```no_run
//! use ptycho::prelude::*;
//!
//! # fn main() -> ptycho::Result<()> {
//! let g = make_raster_geometry(64, 16, 4, (13, 13))?;
//! let psi = make_test_object(&PhantomSpec {
//!     n: 64,
//!     dc_fraction: 0.99,
//!     texture_seed: 1,
//!     texture_kind: TextureKind::Smooth,
//!     smoothing_px: 2.0,
//! })?;
//! let w = make_probe(&ProbeSpec {
//!     m: 16,
//!     kind: ProbeKind::ApertureGauss,
//!     aperture_radius_px: 6.0,
//!     defocus_phase_strength: 3.0,
//!     seed: 2,
//! })?;
//! let a = simulate_data(&psi, &w, &g)?;
//! let start = perturb_probe(&w, 2.0, 0.05, 3)?;
//! let cfg = SolverConfig { probe_mode: ProbeMode::Rank1Global, max_iters: 200, ..Default::default() };
//! let history = run_reconstruction(&a, &g, &start, &cfg, Some(&w))?;
//! println!("reached 0.1 after {:?} iterations", history.iterations_to(0.1));
//! # Ok(())
//! # }
//! ```

pub mod arrays;
pub mod dense;
pub mod error;
pub mod fourier;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod solver;
pub mod synth;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::arrays::{FrameStack, ObjectImage, Probe};
    pub use crate::error::{Error, Result};
    pub use crate::fourier::{frame_dft, frame_idft, magnitude_project, DiffractionAmplitudes, FourierPlan};
    pub use crate::geometry::ScanGeometry;
    pub use crate::metrics::{data_residual, nrmse_probe, MetricsRow};
    pub use crate::operators::{
        apply_q, apply_q_adjoint, coverage_maps, embed_add_frames, extract_frames, replicate_probe,
        sum_frames, CoverageMaps,
    };
    pub use crate::solver::*;
    pub use crate::synth::{
        make_probe, make_raster_geometry, make_test_object, perturb_probe, simulate_data, PhantomSpec,
        ProbeKind, ProbeSpec, TextureKind,
    };
    pub use num_complex::Complex64;
}
