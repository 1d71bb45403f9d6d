//! Reconstruction updates and the outer alternating-projection loop.
//!
//! Probe updates come in three flavours:
//!
//! * `standard`: per-pixel least squares against the current object.
//! * `power`: one power-iteration step `w ← D⁻¹ A w` on the quadratic form
//!   `w* (D − A) w`, which equals the pairwise frame discrepancy
//!   `z* (Q² − P) z` read as a function of the probe.
//! * `rank1_*`: the same power step after subtracting the estimated
//!   transparency (the object's average transmission) from the frames,
//!   which removes the dominant slowly-converging direction for
//!   weak-contrast objects.

mod center;
mod config;
mod reconstruct;
mod transparency;
mod updates;

pub use center::{center_of_mass, center_probe, roll};
pub use config::{InitFrames, ProbeMode, SolverConfig};
pub use reconstruct::{run_reconstruction, History, IterationState, Reconstruction, SolverEvent};
pub use transparency::{
    build_overlap_matrix, transparency_framewise, transparency_global, transparency_map,
    update_probe_rank1, update_probe_rank1_expanded, OverlapMatrix, TransparencyEstimate,
};
pub use updates::{
    frame_consistency_project, pairwise_discrepancy, pairwise_discrepancy_with, update_frames,
    update_object, update_object_with, update_probe_power, update_probe_standard,
};
