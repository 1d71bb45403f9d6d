//! Pairwise discrepancy between overlapping frames and the frame-consistency
//! projection that removes it.
//!
//! ```bash
//! cargo run --release -p ptycho --example pairwise_consistency
//! ```

use ptycho::prelude::*;

fn main() -> ptycho::Result<()> {
    let g = make_raster_geometry(32, 8, 3, (8, 8))?;
    let psi = make_test_object(&PhantomSpec {
        n: 32,
        dc_fraction: 0.7,
        texture_seed: 5,
        texture_kind: TextureKind::Piecewise,
        smoothing_px: 2.0,
    })?;
    let w = make_probe(&ProbeSpec {
        m: 8,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: 3.0,
        defocus_phase_strength: 1.5,
        seed: 6,
    })?;
    let cfg = SolverConfig::default();

    let consistent = apply_q(&psi, &w, &g)?;
    println!("consistent frames:   {:.3e}", pairwise_discrepancy(&consistent, &w, &g)?);

    // Fourier-projecting frames from a wrong probe breaks consistency
    let a = simulate_data(&psi, &w, &g)?;
    let wrong = perturb_probe(&w, 1.5, 0.2, 7)?;
    let mut z = magnitude_project(&apply_q(&psi, &wrong, &g)?, &a)?;
    for round in 0..5 {
        let before = pairwise_discrepancy(&z, &w, &g)?;
        let projected = frame_consistency_project(&z, &w, &g, &cfg)?;
        let after = pairwise_discrepancy(&projected, &w, &g)?;
        println!("round {round}: discrepancy {before:.4e} -> {after:.4e} after projection");
        z = magnitude_project(&projected, &a)?;
    }
    Ok(())
}
