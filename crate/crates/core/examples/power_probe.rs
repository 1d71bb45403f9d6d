//! Probe retrieval by power iteration: with the frames held fixed, repeated
//! power updates pull a perturbed probe back to the one that generated them.
//! The scan positions are jittered; a regular raster leaves probe
//! perturbations that are periodic in the scan step undetermined.
//!
//! ```bash
//! cargo run --release -p ptycho --example power_probe
//! ```

use ptycho::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ptycho::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let positions: Vec<[i64; 2]> = (0..12 * 12)
        .map(|i| [3 * (i / 12) + rng.random_range(-1..=1), 3 * (i % 12) + rng.random_range(-1..=1)])
        .collect();
    let g = ScanGeometry::new(48, 12, &positions)?;
    let psi = make_test_object(&PhantomSpec {
        n: 48,
        dc_fraction: 0.5,
        texture_seed: 8,
        texture_kind: TextureKind::Piecewise,
        smoothing_px: 2.0,
    })?;
    let w_true = make_probe(&ProbeSpec {
        m: 12,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: 4.5,
        defocus_phase_strength: 2.0,
        seed: 9,
    })?;
    let z = apply_q(&psi, &w_true, &g)?;
    let cfg = SolverConfig::default();

    let mut w = perturb_probe(&w_true, 2.0, 0.1, 10)?;
    let target = w.norm();
    for step in 0..=200 {
        if step % 20 == 0 {
            println!(
                "step {step:3}: nrmse {:.4e}, pairwise {:.4e}",
                nrmse_probe(&w, &w_true)?,
                pairwise_discrepancy(&z, &w, &g)?
            );
        }
        let next = update_probe_power(&z, &w, &g, &cfg)?;
        w = next.scaled(Complex64::new(target / next.norm(), 0.0));
    }
    Ok(())
}
