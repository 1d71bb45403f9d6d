//! Simulates a small dataset and checks the matrix-free forward model against
//! its dense matrix form and its adjoint.
//!
//! ```bash
//! cargo run --release -p ptycho --example forward_model
//! ```

use ndarray::Array1;
use ptycho::dense::{dense_operators, object_vector, stack_vector};
use ptycho::prelude::*;

fn main() -> ptycho::Result<()> {
    let g = make_raster_geometry(12, 6, 3, (4, 4))?;
    let psi = make_test_object(&PhantomSpec {
        n: 12,
        dc_fraction: 0.6,
        texture_seed: 3,
        texture_kind: TextureKind::Piecewise,
        smoothing_px: 1.0,
    })?;
    let w = make_probe(&ProbeSpec {
        m: 6,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: 2.5,
        defocus_phase_strength: 1.0,
        seed: 4,
    })?;
    println!("K={} n={} m={}", g.k(), g.n(), g.m());

    let z = apply_q(&psi, &w, &g)?;
    let dense = dense_operators(&w, &g)?;
    let z_dense: Array1<Complex64> = dense.q.dot(&object_vector(&psi));
    let diff = (&z_dense - &stack_vector(&z)).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    println!("|Q psi - dense Q psi| / |Q psi| = {:.2e}", diff / z.norm());

    // <Q psi, y> against <psi, Q* y> for an unrelated frame stack y
    let y = apply_q(&psi, &perturb_probe(&w, 1.0, 0.5, 9)?, &g)?;
    let lhs = z.inner(&y);
    let back = apply_q_adjoint(&y, &w, &g)?;
    let rhs: Complex64 = psi.values.iter().zip(back.values.iter()).map(|(p, b)| p.conj() * b).sum();
    println!("adjoint mismatch {:.2e}", (lhs - rhs).norm() / lhs.norm());

    let a = simulate_data(&psi, &w, &g)?;
    println!(
        "|a| = {:.6}, |Q psi| = {:.6}, data residual of Q psi {:.2e}",
        a.norm(),
        z.norm(),
        data_residual(&z, &a)?
    );
    Ok(())
}
