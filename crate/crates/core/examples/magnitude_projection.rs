//! Projects frames onto measured Fourier magnitudes and shows the projection
//! is idempotent and lands on the data.
//!
//! ```bash
//! cargo run --release -p ptycho --example magnitude_projection
//! ```

use ptycho::prelude::*;

fn main() -> ptycho::Result<()> {
    let g = make_raster_geometry(32, 8, 3, (8, 8))?;
    let spec = |seed| PhantomSpec {
        n: 32,
        dc_fraction: 0.8,
        texture_seed: seed,
        texture_kind: TextureKind::Smooth,
        smoothing_px: 2.0,
    };
    let w = make_probe(&ProbeSpec {
        m: 8,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: 3.0,
        defocus_phase_strength: 2.0,
        seed: 1,
    })?;
    let a = simulate_data(&make_test_object(&spec(1))?, &w, &g)?;

    // frames of a different object: right shape, wrong data
    let z = apply_q(&make_test_object(&spec(2))?, &w, &g)?;
    let plan = FourierPlan::new(g.m());
    let once = plan.magnitude_project(&z, &a)?;
    let twice = plan.magnitude_project(&once, &a)?;
    println!("data residual before {:.4e}", data_residual(&z, &a)?);
    println!("data residual after  {:.4e}", data_residual(&once, &a)?);
    println!("idempotence          {:.4e}", twice.sub(&once).norm() / once.norm());

    let round_trip = frame_idft(&frame_dft(&z));
    println!("unitary round trip   {:.4e}", round_trip.sub(&z).norm() / z.norm());
    println!("Parseval             {:.4e}", (frame_dft(&z).norm() - z.norm()).abs() / z.norm());
    Ok(())
}
