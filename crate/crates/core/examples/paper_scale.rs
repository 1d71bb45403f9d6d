//! Full-size run: a 223×223 object scanned by a 128×128 probe on a 20×20
//! raster, reconstructed with the rank-1 probe update.
//!
//! ```bash
//! cargo run --release -p ptycho --example paper_scale -- [iterations] [mode]
//! ```

use ptycho::prelude::*;

fn main() -> ptycho::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iters = args.first().and_then(|s| s.parse().ok()).unwrap_or(50);
    let mode = match args.get(1).map(String::as_str) {
        Some("standard") => ProbeMode::Standard,
        Some("power") => ProbeMode::Power,
        Some("rank1_framewise") => ProbeMode::Rank1Framewise,
        _ => ProbeMode::Rank1Global,
    };

    let g = make_raster_geometry(223, 128, 5, (20, 20))?;
    let psi = make_test_object(&PhantomSpec {
        n: 223,
        dc_fraction: 0.99,
        texture_seed: 11,
        texture_kind: TextureKind::Smooth,
        smoothing_px: 4.0,
    })?;
    let w = make_probe(&ProbeSpec {
        m: 128,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: 40.0,
        defocus_phase_strength: 6.0,
        seed: 12,
    })?;
    let t = std::time::Instant::now();
    let a = simulate_data(&psi, &w, &g)?;
    println!("simulated K={} in {:.2} s", g.k(), t.elapsed().as_secs_f64());

    let start = perturb_probe(&w, 2.0, 0.05, 13)?;
    let cfg = SolverConfig {
        probe_mode: mode,
        max_iters: iters,
        ..Default::default()
    };
    let t = std::time::Instant::now();
    let h = run_reconstruction(&a, &g, &start, &cfg, Some(&w))?;
    for r in h.rows.iter().filter(|r| r.iter % 10 == 0 || r.iter == h.final_state.iter) {
        println!(
            "iter {:3}: nrmse {:.4} residual {:.4e}",
            r.iter,
            r.nrmse_probe.unwrap(),
            r.data_residual
        );
    }
    println!(
        "{mode}: {} iterations in {:.1} s",
        h.final_state.iter,
        t.elapsed().as_secs_f64()
    );
    Ok(())
}
