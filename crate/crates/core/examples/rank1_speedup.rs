//! Iterations needed to reach a probe NRMSE of 0.1 with each probe update,
//! on a weak-contrast (99 % DC) phantom.
//!
//! ```bash
//! cargo run --release -p ptycho --example rank1_speedup -- [radius_px] [defocus_rad] [flat]
//! ```
//!
//! `flat` starts from the frames of a unit object instead of random phases.

use ptycho::prelude::*;

fn main() -> ptycho::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let init_frames = if raw.iter().any(|a| a == "flat") {
        InitFrames::FlatObject
    } else {
        InitFrames::RandomPhase
    };
    let args: Vec<f64> = raw.iter().filter_map(|a| a.parse().ok()).collect();
    let radius = args.first().copied().unwrap_or(6.0);
    let defocus = args.get(1).copied().unwrap_or(3.0);

    let g = make_raster_geometry(64, 16, 4, (13, 13))?;
    let psi = make_test_object(&PhantomSpec {
        n: 64,
        dc_fraction: 0.99,
        texture_seed: 1,
        texture_kind: TextureKind::Smooth,
        smoothing_px: 2.0,
    })?;
    let w = make_probe(&ProbeSpec {
        m: 16,
        kind: ProbeKind::ApertureGauss,
        aperture_radius_px: radius,
        defocus_phase_strength: defocus,
        seed: 2,
    })?;
    let a = simulate_data(&psi, &w, &g)?;
    let start = perturb_probe(&w, 2.0, 0.05, 3)?;
    println!("initial nrmse {:.4}", nrmse_probe(&start, &w)?);

    for mode in [
        ProbeMode::Standard,
        ProbeMode::Power,
        ProbeMode::Rank1Global,
        ProbeMode::Rank1Framewise,
    ] {
        let cfg = SolverConfig {
            probe_mode: mode,
            max_iters: 500,
            stop_nrmse: Some(0.1),
            init_frames,
            ..Default::default()
        };
        let t = std::time::Instant::now();
        let h = run_reconstruction(&a, &g, &start, &cfg, Some(&w))?;
        let last = h.rows.last().unwrap();
        let trace: Vec<String> = h
            .rows
            .iter()
            .filter(|r| r.iter % 50 == 0)
            .map(|r| format!("{:.3}", r.nrmse_probe.unwrap()))
            .collect();
        println!(
            "{mode:>16}: iters to 0.1 = {:>4}  final nrmse {:.4}  residual {:.2e}  {:.2}s  [{}]",
            h.iterations_to(0.1).map(|i| i.to_string()).unwrap_or_else(|| "-".into()),
            last.nrmse_probe.unwrap(),
            last.data_residual,
            t.elapsed().as_secs_f64(),
            trace.join(" ")
        );
    }
    Ok(())
}
