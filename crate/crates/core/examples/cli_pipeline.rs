//! The simulate, reconstruct and compare pipeline of the `ptycho` binary,
//! driven through the library on a shipped config.
//!
//! ```bash
//! cargo run --release -p ptycho --example cli_pipeline -- [iterations]
//! ```

use std::path::Path;

use ptycho::io::{cmd_compare, cmd_reconstruct, cmd_simulate, RunConfig, CONVERGENCE_FILE};
use ptycho::prelude::*;

fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let iters = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let work = tempfile::tempdir()?;

    let base = RunConfig::load(&configs.join("desk_standard.json"))?;
    let data = work.path().join("data");
    println!("{}", cmd_simulate(&base, &data)?);

    let mut traces = Vec::new();
    for name in ["desk_standard", "desk_rank1_global"] {
        let mut cfg = RunConfig::load(&configs.join(format!("{name}.json")))?;
        cfg.solver.max_iters = iters;
        cfg.solver.init_frames = InitFrames::FlatObject;
        let out = work.path().join(name);
        println!("{name}: {}", cmd_reconstruct(&cfg, &data, &out)?);
        traces.push(out.join(CONVERGENCE_FILE));
    }
    match cmd_compare(&traces[1], &traces[0], 0.2) {
        Ok(report) => println!("rank1_global vs standard: {report}"),
        Err(e) => println!("rank1_global vs standard: {e}"),
    }
    Ok(())
}
