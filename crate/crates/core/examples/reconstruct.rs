//! Recovers a blockwise constant potential from its DN map, on the bundled
//! interleaved 1D layout and the 2D 8x8 layout, and shows why a contiguous
//! domain with a one-sided window fails.

use std::path::Path;

use loglap::assembly::{assemble_log_form, assemble_potential};
use loglap::config::parse_config;
use loglap::dnmap::assemble_dn_map;
use loglap::grid::CellField;
use loglap::inversion::reconstruct_potential;

fn run(config_text: &str, label: &str) -> Result<(), Box<dyn std::error::Error>> {
    let p = parse_config(config_text)?.prepare()?;
    let k = assemble_log_form(&p.grid, &p.quadrature)?;
    let oracle = |q: &CellField| assemble_dn_map(&k, &assemble_potential(&p.grid, &p.regions, q)?, &p.regions, "q");
    let truth = p.potential("truth");
    let target = oracle(truth)?;
    let r = reconstruct_potential(oracle, &target, &p.regions.partition, p.grid.num_cells(), 2.0, 1e-3, None)?;
    println!("{label}");
    for (b, block) in p.regions.partition.iter().enumerate() {
        let steps = r.bisection_trace[b].len();
        println!("  block {b}: truth {:.4}, recovered {:.4} ({steps} probes)", truth.values[block[0]], r.block_values[b]);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    run(&std::fs::read_to_string(dir.join("reconstruct_1d.json"))?, "1D, windows between blocks")?;
    run(&std::fs::read_to_string(dir.join("reconstruct_2d.json"))?, "2D 8x8, window ring")?;

    let mut contiguous: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("dnmap_1d.json"))?)?;
    contiguous["potentials"] = serde_json::json!({"truth": {"blocks": [0.5, 1.0, 0.25, 0.75]}});
    contiguous["experiment"] = serde_json::json!({"kind": "reconstruct", "truth": "truth", "q_bound": 1.0});
    run(&contiguous.to_string(), "1D contiguous domain, window on one side")?;
    Ok(())
}
