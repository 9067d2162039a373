//! Solves the exterior-value problem with constant window data and a
//! constant source, and audits the stability ratio on random data.

use loglap::assembly::{assemble_abslog_gram, assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::grid::{CellField, Grid, RegionSet, RegionSpec, Support};
use loglap::solver::{solve_with, stability_audit, ForwardSolver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[64])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    let quad = QuadratureSpec::default_for(1);
    let k = assemble_log_form(&grid, &quad)?;
    let gram = assemble_abslog_gram(&grid, &quad)?;
    let n = grid.num_cells();
    let q = assemble_potential(&grid, &regions, &CellField::constant_on(n, Support::Omega, &omega, 0.5))?;

    let solver = ForwardSolver::new(&k, &q, &regions)?;
    let f = CellField::constant_on(n, Support::Exterior, &window, 1.0);
    let source = CellField::constant_on(n, Support::Omega, &omega, 0.5);
    let report = solve_with(&solver, &regions, &f, &source, Some(&gram))?;
    println!("linear residual {:.2e}", report.linear_residual);
    println!("energy norm {:.6}", report.energy_norm.unwrap_or(f64::NAN));
    println!("stability ratio {:.6}", report.stability_ratio.unwrap_or(f64::NAN));
    println!("{:>8} {:>12}", "x", "u");
    for &c in &omega {
        println!("{:>8.4} {:>12.6}", grid.center(c)[0], report.u.values[c]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let audit = stability_audit(&solver, &regions, &gram, &window, 100, &mut rng)?;
    println!("stability over {} draws: max {:.4}, mean {:.4}", audit.draws, audit.max_ratio, audit.mean_ratio);
    Ok(())
}
