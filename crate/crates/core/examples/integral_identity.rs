//! Evaluates both sides of the integral identity for random potentials and data.

use loglap::assembly::{assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::dnmap::integral_identity_residual;
use loglap::grid::{CellField, Grid, RegionSet, RegionSpec, Support};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[64])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1))?;
    let n = grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    println!("{:>16} {:>16} {:>10}", "lhs", "rhs", "relative");
    for _ in 0..10 {
        let mut q1 = CellField::zeros(n, Support::Omega);
        let mut q2 = CellField::zeros(n, Support::Omega);
        for &c in &omega {
            q1.values[c] = rng.gen_range(0.0..2.0);
            q2.values[c] = rng.gen_range(0.0..2.0);
        }
        let v1: Vec<f64> = window.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v2: Vec<f64> = window.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f1 = CellField::from_cells(n, Support::Exterior, &window, &v1);
        let f2 = CellField::from_cells(n, Support::Exterior, &window, &v2);
        let r = integral_identity_residual(
            &k,
            &assemble_potential(&grid, &regions, &q1)?,
            &assemble_potential(&grid, &regions, &q2)?,
            &regions,
            &f1,
            &f2,
        )?;
        println!("{:>16.10e} {:>16.10e} {:>10.2e}", r.lhs, r.rhs, r.relative_residual);
    }
    Ok(())
}
