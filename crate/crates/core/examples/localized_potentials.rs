//! Localized potentials concentrating on one block of Ω.

use loglap::assembly::{assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::grid::{CellField, Grid, RegionSet, RegionSpec, Support};
use loglap::inversion::localized_potential;
use loglap::solver::ForwardSolver;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[64])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1))?;
    let q = CellField::constant_on(grid.num_cells(), Support::Omega, &omega, 0.5);
    let solver = ForwardSolver::new(&k, &assemble_potential(&grid, &regions, &q)?, &regions)?;
    let block = &omega[4..8];

    let steps = localized_potential(&solver, block, &window, 6, 1e-2, 1e-2)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "alpha", "ratio", "fit resid", "outside");
    for s in &steps {
        println!("{:>8.0e} {:>12.6} {:>12.4e} {:>12.4e}", s.alpha, s.ratio, s.fit_residual, s.outside_norm);
    }
    Ok(())
}
