//! Runge approximation of a normalized block indicator: the fit residual as
//! the regularization shrinks and as the grid is refined.

use loglap::assembly::{assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::grid::{CellField, Grid, RegionSet, RegionSpec, Support};
use loglap::inversion::runge_fit;
use loglap::solver::ForwardSolver;

fn fit(cells: usize, alpha: f64) -> loglap::Result<(f64, f64)> {
    let grid = Grid::new(&[-2.0], &[2.0], &[cells])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1))?;
    let q = CellField::constant_on(grid.num_cells(), Support::Omega, &omega, 0.5);
    let solver = ForwardSolver::new(&k, &assemble_potential(&grid, &regions, &q)?, &regions)?;
    // M = the second quarter of Ω
    let m: Vec<usize> = RegionSpec::interval(-0.25, 0.0).resolve(&grid)?;
    let height = 1.0 / (m.len() as f64 * grid.cell_volume()).sqrt();
    let target: Vec<f64> = omega.iter().map(|c| if m.contains(c) { height } else { 0.0 }).collect();
    let r = runge_fit(&solver, &target, &window, alpha)?;
    Ok((r.relative_residual(), r.singular_values.last().copied().unwrap_or(0.0)))
}

fn main() -> loglap::Result<()> {
    println!("64 cells, residual against alpha");
    for alpha in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10] {
        let (res, _) = fit(64, alpha)?;
        println!("  alpha {alpha:.0e}: relative residual {res:.4}");
    }
    println!("alpha 1e-8, residual against refinement");
    for cells in [32, 64, 128] {
        let (res, smin) = fit(cells, 1e-8)?;
        println!("  h = {:.5}: relative residual {res:.4}, smallest singular value {smin:.2e}", 4.0 / cells as f64);
    }
    Ok(())
}
