//! Builds the DN map on a measurement window and checks it against explicit
//! solves.

use loglap::assembly::{assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::dnmap::{dn_from_solver, dn_pairing_by_solve};
use loglap::grid::{CellField, Grid, RegionSet, RegionSpec, Support};
use loglap::solver::ForwardSolver;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[64])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1))?;
    let q = CellField::constant_on(grid.num_cells(), Support::Omega, &omega, 1.0);
    let q = assemble_potential(&grid, &regions, &q)?;
    let solver = ForwardSolver::new(&k, &q, &regions)?;
    let dn = dn_from_solver(&solver, &regions.w2, &regions.w1, "q=1", &k.grid_hash);

    println!("DN matrix ({} x {}):", dn.rows.len(), dn.cols.len());
    for i in 0..dn.matrix.nrows() {
        let row: Vec<String> = (0..dn.matrix.ncols()).map(|j| format!("{:>10.6}", dn.matrix[(i, j)])).collect();
        println!("{}", row.join(" "));
    }
    println!("relative asymmetry {:.2e}", dn.relative_asymmetry()?);

    let f: Vec<f64> = (0..window.len()).map(|i| (i as f64 + 1.0).recip()).collect();
    let g: Vec<f64> = (0..window.len()).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 }).collect();
    let by_matrix = dn.pairing(&f, &g);
    let by_solve = dn_pairing_by_solve(&solver, &regions, &f, &g);
    println!("<Λf, g>: matrix {by_matrix:.12}, explicit solve {by_solve:.12}");
    Ok(())
}
