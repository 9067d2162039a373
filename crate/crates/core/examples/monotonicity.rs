//! Raising a block of the potential raises the DN map; lowering one breaks
//! the order. Also prints the two energy bounds bracketing the DN difference.

use loglap::assembly::{assemble_log_form, assemble_potential, QuadratureSpec};
use loglap::dnmap::{assemble_dn_map, monotonicity_bounds};
use loglap::grid::{CellField, Grid, RegionSpec, RegionSet, Support};
use loglap::inversion::monotonicity_compare;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[64])?;
    let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid)?;
    let window = RegionSpec::interval(0.6, 1.1).resolve(&grid)?;
    let blocks: Vec<Vec<usize>> = omega.chunks(4).map(<[usize]>::to_vec).collect();
    let regions = RegionSet::new(&grid, &omega, &window, &window, Some(blocks.clone()))?;
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1))?;
    let n = grid.num_cells();

    let field = |values: [f64; 4]| {
        let mut q = CellField::zeros(n, Support::Omega);
        for (block, v) in blocks.iter().zip(values) {
            for &c in block {
                q.values[c] = v;
            }
        }
        q
    };
    let base = field([0.8; 4]);
    let dn = |q: &CellField| assemble_dn_map(&k, &assemble_potential(&grid, &regions, q)?, &regions, "q");
    let l_base = dn(&base)?;

    for (label, q) in [("raise block 1 by 1", field([0.8, 1.8, 0.8, 0.8])), ("lower block 3 by 0.5", field([0.8, 0.8, 0.8, 0.3]))] {
        let v = monotonicity_compare(&l_base, &dn(&q)?, 1e-12)?;
        println!("{label}: min eigenvalue of L2 - L1 = {:.3e}, ordered = {}", v.min_eigenvalue, v.psd);
    }

    let f = CellField::constant_on(n, Support::Exterior, &window, 1.0);
    let b = monotonicity_bounds(
        &k,
        &assemble_potential(&grid, &regions, &base)?,
        &assemble_potential(&grid, &regions, &field([1.3; 4]))?,
        &regions,
        &f,
    )?;
    println!("lower {:.10e} <= value {:.10e} <= upper {:.10e}", b.lower, b.value, b.upper);
    Ok(())
}
