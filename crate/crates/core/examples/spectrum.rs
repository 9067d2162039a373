//! Dirichlet eigenvalues on growing intervals, the dilation law for the first
//! eigenvalue, and the coercivity condition for constant potentials.

use loglap::assembly::{assemble_log_form, assemble_mass, assemble_potential, QuadratureSpec};
use loglap::grid::{BoxSpec, CellField, Grid, GridSpec, RegionSet, RegionSpec, Support};
use loglap::spectral::{coercivity_check, dirichlet_spectrum, scaling_law_check};

fn main() -> loglap::Result<()> {
    let spec = GridSpec { box_min: vec![-2.0], box_max: vec![2.0], cells_per_axis: vec![64] };
    let grid = Grid::from_spec(spec.clone())?;
    let quad = QuadratureSpec::default_for(1);
    let k = assemble_log_form(&grid, &quad)?;
    let mass = assemble_mass(&grid);

    println!("{:>8} {:>12} {:>12} {:>12}", "radius", "λ1", "λ2", "λ3");
    for r in [0.25, 0.5, 0.75, 1.0, 1.25] {
        let omega = RegionSpec::interval(-r, r).resolve(&grid)?;
        let s = dirichlet_spectrum(&k, &mass, &omega, 3)?;
        println!("{r:>8.2} {:>12.6} {:>12.6} {:>12.6}", s.eigenvalues[0], s.eigenvalues[1], s.eigenvalues[2]);
    }

    let omega_box = BoxSpec { min: vec![-0.5], max: vec![0.5] };
    let law = scaling_law_check(&spec, &omega_box, 2, &quad)?;
    println!(
        "λ1(Ω) = {:.6}, λ1(2Ω) = {:.6}, λ1(Ω) - 2 ln 2 = {:.6}",
        law.lambda1, law.lambda1_scaled, law.predicted
    );

    let omega = RegionSpec::interval(-1.25, 1.25).resolve(&grid)?;
    let window = RegionSpec::interval(1.4, 1.9).resolve(&grid)?;
    let regions = RegionSet::new(&grid, &omega, &window, &window, None)?;
    for c in [0.0, 0.5, 1.0, 1.5] {
        let q = CellField::constant_on(grid.num_cells(), Support::Omega, &omega, c);
        let r = coercivity_check(&k, &assemble_potential(&grid, &regions, &q)?, &mass, &omega)?;
        println!(
            "q = {c}: λ1 + q = {:+.5}, Ω block positive definite: {}",
            r.spectrum.lambda0_margin, r.block_spd
        );
    }
    Ok(())
}
