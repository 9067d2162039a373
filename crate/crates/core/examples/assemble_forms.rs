//! Assembles every bilinear form on a small 1D grid and compares the two
//! routes for the logarithmic form, then repeats the comparison in 2D.

use loglap::assembly::{
    assemble_abslog_gram, assemble_fractional_form, assemble_h0_form, assemble_log_form, assemble_log_form_fourier,
    assemble_mass, max_relative_discrepancy, QuadratureSpec,
};
use loglap::grid::Grid;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[16])?;
    let quad = QuadratureSpec::default_for(1);
    let k = assemble_log_form(&grid, &quad)?;
    let kf = assemble_log_form_fourier(&grid, &quad)?;
    let h0 = assemble_h0_form(&grid, &quad)?;
    let gram = assemble_abslog_gram(&grid, &quad)?;
    let mass = assemble_mass(&grid);
    let ks = assemble_fractional_form(&grid, 0.1, &quad)?;

    println!("1D grid, h = {}", grid.h());
    println!("{:>4} {:>14} {:>14} {:>14} {:>14}", "j", "K_0j", "H_0j", "G_0j", "K_s,0j");
    for j in 0..6 {
        println!(
            "{j:>4} {:>14.8} {:>14.8} {:>14.8} {:>14.8}",
            k.matrix[(0, j)],
            h0.matrix[(0, j)],
            gram.matrix[(0, j)],
            ks.matrix[(0, j)]
        );
    }
    println!("mass diagonal {}", mass.matrix[(0, 0)]);
    println!("route discrepancy {:.3e}", max_relative_discrepancy(&k.matrix, &kf.matrix, 1e-300));
    if let Some(t) = kf.truncation {
        println!("Fourier truncation radius {}, tail bound {:.2e}", t.radius, t.max_tail_bound);
    }

    let grid = Grid::new(&[-0.75, -0.75], &[0.75, 0.75], &[6, 6])?;
    let quad = QuadratureSpec::default_for(2);
    let k = assemble_log_form(&grid, &quad)?;
    let kf = assemble_log_form_fourier(&grid, &quad)?;
    println!("2D 6x6 grid: K_00 = {:.8}, K_01 = {:.8}", k.matrix[(0, 0)], k.matrix[(0, 1)]);
    println!("2D route discrepancy {:.3e}", max_relative_discrepancy(&k.matrix, &kf.matrix, 1e-300));
    Ok(())
}
