//! The fractional forms approach the mass form with slope given by the
//! logarithmic form as s tends to 0.

use loglap::assembly::QuadratureSpec;
use loglap::grid::Grid;
use loglap::spectral::fractional_expansion_check;

fn main() -> loglap::Result<()> {
    let grid = Grid::new(&[-2.0], &[2.0], &[16])?;
    let rows = fractional_expansion_check(&grid, &[0.4, 0.2, 0.1, 0.05, 0.025, 0.0125], &QuadratureSpec::default_for(1))?;
    println!("{:>8} {:>14} {:>8}", "s", "error", "ratio");
    for r in rows {
        let ratio = r.ratio.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!("{:>8} {:>14.6e} {:>8}", r.s, r.error, ratio);
    }
    Ok(())
}
