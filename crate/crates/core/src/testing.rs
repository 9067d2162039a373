//! Fixtures shared by unit tests.

use crate::assembly::{assemble_log_form, assemble_mass, assemble_potential, QuadratureSpec, SymmetricForm};
use crate::grid::{CellField, Grid, RegionSet, RegionSpec, Support};

pub(crate) struct Fixture {
    pub grid: Grid,
    pub regions: RegionSet,
    pub k: SymmetricForm,
    pub mass: SymmetricForm,
}

impl Fixture {
    /// Box [-2, 2] with 64 cells, Ω = [-0.5, 0.5] (16 cells), W₁ = W₂ = 8 cells
    /// on [0.625, 1.125], Ω split into 4 blocks.
    pub fn line() -> Self {
        let grid = Grid::new(&[-2.0], &[2.0], &[64]).unwrap();
        let omega = RegionSpec::interval(-0.5, 0.5).resolve(&grid).unwrap();
        let w = RegionSpec::interval(0.6, 1.1).resolve(&grid).unwrap();
        let blocks: Vec<Vec<usize>> = omega.chunks(4).map(|c| c.to_vec()).collect();
        let regions = RegionSet::new(&grid, &omega, &w, &w, Some(blocks)).unwrap();
        let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1)).unwrap();
        let mass = assemble_mass(&grid);
        Self { grid, regions, k, mass }
    }

    pub fn potential(&self, values: &CellField) -> SymmetricForm {
        assemble_potential(&self.grid, &self.regions, values).unwrap()
    }

    pub fn constant_potential(&self, c: f64) -> SymmetricForm {
        self.potential(&CellField::constant_on(self.grid.num_cells(), Support::Omega, &self.regions.omega, c))
    }

    pub fn window_field(&self, cells: &[usize], values: &[f64]) -> CellField {
        CellField::from_cells(self.grid.num_cells(), Support::Exterior, cells, values)
    }
}

/// Layout of the interleaved 1D reconstruction configuration: `W` window,
/// `g` gap, `E` domain cell. Each run of `E` is one block.
pub(crate) const INTERLEAVED: &str = "WWWgEEEEgWWgEEEEgWWgEEEEgWWgEEEEgWWW";

impl Fixture {
    /// h = 1/16 grid on [0, 2.25] with Ω split into four 4-cell blocks, each
    /// flanked by window cells.
    pub fn interleaved() -> Self {
        let grid = Grid::new(&[0.0], &[2.25], &[INTERLEAVED.len()]).unwrap();
        let mut omega = Vec::new();
        let mut w = Vec::new();
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut prev = ' ';
        for (i, ch) in INTERLEAVED.chars().enumerate() {
            match ch {
                'W' => w.push(i),
                'E' => {
                    omega.push(i);
                    if prev != 'E' {
                        blocks.push(Vec::new());
                    }
                    blocks.last_mut().unwrap().push(i);
                }
                _ => {}
            }
            prev = ch;
        }
        let regions = RegionSet::new(&grid, &omega, &w, &w, Some(blocks)).unwrap();
        let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1)).unwrap();
        let mass = assemble_mass(&grid);
        Self { grid, regions, k, mass }
    }

    pub fn dn(&self, q: &CellField) -> crate::Result<crate::dnmap::DnMatrix> {
        crate::dnmap::assemble_dn_map(&self.k, &self.potential(q), &self.regions, "q")
    }
}
