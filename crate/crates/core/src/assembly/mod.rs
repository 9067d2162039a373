//! Galerkin matrices of the bilinear forms over the cell-indicator basis.
//!
//! Two independent routes produce the logarithmic form `B₀`:
//!
//! * [`assemble_log_form`] evaluates the integral representation in physical
//!   space. Every entry reduces to an integral of the cell-pair
//!   autocorrelation `Φ_d(t) = |C_i ∩ (C_j - t)|` against a radial kernel,
//!   done in polar coordinates around `t = 0` with the radial part in closed
//!   form and an adaptive Gauss–Legendre rule over directions.
//! * [`assemble_log_form_fourier`] integrates the symbol `2 log|ξ|` against
//!   the product of cell transforms on a truncated frequency box.
//!
//! All entries depend only on the index offset between the two cells, so each
//! distinct offset is integrated once and the matrix is filled from the table.

mod fourier;
mod spatial;

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{frac_constant, log_constants};
use crate::error::{Error, Result};
use crate::grid::{CellField, Grid, RegionSet};

pub use fourier::{fourier_mass_matrix, FourierWeight};

/// Which bilinear form a matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FormKind {
    LogB0,
    Mass,
    Potential,
    FractionalBs { s: f64 },
    AbslogGram,
    H0Seminorm,
}

/// Quadrature parameters shared by both assembly routes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per angular panel.
    pub gauss_order: usize,
    /// Maximum number of dyadic refinements of an angular panel.
    pub subdivision_depth: usize,
    /// Relative tolerance for accepting a refined panel.
    pub panel_tolerance: f64,
    /// Frequency truncation radius `R_ξ` (per axis).
    pub fourier_truncation_radius: f64,
    /// Gauss–Legendre points per frequency panel.
    pub fourier_points: usize,
    /// Half-width `ε_ξ` of the excluded neighbourhood of `ξ = 0`.
    pub origin_exclusion: f64,
    /// Largest acceptable truncation bound per entry (absolute).
    pub fourier_tolerance: f64,
}

impl QuadratureSpec {
    pub fn default_for(dim: usize) -> Self {
        if dim == 1 {
            Self {
                gauss_order: 4,
                subdivision_depth: 8,
                panel_tolerance: 1e-12,
                fourier_truncation_radius: 20_000.0,
                fourier_points: 8,
                origin_exclusion: 1e-4,
                fourier_tolerance: 1e-6,
            }
        } else {
            Self {
                gauss_order: 4,
                subdivision_depth: 6,
                panel_tolerance: 1e-12,
                fourier_truncation_radius: 1_000.0,
                fourier_points: 8,
                origin_exclusion: 1e-4,
                fourier_tolerance: 1e-4,
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidQuadrature(msg));
        if self.gauss_order < 2 {
            return fail(format!("gauss_order must be >= 2 (got {})", self.gauss_order));
        }
        if self.subdivision_depth > 40 {
            return fail(format!("subdivision_depth {} is unreasonably large", self.subdivision_depth));
        }
        if !(self.panel_tolerance > 0.0) {
            return fail("panel_tolerance must be positive".into());
        }
        if !(self.fourier_truncation_radius > 1.0) {
            return fail(format!(
                "fourier_truncation_radius must exceed 1 (got {})",
                self.fourier_truncation_radius
            ));
        }
        if self.fourier_points < 2 {
            return fail("fourier_points must be >= 2".into());
        }
        if !(self.origin_exclusion > 0.0 && self.origin_exclusion < 1.0) {
            return fail(format!("origin_exclusion must lie in (0, 1) (got {})", self.origin_exclusion));
        }
        if !(self.fourier_tolerance > 0.0) {
            return fail("fourier_tolerance must be positive".into());
        }
        Ok(())
    }
}

/// Certified bounds attached to Fourier-route matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBounds {
    pub radius: f64,
    /// Largest bound on the neglected part of the `|ξ| > R_ξ` tail over all entries.
    pub max_tail_bound: f64,
    /// Largest bound on the error of the analytic `ξ ≈ 0` contribution.
    pub max_origin_bound: f64,
}

/// Dense symmetric matrix of a bilinear form over the cell basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricForm {
    pub kind: FormKind,
    pub matrix: DMatrix<f64>,
    pub quad: Option<QuadratureSpec>,
    pub grid_hash: String,
    /// `h^n` of the grid the form was assembled on.
    pub cell_volume: f64,
    pub truncation: Option<TruncationBounds>,
}

impl SymmetricForm {
    fn new(kind: FormKind, matrix: DMatrix<f64>, grid: &Grid, quad: Option<QuadratureSpec>) -> Self {
        Self { kind, matrix, quad, grid_hash: grid.hash(), cell_volume: grid.cell_volume(), truncation: None }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |A_ij - A_ji| / max(1, |A_ij|)`.
    pub fn max_asymmetry(&self) -> f64 {
        let a = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..i {
                let scale = a[(i, j)].abs().max(1.0);
                worst = worst.max((a[(i, j)] - a[(j, i)]).abs() / scale);
            }
        }
        worst
    }

    /// Submatrix with the given rows and columns.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        submatrix(&self.matrix, rows, cols)
    }

    /// Quadratic form `vᵀ A w` on full-length coefficient vectors.
    pub fn eval(&self, v: &[f64], w: &[f64]) -> f64 {
        let n = self.dim();
        assert!(v.len() == n && w.len() == n, "coefficient vectors must span the grid");
        let mut acc = 0.0;
        for i in 0..n {
            if v[i] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * w[j];
            }
            acc += v[i] * row;
        }
        acc
    }
}

pub(crate) fn submatrix(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| a[(rows[r], cols[c])])
}

/// Offset key invariant under the symmetries of the cubic lattice.
pub(crate) fn canonical_offset(off: [i64; 2]) -> (usize, usize) {
    let a = off[0].unsigned_abs() as usize;
    let b = off[1].unsigned_abs() as usize;
    (a.max(b), a.min(b))
}

/// Distinct canonical offsets of a grid with one representative cell pair each.
pub(crate) fn distinct_offsets(grid: &Grid) -> Vec<((usize, usize), (usize, usize))> {
    let dims = grid.cells_per_axis();
    let n1 = if grid.dim() == 2 { dims[1] } else { 1 };
    let mut seen: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    let mut order = Vec::new();
    for a in 0..dims[0] {
        for b in 0..n1 {
            let key = canonical_offset([a as i64, b as i64]);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                let pair = (0, grid.linear_index([a, b]));
                e.insert(pair);
                order.push((key, pair));
            }
        }
    }
    order.sort_by_key(|&(k, _)| k);
    order
}

/// Fills a full matrix from per-offset values.
pub(crate) fn fill_from_offsets(
    grid: &Grid,
    table: &HashMap<(usize, usize), f64>,
    diagonal_extra: f64,
) -> DMatrix<f64> {
    let n = grid.num_cells();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = table[&canonical_offset(grid.offset(i, j))];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m[(i, i)] += diagonal_extra;
    }
    m
}

fn offset_table<F>(grid: &Grid, f: F) -> Result<HashMap<(usize, usize), f64>>
where
    F: Fn((usize, usize), (usize, usize)) -> Result<f64> + Sync,
{
    let offsets = distinct_offsets(grid);
    let values: Vec<Result<f64>> = offsets.par_iter().map(|&(key, pair)| f(key, pair)).collect();
    offsets
        .iter()
        .zip(values)
        .map(|(&(key, _), v)| v.map(|v| (key, v)))
        .collect()
}

/// Logarithmic form `B₀(χ_i, χ_j)` from the integral representation.
pub fn assemble_log_form(grid: &Grid, quad: &QuadratureSpec) -> Result<SymmetricForm> {
    quad.validate()?;
    let consts = log_constants(grid.dim())?;
    let integrator = spatial::PairIntegrator::new(grid, quad);
    let table = offset_table(grid, |key, pair| {
        let d = [key.0 as f64 * grid.h(), key.1 as f64 * grid.h()];
        if key == (0, 0) {
            let near = integrator.self_near(pair)?;
            let far = integrator.pair(d, spatial::Range::Far, 0.0, pair)?;
            Ok(consts.c_n * (near - far))
        } else {
            let near = integrator.pair(d, spatial::Range::Near, 0.0, pair)?;
            let far = integrator.pair(d, spatial::Range::Far, 0.0, pair)?;
            Ok(-consts.c_n * (near + far))
        }
    })?;
    let m = fill_from_offsets(grid, &table, consts.rho_n * grid.cell_volume());
    Ok(SymmetricForm::new(FormKind::LogB0, m, grid, Some(*quad)))
}

/// Logarithmic form `2 (2π)^{-n} ∫ log|ξ| χ̂_i conj(χ̂_j) dξ` by frequency quadrature.
///
/// The transform normalization is verified first by reproducing the mass
/// matrix through Parseval's identity.
pub fn assemble_log_form_fourier(grid: &Grid, quad: &QuadratureSpec) -> Result<SymmetricForm> {
    quad.validate()?;
    log_constants(grid.dim())?;
    fourier::check_parseval(grid, quad)?;
    let (m, bounds) = fourier::assemble(grid, quad, FourierWeight::Log)?;
    let mut form = SymmetricForm::new(FormKind::LogB0, m * 2.0, grid, Some(*quad));
    form.truncation = Some(TruncationBounds {
        max_tail_bound: 2.0 * bounds.max_tail_bound,
        max_origin_bound: 2.0 * bounds.max_origin_bound,
        ..bounds
    });
    Ok(form)
}

/// Gram matrix of the energy-space inner product
/// `(v, w)_{L²} + (2π)^{-n} ∫ |log|ξ|| v̂ conj(ŵ) dξ`.
pub fn assemble_abslog_gram(grid: &Grid, quad: &QuadratureSpec) -> Result<SymmetricForm> {
    quad.validate()?;
    log_constants(grid.dim())?;
    fourier::check_parseval(grid, quad)?;
    let (m, bounds) = fourier::assemble(grid, quad, FourierWeight::AbsLog)?;
    let mass = grid.cell_volume();
    let mut m = m;
    for i in 0..m.nrows() {
        m[(i, i)] += mass;
    }
    let mut form = SymmetricForm::new(FormKind::AbslogGram, m, grid, Some(*quad));
    form.truncation = Some(bounds);
    Ok(form)
}

/// `∬_{|x-z| ≤ 1} (χ_i(x) - χ_i(z)) (χ_j(x) - χ_j(z)) / |x - z|^n dx dz`.
pub fn assemble_h0_form(grid: &Grid, quad: &QuadratureSpec) -> Result<SymmetricForm> {
    quad.validate()?;
    log_constants(grid.dim())?;
    let integrator = spatial::PairIntegrator::new(grid, quad);
    let table = offset_table(grid, |key, pair| {
        if key == (0, 0) {
            Ok(2.0 * integrator.self_near(pair)?)
        } else {
            let d = [key.0 as f64 * grid.h(), key.1 as f64 * grid.h()];
            Ok(-2.0 * integrator.pair(d, spatial::Range::Near, 0.0, pair)?)
        }
    })?;
    let m = fill_from_offsets(grid, &table, 0.0);
    Ok(SymmetricForm::new(FormKind::H0Seminorm, m, grid, Some(*quad)))
}

/// `(C_{n,s}/2) ∬ (χ_i(x) - χ_i(z)) (χ_j(x) - χ_j(z)) |x - z|^{-n-2s} dx dz`, `0 < s < 1/2`.
pub fn assemble_fractional_form(grid: &Grid, s: f64, quad: &QuadratureSpec) -> Result<SymmetricForm> {
    quad.validate()?;
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidOrder { s, upper: 0.5 });
    }
    let c = frac_constant(grid.dim(), s)?;
    let integrator = spatial::PairIntegrator::new(grid, quad);
    let table = offset_table(grid, |key, pair| {
        if key == (0, 0) {
            Ok(c * integrator.self_full(s, pair)?)
        } else {
            let d = [key.0 as f64 * grid.h(), key.1 as f64 * grid.h()];
            Ok(-c * integrator.pair(d, spatial::Range::Full, s, pair)?)
        }
    })?;
    let m = fill_from_offsets(grid, &table, 0.0);
    Ok(SymmetricForm::new(FormKind::FractionalBs { s }, m, grid, Some(*quad)))
}

/// Diagonal mass matrix `h^n I`.
pub fn assemble_mass(grid: &Grid) -> SymmetricForm {
    let n = grid.num_cells();
    let m = DMatrix::from_diagonal_element(n, n, grid.cell_volume());
    SymmetricForm::new(FormKind::Mass, m, grid, None)
}

/// Diagonal potential matrix with entries `q_i h^n` on Ω cells.
pub fn assemble_potential(grid: &Grid, regions: &RegionSet, q: &CellField) -> Result<SymmetricForm> {
    q.validate(grid, regions)?;
    let n = grid.num_cells();
    let vol = grid.cell_volume();
    let mut m = DMatrix::zeros(n, n);
    for (c, &v) in q.values.iter().enumerate() {
        if v != 0.0 {
            if !regions.in_omega(c) {
                return Err(Error::InvalidField(format!(
                    "potential carries value {v} at cell {c} outside omega"
                )));
            }
            m[(c, c)] = v * vol;
        }
    }
    Ok(SymmetricForm::new(FormKind::Potential, m, grid, None))
}

/// Largest entrywise relative discrepancy `|A - B| / |A|` (entries of `A`
/// below `floor` use `floor` as the scale).
pub fn max_relative_discrepancy(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / x.abs().max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
