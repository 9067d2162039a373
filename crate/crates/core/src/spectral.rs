//! Dirichlet spectrum of the discrete operator on Ω and operator-level checks.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_fractional_form, assemble_log_form, assemble_mass, submatrix, FormKind, QuadratureSpec, SymmetricForm,
};
use crate::error::{Error, Result};
use crate::grid::{BoxSpec, Grid, GridSpec};

/// Generalized eigenvalues `B₀(u, u) / ‖u‖²_{L²(Ω)}` over Ω-supported vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `λ₁ + min_Ω q`
    pub lambda0_margin: f64,
    pub condition_satisfied: bool,
}

impl SpectrumReport {
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `λ₂ - λ₁` when at least two eigenvalues were requested.
    pub fn gap(&self) -> Option<f64> {
        (self.eigenvalues.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

/// All generalized eigenvalues of the Ω block of `a` against the diagonal mass, ascending.
fn generalized_eigenvalues(a: &DMatrix<f64>, mass: &SymmetricForm, omega: &[usize]) -> Result<Vec<f64>> {
    let block = submatrix(a, omega, omega);
    let inv_sqrt: Vec<f64> = omega.iter().map(|&c| 1.0 / mass.matrix[(c, c)].sqrt()).collect();
    let scaled = DMatrix::from_fn(omega.len(), omega.len(), |i, j| block[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let sym = (&scaled + scaled.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenSolver("symmetric eigen-decomposition did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolver("non-finite eigenvalue".into()));
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn check_mass(mass: &SymmetricForm, omega: &[usize]) -> Result<()> {
    if mass.kind != FormKind::Mass {
        return Err(Error::InvalidArgument(format!("expected a mass matrix, got {:?}", mass.kind)));
    }
    if omega.is_empty() || omega.iter().any(|&c| c >= mass.dim()) {
        return Err(Error::InvalidRegions("omega must be a nonempty set of grid cells".into()));
    }
    Ok(())
}

/// The `count` smallest Dirichlet eigenvalues of `K` on Ω.
pub fn dirichlet_spectrum(k: &SymmetricForm, mass: &SymmetricForm, omega: &[usize], count: usize) -> Result<SpectrumReport> {
    check_mass(mass, omega)?;
    if count == 0 || count > omega.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenvalues of a {}-cell domain",
            omega.len()
        )));
    }
    let mut eigenvalues = generalized_eigenvalues(&k.matrix, mass, omega)?;
    eigenvalues.truncate(count);
    let margin = eigenvalues[0];
    Ok(SpectrumReport { eigenvalues, lambda0_margin: margin, condition_satisfied: margin > 0.0 })
}

/// Eigenvalue condition versus definiteness of the Ω block of `K + Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub spectrum: SpectrumReport,
    pub min_q: f64,
    /// Smallest eigenvalue of the Ω block of `K + Q`.
    pub block_min_eigenvalue: f64,
    /// Cholesky succeeded on the Ω block.
    pub block_spd: bool,
    pub agrees: bool,
}

/// Checks `λ₁(Ω) + min_Ω q > 0` and the definiteness of `(K + Q)_ΩΩ`.
pub fn coercivity_check(
    k: &SymmetricForm,
    q: &SymmetricForm,
    mass: &SymmetricForm,
    omega: &[usize],
) -> Result<CoercivityReport> {
    check_mass(mass, omega)?;
    let mut spectrum = dirichlet_spectrum(k, mass, omega, omega.len().min(2))?;
    let min_q = omega
        .iter()
        .map(|&c| q.matrix[(c, c)] / mass.matrix[(c, c)])
        .fold(f64::INFINITY, f64::min);
    spectrum.lambda0_margin = spectrum.lambda1() + min_q;
    spectrum.condition_satisfied = spectrum.lambda0_margin > 0.0;
    let a = &k.matrix + &q.matrix;
    let block = submatrix(&a, omega, omega);
    let block_spd = block.clone().cholesky().is_some();
    let block_min_eigenvalue = block.symmetric_eigenvalues().min();
    Ok(CoercivityReport {
        agrees: block_spd == spectrum.condition_satisfied,
        spectrum,
        min_q,
        block_min_eigenvalue,
        block_spd,
    })
}

/// One row of the fractional-expansion table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRow {
    pub s: f64,
    /// `max |(K_s - M)/s - K_log|`
    pub error: f64,
    /// `error(s) / error(previous s)`; `None` for the first row.
    pub ratio: Option<f64>,
}

/// `‖(K_s - M)/s - K_log‖_max` for each order in `s_list`.
pub fn fractional_expansion_check(grid: &Grid, s_list: &[f64], quad: &QuadratureSpec) -> Result<Vec<ExpansionRow>> {
    let k = assemble_log_form(grid, quad)?;
    let m = assemble_mass(grid);
    let mut rows: Vec<ExpansionRow> = Vec::with_capacity(s_list.len());
    for &s in s_list {
        let ks = assemble_fractional_form(grid, s, quad)?;
        let diff = (&ks.matrix - &m.matrix) / s - &k.matrix;
        let error = diff.amax();
        let ratio = rows.last().map(|prev| error / prev.error);
        rows.push(ExpansionRow { s, error, ratio });
    }
    Ok(rows)
}

/// First eigenvalue on Ω and on the dilated domain `R Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub factor: f64,
    pub lambda1: f64,
    pub lambda1_scaled: f64,
    /// `λ₁(Ω) - 2 ln R`
    pub predicted: f64,
    pub discrepancy: f64,
    /// `discrepancy / max(1, |λ₁(Ω)|)`
    pub relative_discrepancy: f64,
}

/// Compares `λ₁(RΩ)` with `λ₁(Ω) - 2 ln R` for an integer factor `R`.
///
/// Ω is the set of cells of `grid` inside `omega`. The dilated problem uses
/// the box and domain scaled by `R` with `R` times as many cells per axis, so
/// both domains carry the same cell size.
pub fn scaling_law_check(grid: &GridSpec, omega: &BoxSpec, factor: usize, quad: &QuadratureSpec) -> Result<ScalingReport> {
    if factor < 2 {
        return Err(Error::InvalidArgument("dilation factor must be an integer ≥ 2".into()));
    }
    let r = factor as f64;
    let base = Grid::from_spec(grid.clone())?;
    let scaled_spec = GridSpec {
        box_min: grid.box_min.iter().map(|v| v * r).collect(),
        box_max: grid.box_max.iter().map(|v| v * r).collect(),
        cells_per_axis: grid.cells_per_axis.iter().map(|c| c * factor).collect(),
    };
    let scaled = Grid::from_spec(scaled_spec)?;
    let scaled_box = BoxSpec {
        min: omega.min.iter().map(|v| v * r).collect(),
        max: omega.max.iter().map(|v| v * r).collect(),
    };
    let lambda = |g: &Grid, b: &BoxSpec| -> Result<f64> {
        let cells = g.cells_in_box(b)?;
        let k = assemble_log_form(g, quad)?;
        Ok(dirichlet_spectrum(&k, &assemble_mass(g), &cells, 1)?.lambda1())
    };
    let lambda1 = lambda(&base, omega)?;
    let lambda1_scaled = lambda(&scaled, &scaled_box)?;
    let predicted = lambda1 - 2.0 * r.ln();
    let discrepancy = (lambda1_scaled - predicted).abs();
    Ok(ScalingReport {
        factor: r,
        lambda1,
        lambda1_scaled,
        predicted,
        discrepancy,
        relative_discrepancy: discrepancy / lambda1.abs().max(1.0),
    })
}

/// Smallest and largest generalized eigenvalue of `a` against `b` on Ω, the
/// constant `C` with `1/C ≤ spectrum ≤ C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub min: f64,
    pub max: f64,
    pub constant: f64,
}

/// Norm-equivalence witness between two forms restricted to Ω-supported vectors.
pub fn norm_equivalence(a: &SymmetricForm, b: &SymmetricForm, omega: &[usize]) -> Result<EquivalenceReport> {
    let ab = submatrix(&a.matrix, omega, omega);
    let bb = submatrix(&b.matrix, omega, omega);
    let chol = bb.cholesky().ok_or(Error::NotPositiveDefinite)?;
    let l_inv = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::EigenSolver("triangular factor is singular".into()))?;
    let reduced = &l_inv * ab * l_inv.transpose();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    let (min, max) = (eig.min(), eig.max());
    if !(min > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(EquivalenceReport { min, max, constant: max.max(1.0 / min) })
}
