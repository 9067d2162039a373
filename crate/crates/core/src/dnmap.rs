//! Dirichlet-to-Neumann maps as Schur complements over exterior cells.
//!
//! For `A = K + Q` with interior cells `I = Ω`, the weak DN map
//! `⟨Λ_q f, g⟩ = B_q(u_f, g)` on exterior indicator data is
//! `S = A_EE - A_EI A_II^{-1} A_IE`. Only the `W₂ × W₁` block is formed.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembly::{submatrix, SymmetricForm};
use crate::error::{Error, Result};
use crate::grid::{CellField, RegionSet};
use crate::solver::{check_same_grid, ForwardSolver};

/// Galerkin matrix of `Λ_q`: rows are `W₂` cells, columns `W₁` cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnMatrix {
    pub matrix: DMatrix<f64>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub q_tag: String,
    pub grid_hash: String,
}

impl DnMatrix {
    /// `⟨Λ f, g⟩` for data given on the column and row windows.
    pub fn pairing(&self, f: &[f64], g: &[f64]) -> f64 {
        assert!(f.len() == self.cols.len() && g.len() == self.rows.len());
        let fv = DVector::from_column_slice(f);
        let gv = DVector::from_column_slice(g);
        gv.dot(&(&self.matrix * fv))
    }

    pub fn is_square_window(&self) -> bool {
        self.rows == self.cols
    }

    /// `‖Λ - Λᵀ‖_max / ‖Λ‖_max` (requires coinciding windows).
    pub fn relative_asymmetry(&self) -> Result<f64> {
        if !self.is_square_window() {
            return Err(Error::MismatchedRegions("asymmetry needs W1 = W2".into()));
        }
        let diff = (&self.matrix - self.matrix.transpose()).amax();
        let scale = self.matrix.amax();
        Ok(if scale > 0.0 { diff / scale } else { diff })
    }

    pub(crate) fn check_comparable(&self, other: &DnMatrix) -> Result<()> {
        if self.grid_hash != other.grid_hash {
            return Err(Error::MismatchedRegions(format!(
                "grids differ ({} vs {})",
                self.grid_hash, other.grid_hash
            )));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::MismatchedRegions("measurement windows differ".into()));
        }
        Ok(())
    }
}

/// Schur complement of a prepared solver restricted to `rows × cols`.
pub fn dn_from_solver(solver: &ForwardSolver, rows: &[usize], cols: &[usize], q_tag: &str, grid_hash: &str) -> DnMatrix {
    let a = solver.system();
    let interior = solver.interior();
    let coupling = submatrix(a, interior, cols);
    let x = solver.interior_solve_matrix(&coupling);
    let left = submatrix(a, rows, interior);
    let matrix = submatrix(a, rows, cols) - left * x;
    DnMatrix {
        matrix,
        rows: rows.to_vec(),
        cols: cols.to_vec(),
        q_tag: q_tag.to_string(),
        grid_hash: grid_hash.to_string(),
    }
}

/// DN matrix of `K + Q` on the windows of `regions`.
pub fn assemble_dn_map(k: &SymmetricForm, q: &SymmetricForm, regions: &RegionSet, q_tag: &str) -> Result<DnMatrix> {
    let solver = ForwardSolver::new(k, q, regions)?;
    Ok(dn_from_solver(&solver, &regions.w2, &regions.w1, q_tag, &k.grid_hash))
}

/// `B_q(u_f, v_g)` by an explicit solve, with `v_g` the zero extension of `g`.
pub fn dn_pairing_by_solve(solver: &ForwardSolver, regions: &RegionSet, f: &[f64], g: &[f64]) -> f64 {
    let n = solver.num_cells();
    let mut fd = vec![0.0; n];
    for (&c, &v) in regions.w1.iter().zip(f) {
        fd[c] = v;
    }
    let (u, _) = solver.solve_values(&fd, &vec![0.0; n]);
    let a = solver.system();
    let mut acc = 0.0;
    for (&c, &gv) in regions.w2.iter().zip(g) {
        let mut row = 0.0;
        for (j, &uj) in u.iter().enumerate() {
            row += a[(c, j)] * uj;
        }
        acc += gv * row;
    }
    acc
}

/// Thread-safe store of DN matrices keyed by `(grid_hash, q_tag)`.
#[derive(Debug, Default)]
pub struct DnCache {
    entries: RwLock<HashMap<(String, String), Arc<DnMatrix>>>,
}

impl DnCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, grid_hash: &str, q_tag: &str) -> Option<Arc<DnMatrix>> {
        let guard = self.entries.read().expect("DN cache lock poisoned");
        guard.get(&(grid_hash.to_string(), q_tag.to_string())).cloned()
    }

    /// Returns the cached matrix or builds and inserts it. Concurrent misses on
    /// the same key may build twice; the first insertion wins.
    pub fn get_or_try_insert<F>(&self, grid_hash: &str, q_tag: &str, build: F) -> Result<Arc<DnMatrix>>
    where
        F: FnOnce() -> Result<DnMatrix>,
    {
        if let Some(hit) = self.get(grid_hash, q_tag) {
            return Ok(hit);
        }
        let built = Arc::new(build()?);
        let mut guard = self.entries.write().expect("DN cache lock poisoned");
        Ok(guard
            .entry((grid_hash.to_string(), q_tag.to_string()))
            .or_insert(built)
            .clone())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("DN cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Both sides of `⟨(Λ_{q₁} - Λ_{q₂}) f₁, f₂⟩ = ∫_Ω (q₁ - q₂) u₁ u₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `residual / max(|lhs|, |rhs|, 1)`
    pub relative_residual: f64,
}

/// Evaluates the integral identity for data `f1` on `W₁` and `f2` on `W₂`
/// (full-length fields).
pub fn integral_identity_residual(
    k: &SymmetricForm,
    q1: &SymmetricForm,
    q2: &SymmetricForm,
    regions: &RegionSet,
    f1: &CellField,
    f2: &CellField,
) -> Result<IdentityReport> {
    check_same_grid(k, q1)?;
    check_same_grid(k, q2)?;
    let s1 = ForwardSolver::new(k, q1, regions)?;
    let s2 = ForwardSolver::new(k, q2, regions)?;
    let l1 = dn_from_solver(&s1, &regions.w2, &regions.w1, "q1", &k.grid_hash);
    let l2 = dn_from_solver(&s2, &regions.w2, &regions.w1, "q2", &k.grid_hash);
    let f1w = f1.restrict(&regions.w1);
    let f2w = f2.restrict(&regions.w2);
    let lhs = l1.pairing(&f1w, &f2w) - l2.pairing(&f1w, &f2w);

    let n = k.dim();
    let zero = vec![0.0; n];
    let (u1, _) = s1.solve_values(&window_data(n, &regions.w1, &f1w), &zero);
    let (u2, _) = s2.solve_values(&window_data(n, &regions.w2, &f2w), &zero);
    let rhs: f64 = regions
        .omega
        .iter()
        .map(|&c| (q1.matrix[(c, c)] - q2.matrix[(c, c)]) * u1[c] * u2[c])
        .sum();
    let residual = (lhs - rhs).abs();
    Ok(IdentityReport { lhs, rhs, residual, relative_residual: residual / lhs.abs().max(rhs.abs()).max(1.0) })
}

fn window_data(n: usize, cells: &[usize], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&c, &v) in cells.iter().zip(values) {
        out[c] = v;
    }
    out
}

/// Quadratic DN form and the two potential-weighted energies bracketing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityBounds {
    /// `⟨(Λ₂ - Λ₁) f, f⟩`
    pub value: f64,
    /// `Σ (q₂ - q₁) u₁² hⁿ`
    pub upper: f64,
    /// `Σ (q₂ - q₁) u₂² hⁿ`
    pub lower: f64,
}

impl MonotonicityBounds {
    /// Largest violation of `lower ≤ value ≤ upper`, relative to the magnitudes involved.
    pub fn relative_violation(&self) -> f64 {
        let scale = self.value.abs().max(self.upper.abs()).max(self.lower.abs()).max(f64::MIN_POSITIVE);
        ((self.value - self.upper).max(0.0) + (self.lower - self.value).max(0.0)) / scale
    }
}

/// Evaluates both monotonicity inequalities for data `f` on coinciding windows.
pub fn monotonicity_bounds(
    k: &SymmetricForm,
    q1: &SymmetricForm,
    q2: &SymmetricForm,
    regions: &RegionSet,
    f: &CellField,
) -> Result<MonotonicityBounds> {
    if !regions.windows_coincide() {
        return Err(Error::MismatchedRegions("monotonicity bounds need W1 = W2".into()));
    }
    let s1 = ForwardSolver::new(k, q1, regions)?;
    let s2 = ForwardSolver::new(k, q2, regions)?;
    let l1 = dn_from_solver(&s1, &regions.w1, &regions.w1, "q1", &k.grid_hash);
    let l2 = dn_from_solver(&s2, &regions.w1, &regions.w1, "q2", &k.grid_hash);
    let fw = f.restrict(&regions.w1);
    let value = l2.pairing(&fw, &fw) - l1.pairing(&fw, &fw);
    let n = k.dim();
    let data = window_data(n, &regions.w1, &fw);
    let zero = vec![0.0; n];
    let (u1, _) = s1.solve_values(&data, &zero);
    let (u2, _) = s2.solve_values(&data, &zero);
    let weighted = |u: &[f64]| -> f64 {
        regions.omega.iter().map(|&c| (q2.matrix[(c, c)] - q1.matrix[(c, c)]) * u[c] * u[c]).sum()
    };
    Ok(MonotonicityBounds { value, upper: weighted(&u1), lower: weighted(&u2) })
}
