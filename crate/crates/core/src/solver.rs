//! Exterior-value Dirichlet problem `(L + q) u = F` in Ω, `u = f` outside Ω,
//! and minimal-norm extensions of exterior data.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{submatrix, FormKind, SymmetricForm};
use crate::error::{Error, Result};
use crate::grid::{CellField, RegionSet, Support};

/// Outcome of one forward solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub u: CellField,
    /// `‖A_II u_I - rhs‖ / ‖rhs‖` (absolute when the right-hand side vanishes).
    pub linear_residual: f64,
    /// `‖u‖_ℍ` when an energy Gram matrix is supplied.
    pub energy_norm: Option<f64>,
    /// `(‖F‖_{L²(Ω)}, norm of the exterior data)`; the second entry is the
    /// energy norm of the minimal extension when a Gram matrix is supplied and
    /// the `L²` norm of `f` otherwise.
    pub data_norms: (f64, f64),
    pub stability_ratio: Option<f64>,
}

/// Cholesky factorization of the Ω block of `A = K + Q`, reusable across data.
#[derive(Debug, Clone)]
pub struct ForwardSolver {
    system: DMatrix<f64>,
    interior: Vec<usize>,
    exterior: Vec<usize>,
    factor: Cholesky<f64, Dyn>,
    cell_volume: f64,
}

pub(crate) fn check_same_grid(a: &SymmetricForm, b: &SymmetricForm) -> Result<()> {
    if a.dim() != b.dim() || a.grid_hash != b.grid_hash {
        return Err(Error::DimensionMismatch(format!(
            "forms assembled on different grids ({} vs {})",
            a.grid_hash, b.grid_hash
        )));
    }
    Ok(())
}

/// Factors a symmetric block, reporting its inertia when it is not positive definite.
pub(crate) fn factor_spd(block: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    match Cholesky::new(block.clone()) {
        Some(c) => Ok(c),
        None => {
            let eig = block.symmetric_eigenvalues();
            let scale = eig.amax().max(f64::MIN_POSITIVE);
            let zero_tol = 1e-13 * scale;
            Err(Error::NotCoercive {
                min_eigenvalue: eig.min(),
                positive: eig.iter().filter(|&&v| v > zero_tol).count(),
                negative: eig.iter().filter(|&&v| v < -zero_tol).count(),
                zero: eig.iter().filter(|&&v| v.abs() <= zero_tol).count(),
            })
        }
    }
}

impl ForwardSolver {
    pub fn new(k: &SymmetricForm, q: &SymmetricForm, regions: &RegionSet) -> Result<Self> {
        if k.kind != FormKind::LogB0 {
            return Err(Error::InvalidArgument(format!("expected a log form, got {:?}", k.kind)));
        }
        if q.kind != FormKind::Potential {
            return Err(Error::InvalidArgument(format!("expected a potential form, got {:?}", q.kind)));
        }
        check_same_grid(k, q)?;
        let n = k.dim();
        if regions.omega.iter().chain(&regions.w1).chain(&regions.w2).any(|&c| c >= n) {
            return Err(Error::DimensionMismatch(format!("regions reference cells beyond the {n} grid cells")));
        }
        let interior = regions.omega.clone();
        let exterior: Vec<usize> = (0..n).filter(|&c| !regions.in_omega(c)).collect();
        let system = &k.matrix + &q.matrix;
        let factor = factor_spd(submatrix(&system, &interior, &interior))?;
        let cell_volume = k.cell_volume;
        Ok(Self { system, interior, exterior, factor, cell_volume })
    }

    pub fn system(&self) -> &DMatrix<f64> {
        &self.system
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn exterior(&self) -> &[usize] {
        &self.exterior
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    pub fn num_cells(&self) -> usize {
        self.system.nrows()
    }

    /// `A_II^{-1} b`.
    pub fn interior_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    /// `A_II^{-1} B` column by column.
    pub fn interior_solve_matrix(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(b)
    }

    /// Solution of `A_II u_I = M_II F_I - A_IE f_E`, returned on all cells,
    /// together with the relative residual.
    pub fn solve_values(&self, f: &[f64], source: &[f64]) -> (Vec<f64>, f64) {
        let n = self.num_cells();
        assert!(f.len() == n && source.len() == n, "data must be given on every cell");
        let ni = self.interior.len();
        let mut rhs = DVector::zeros(ni);
        for (r, &i) in self.interior.iter().enumerate() {
            let mut acc = self.cell_volume * source[i];
            for &e in &self.exterior {
                if f[e] != 0.0 {
                    acc -= self.system[(i, e)] * f[e];
                }
            }
            rhs[r] = acc;
        }
        let ui = self.factor.solve(&rhs);
        let aii = submatrix(&self.system, &self.interior, &self.interior);
        let res = (&aii * &ui - &rhs).norm();
        let scale = rhs.norm();
        let residual = if scale > 0.0 { res / scale } else { res };
        let mut u = vec![0.0; n];
        for &e in &self.exterior {
            u[e] = f[e];
        }
        for (r, &i) in self.interior.iter().enumerate() {
            u[i] = ui[r];
        }
        (u, residual)
    }

    /// Interior values of the solution with exterior data supported on `window`
    /// and zero source: the matrix `-A_II^{-1} A_{I,window}`.
    pub fn solution_operator(&self, window: &[usize]) -> DMatrix<f64> {
        let coupling = submatrix(&self.system, &self.interior, window);
        -self.factor.solve(&coupling)
    }
}

/// Solves the exterior-value problem with data `f` (exterior cells) and
/// source `F` (Ω cells).
pub fn solve_dirichlet(
    k: &SymmetricForm,
    q: &SymmetricForm,
    regions: &RegionSet,
    f: &CellField,
    source: &CellField,
    gram: Option<&SymmetricForm>,
) -> Result<SolveReport> {
    let solver = ForwardSolver::new(k, q, regions)?;
    solve_with(&solver, regions, f, source, gram)
}

/// As [`solve_dirichlet`] with a prepared factorization.
pub fn solve_with(
    solver: &ForwardSolver,
    regions: &RegionSet,
    f: &CellField,
    source: &CellField,
    gram: Option<&SymmetricForm>,
) -> Result<SolveReport> {
    let n = solver.num_cells();
    for (name, field, support) in [("f", f, Support::Exterior), ("F", source, Support::Omega)] {
        if field.values.len() != n {
            return Err(Error::DimensionMismatch(format!("{name} has {} values for {n} cells", field.values.len())));
        }
        let bad = field.values.iter().enumerate().find(|&(c, &v)| {
            !v.is_finite() || (v != 0.0 && (regions.in_omega(c) != (support == Support::Omega)))
        });
        if let Some((c, v)) = bad {
            return Err(Error::InvalidField(format!("{name} has value {v} at cell {c} outside its support")));
        }
    }
    let (u, linear_residual) = solver.solve_values(&f.values, &source.values);
    let vol = solver.cell_volume();
    let source_norm = source.l2_norm_on(&regions.omega, vol);
    let (energy_norm, data_norm) = match gram {
        Some(g) => {
            let energy = g.eval(&u, &u).max(0.0).sqrt();
            let ext = minimal_extension(g, regions, f)?;
            (Some(energy), g.eval(&ext.values, &ext.values).max(0.0).sqrt())
        }
        None => (None, f.l2_norm_on(solver.exterior(), vol)),
    };
    let total = source_norm + data_norm;
    let stability_ratio = energy_norm.filter(|_| total > 0.0).map(|e| e / total);
    Ok(SolveReport {
        u: CellField { values: u, support: Support::All },
        linear_residual,
        energy_norm,
        data_norms: (source_norm, data_norm),
        stability_ratio,
    })
}

/// Extension of exterior data minimizing the discrete `ℍ(ℝⁿ)` norm: the Ω
/// values solve `G_II f̃_I = -G_IE f_E`.
pub fn minimal_extension(gram: &SymmetricForm, regions: &RegionSet, f: &CellField) -> Result<CellField> {
    if gram.kind != FormKind::AbslogGram {
        return Err(Error::InvalidArgument(format!("expected an abs-log Gram matrix, got {:?}", gram.kind)));
    }
    let n = gram.dim();
    if f.values.len() != n {
        return Err(Error::DimensionMismatch(format!("f has {} values for {n} cells", f.values.len())));
    }
    let interior = &regions.omega;
    let exterior: Vec<usize> = (0..n).filter(|&c| !regions.in_omega(c)).collect();
    let factor = Cholesky::new(submatrix(&gram.matrix, interior, interior)).ok_or(Error::NotPositiveDefinite)?;
    let fe = DVector::from_iterator(exterior.len(), exterior.iter().map(|&c| f.values[c]));
    let rhs = -(submatrix(&gram.matrix, interior, &exterior) * fe);
    let fi = factor.solve(&rhs);
    let mut values = f.values.clone();
    for (r, &i) in interior.iter().enumerate() {
        values[i] = fi[r];
    }
    Ok(CellField { values, support: Support::All })
}

/// Empirical maximum of the stability ratio over random data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityAudit {
    pub draws: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Draws `draws` random `(f, F)` pairs with `f` supported on `window` and
/// records the stability ratio of each solve.
pub fn stability_audit<R: Rng>(
    solver: &ForwardSolver,
    regions: &RegionSet,
    gram: &SymmetricForm,
    window: &[usize],
    draws: usize,
    rng: &mut R,
) -> Result<StabilityAudit> {
    let n = solver.num_cells();
    let mut max_ratio: f64 = 0.0;
    let mut sum = 0.0;
    for _ in 0..draws {
        let mut f = CellField::zeros(n, Support::Exterior);
        for &c in window {
            f.values[c] = rng.gen_range(-1.0..1.0);
        }
        let mut source = CellField::zeros(n, Support::Omega);
        for &c in &regions.omega {
            source.values[c] = rng.gen_range(-1.0..1.0);
        }
        let report = solve_with(solver, regions, &f, &source, Some(gram))?;
        let ratio = report.stability_ratio.unwrap_or(0.0);
        max_ratio = max_ratio.max(ratio);
        sum += ratio;
    }
    Ok(StabilityAudit { draws, max_ratio, mean_ratio: if draws > 0 { sum / draws as f64 } else { 0.0 } })
}
