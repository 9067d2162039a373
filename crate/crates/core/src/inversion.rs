//! Monotonicity tests, blockwise reconstruction of potentials, Runge
//! approximation and localized potentials.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dnmap::DnMatrix;
use crate::error::{Error, Result};
use crate::grid::{CellField, Support};
use crate::solver::ForwardSolver;

/// Result of testing `Λ₁ ≤ Λ₂` in the sense of quadratic forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    /// Smallest eigenvalue of the symmetrized `Λ₂ - Λ₁`.
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub tolerance: f64,
}

/// Checks `Λ₂ - Λ₁ ⪰ -tol`.
pub fn monotonicity_compare(l1: &DnMatrix, l2: &DnMatrix, tol: f64) -> Result<MonotonicityVerdict> {
    l1.check_comparable(l2)?;
    if !l1.is_square_window() {
        return Err(Error::MismatchedRegions("monotonicity comparison needs W1 = W2".into()));
    }
    let diff = &l2.matrix - &l1.matrix;
    let sym = (&diff + diff.transpose()) * 0.5;
    let min_eigenvalue = min_symmetric_eigenvalue(sym);
    Ok(MonotonicityVerdict { min_eigenvalue, psd: min_eigenvalue >= -tol, tolerance: tol })
}

fn min_symmetric_eigenvalue(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m).eigenvalues.min()
}

/// One bisection probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionStep {
    pub a: f64,
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// Bracket after this probe.
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub a_max: f64,
    pub bis_tol: f64,
    pub psd_tol: f64,
}

/// Recovered block values of the potential with the bisection audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub block_values: Vec<f64>,
    pub bisection_trace: Vec<Vec<BisectionStep>>,
    /// Blocks where the test still passed at `a_max`, so the value is only a lower bound.
    pub saturated: Vec<bool>,
    pub config: ReconstructionConfig,
}

impl ReconstructionResult {
    /// Piecewise-constant potential `Σ â_E χ_E`.
    pub fn potential(&self, num_cells: usize, partition: &[Vec<usize>]) -> CellField {
        let mut q = CellField::zeros(num_cells, Support::Omega);
        for (block, &a) in partition.iter().zip(&self.block_values) {
            for &c in block {
                q.values[c] = a;
            }
        }
        q
    }
}

/// Default PSD tolerance: `1e-8 × max diagonal` of the target DN matrix.
pub fn default_psd_tolerance(target: &DnMatrix) -> f64 {
    let n = target.matrix.nrows().min(target.matrix.ncols());
    let diag = (0..n).map(|i| target.matrix[(i, i)].abs()).fold(0.0, f64::max);
    1e-8 * diag
}

/// For each partition block `E`, the largest `a ∈ [0, a_max]` with
/// `Λ_{a χ_E} ≤ target`, found by bisection to `bis_tol`.
///
/// `oracle` maps a candidate potential (supported on Ω) to its DN matrix.
/// Blocks are processed in parallel; each trace is deterministic.
pub fn reconstruct_potential<F>(
    oracle: F,
    target: &DnMatrix,
    partition: &[Vec<usize>],
    num_cells: usize,
    a_max: f64,
    bis_tol: f64,
    psd_tol: Option<f64>,
) -> Result<ReconstructionResult>
where
    F: Fn(&CellField) -> Result<DnMatrix> + Sync,
{
    if !(a_max > 0.0 && a_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("a_max must be positive (got {a_max})")));
    }
    if !(bis_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("bis_tol must be positive (got {bis_tol})")));
    }
    let psd_tol = psd_tol.unwrap_or_else(|| default_psd_tolerance(target));
    let outcomes: Vec<Result<(f64, Vec<BisectionStep>, bool)>> = partition
        .par_iter()
        .map(|block| {
            let probe = |a: f64| -> Result<MonotonicityVerdict> {
                let q = CellField::constant_on(num_cells, Support::Omega, block, a);
                let candidate = oracle(&q)?;
                monotonicity_compare(&candidate, target, psd_tol)
            };
            let mut trace = Vec::new();
            let top = probe(a_max)?;
            trace.push(BisectionStep { a: a_max, psd: top.psd, min_eigenvalue: top.min_eigenvalue, lo: 0.0, hi: a_max });
            if top.psd {
                log::warn!("monotonicity test passes at a_max = {a_max}; increase the bound");
                return Ok((a_max, trace, true));
            }
            let (mut lo, mut hi) = (0.0, a_max);
            while hi - lo > bis_tol {
                let mid = 0.5 * (lo + hi);
                let v = probe(mid)?;
                if v.psd {
                    lo = mid;
                } else {
                    hi = mid;
                }
                trace.push(BisectionStep { a: mid, psd: v.psd, min_eigenvalue: v.min_eigenvalue, lo, hi });
            }
            Ok((lo, trace, false))
        })
        .collect();
    let mut block_values = Vec::with_capacity(partition.len());
    let mut bisection_trace = Vec::with_capacity(partition.len());
    let mut saturated = Vec::with_capacity(partition.len());
    for o in outcomes {
        let (v, t, s) = o?;
        block_values.push(v);
        bisection_trace.push(t);
        saturated.push(s);
    }
    Ok(ReconstructionResult {
        block_values,
        bisection_trace,
        saturated,
        config: ReconstructionConfig { a_max, bis_tol, psd_tol },
    })
}

/// Regularized least-squares fit of exterior data to an interior target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RungeFit {
    /// Data on the window cells, as a full-length field.
    pub f: CellField,
    /// `‖(P_q f)|_Ω - target‖_{L²(Ω)}`
    pub residual: f64,
    pub target_norm: f64,
    pub alpha: f64,
    pub singular_values: Vec<f64>,
}

impl RungeFit {
    pub fn relative_residual(&self) -> f64 {
        if self.target_norm > 0.0 {
            self.residual / self.target_norm
        } else {
            self.residual
        }
    }
}

/// Minimizes `‖(P_q f)|_Ω - t‖²_{L²(Ω)} + α ‖f‖²_{L²(W)}` over data `f` on `window`.
///
/// `target` holds one value per Ω cell, in the order of `solver.interior()`.
/// The solution is computed from the singular value decomposition of the
/// solution operator `R = -A_II^{-1} A_IW`, so `α = 0` gives the minimum-norm
/// least-squares fit unless `R` is numerically rank deficient.
pub fn runge_fit(solver: &ForwardSolver, target: &[f64], window: &[usize], alpha: f64) -> Result<RungeFit> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be nonnegative (got {alpha})")));
    }
    if target.len() != solver.interior().len() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} values for {} interior cells",
            target.len(),
            solver.interior().len()
        )));
    }
    if window.is_empty() || window.iter().any(|c| solver.interior().binary_search(c).is_ok()) {
        return Err(Error::InvalidRegions("Runge window must be a nonempty set of exterior cells".into()));
    }
    let r = solver.solution_operator(window);
    let svd = r.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let smax = sigma.max();
    let smin = sigma.min();
    let full_rank = sigma.len() == window.len();
    if alpha == 0.0 && (!full_rank || smin <= 1e-8 * smax) {
        return Err(Error::RankDeficient(if full_rank { smin } else { 0.0 }));
    }
    let t = DVector::from_column_slice(target);
    let ut = u.transpose() * &t;
    let scaled = DVector::from_iterator(
        sigma.len(),
        sigma.iter().zip(ut.iter()).map(|(&s, &c)| if s > 0.0 { s * c / (s * s + alpha) } else { 0.0 }),
    );
    let coeffs = vt.transpose() * scaled;
    let fitted = &r * &coeffs;
    let vol = solver.cell_volume();
    let residual = ((fitted - &t).norm_squared() * vol).sqrt();
    let mut f = CellField::zeros(solver.num_cells(), Support::Exterior);
    for (&c, &v) in window.iter().zip(coeffs.iter()) {
        f.values[c] = v;
    }
    let mut singular_values: Vec<f64> = sigma.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(RungeFit { f, residual, target_norm: t.norm() * vol.sqrt(), alpha, singular_values })
}

/// One member of a localized-potential sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedStep {
    pub alpha: f64,
    /// Rescaled data `f̃ / ‖ũ‖_{L²(Ω∖M)}^{1/2}`.
    pub f: CellField,
    /// `‖u‖²_{L²(M)} / ‖u‖²_{L²(Ω∖M)}`
    pub ratio: f64,
    pub fit_residual: f64,
    pub linear_residual: f64,
    pub outside_norm: f64,
}

/// Runs Runge fits toward `χ_M / √|M|` with `α_k = alpha0 · alpha_factor^k`
/// and rescales each fit so the solution has unit `L²(Ω∖M)` norm to the power
/// one half. Stops early when the outside norm underflows.
pub fn localized_potential(
    solver: &ForwardSolver,
    block: &[usize],
    window: &[usize],
    steps: usize,
    alpha0: f64,
    alpha_factor: f64,
) -> Result<Vec<LocalizedStep>> {
    let omega = solver.interior();
    if block.is_empty() || block.iter().any(|c| omega.binary_search(c).is_err()) {
        return Err(Error::InvalidRegions("M must be a nonempty subset of omega".into()));
    }
    let mut in_block = vec![false; omega.len()];
    for c in block {
        in_block[omega.binary_search(c).expect("checked above")] = true;
    }
    if in_block.iter().all(|&b| b) {
        return Err(Error::InvalidRegions("M must be a proper subset of omega".into()));
    }
    if !(alpha0 > 0.0 && alpha_factor > 0.0 && alpha_factor < 1.0) {
        return Err(Error::InvalidArgument("need alpha0 > 0 and 0 < alpha_factor < 1".into()));
    }
    let vol = solver.cell_volume();
    let height = 1.0 / (block.len() as f64 * vol).sqrt();
    let target: Vec<f64> = in_block.iter().map(|&b| if b { height } else { 0.0 }).collect();
    let n = solver.num_cells();
    let zero = vec![0.0; n];
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        let alpha = alpha0 * alpha_factor.powi(k as i32);
        let fit = runge_fit(solver, &target, window, alpha)?;
        let (u, _) = solver.solve_values(&fit.f.values, &zero);
        let (mut inside, mut outside) = (0.0, 0.0);
        for (r, &c) in omega.iter().enumerate() {
            let v = u[c] * u[c] * vol;
            if in_block[r] {
                inside += v;
            } else {
                outside += v;
            }
        }
        let outside_norm = outside.sqrt();
        if outside_norm <= f64::EPSILON * inside.sqrt().max(f64::MIN_POSITIVE) {
            log::warn!("outside norm vanished at step {k}; stopping");
            break;
        }
        let scale = outside_norm.sqrt();
        let mut f = fit.f.clone();
        for v in &mut f.values {
            *v /= scale;
        }
        let (_, linear_residual) = solver.solve_values(&f.values, &zero);
        out.push(LocalizedStep {
            alpha,
            f,
            ratio: inside / outside,
            fit_residual: fit.residual,
            linear_residual,
            outside_norm,
        });
    }
    Ok(out)
}
