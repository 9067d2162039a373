//! Frequency-space evaluation of the forms.
//!
//! With `χ̂(ξ) = ∫ e^{-ixξ} χ(x) dx` the cross spectrum of two cells at offset
//! `d` is `Π_k S_{d_k}(ξ_k)` with `S_d(ξ) = h² sinc²(ξh/2) cos(ξd)`, and
//!
//! ```text
//! (2π)^{-n} ∫ w(|ξ|) χ̂_i conj(χ̂_j) dξ = 2^n (2π)^{-n} ∫_{[0,∞)^n} w(|ξ|) Π_k S_{d_k}(ξ_k) dξ.
//! ```
//!
//! The quadrant integral is a tensor Gauss–Legendre sum on `[0, R_ξ]^n`. The
//! cube `[0, ε_ξ]^n` is replaced by `S(0) ∫ w`, done analytically, and the part
//! beyond `R_ξ` by the non-oscillating term of
//! `S_d(ξ) = (2/ξ²)(cos ξd - cos ξ(d+h)/2 - cos ξ(d-h)/2)`. Both remainders are
//! bounded and reported.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::assembly::{distinct_offsets, fill_from_offsets, QuadratureSpec, TruncationBounds};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::GaussLegendre;

/// Radial weight applied to the cross spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierWeight {
    /// `log|ξ|`
    Log,
    /// `|log|ξ||`
    AbsLog,
    /// `1`, which reproduces the mass matrix by Parseval.
    One,
}

/// Tolerance of the Parseval check relative to `h^n`.
const PARSEVAL_TOLERANCE: f64 = 1e-3;

/// Mass matrix reproduced in frequency space.
pub fn fourier_mass_matrix(grid: &Grid, quad: &QuadratureSpec) -> Result<DMatrix<f64>> {
    Ok(assemble(grid, quad, FourierWeight::One)?.0)
}

pub(crate) fn check_parseval(grid: &Grid, quad: &QuadratureSpec) -> Result<()> {
    let m = fourier_mass_matrix(grid, quad)?;
    let vol = grid.cell_volume();
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let exact = if i == j { vol } else { 0.0 };
            worst = worst.max((m[(i, j)] - exact).abs() / vol);
        }
    }
    if worst > PARSEVAL_TOLERANCE {
        return Err(Error::FourierNormalization(worst));
    }
    Ok(())
}

/// `(2π)^{-n} ∫ w(|ξ|) χ̂_i conj(χ̂_j) dξ` for all cell pairs.
pub(crate) fn assemble(
    grid: &Grid,
    quad: &QuadratureSpec,
    weight: FourierWeight,
) -> Result<(DMatrix<f64>, TruncationBounds)> {
    let n = grid.dim();
    let h = grid.h();
    let counts = grid.cells_per_axis();
    let m_max = counts.iter().copied().max().unwrap_or(1);
    let extent = m_max as f64 * h;
    let axis = AxisRule::new(quad, extent);
    let table = axis.transform_table(h, m_max);
    let r = quad.fourier_truncation_radius;
    let eps = quad.origin_exclusion;
    let scale = 2f64.powi(n as i32) / (2.0 * PI).powi(n as i32);

    let (values, tail, origin) = if n == 1 {
        one_dimensional(&axis, &table, h, m_max, r, eps, weight, quad)
    } else {
        two_dimensional(&axis, &table, h, m_max, r, eps, weight, quad)
    };
    let bounds = TruncationBounds {
        radius: r,
        max_tail_bound: scale * tail,
        max_origin_bound: scale * origin,
    };
    let total = bounds.max_tail_bound + bounds.max_origin_bound;
    if total > quad.fourier_tolerance {
        return Err(Error::FourierTail { bound: total, tolerance: quad.fourier_tolerance, radius: r });
    }
    let lookup: HashMap<(usize, usize), f64> = distinct_offsets(grid)
        .into_iter()
        .map(|(key, _)| {
            let idx = if n == 1 { key.0 } else { key.0 * m_max + key.1 };
            (key, scale * values[idx])
        })
        .collect();
    Ok((fill_from_offsets(grid, &lookup, 0.0), bounds))
}

/// Gauss–Legendre nodes on `[0, R]`: one panel on `[0, ε]`, geometric panels up
/// to 1, then uniform panels narrow enough to resolve `cos(ξ d)` for every
/// offset inside the box.
struct AxisRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Number of leading nodes inside `[0, ε]`.
    excluded: usize,
}

impl AxisRule {
    fn new(quad: &QuadratureSpec, extent: f64) -> Self {
        let rule = GaussLegendre::new(quad.fourier_points);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let eps = quad.origin_exclusion;
        rule.push_mapped(0.0, eps, &mut nodes, &mut weights);
        let excluded = nodes.len();
        let mut a = eps;
        while a < 1.0 {
            let b = (2.0 * a).min(1.0);
            rule.push_mapped(a, b, &mut nodes, &mut weights);
            a = b;
        }
        let r = quad.fourier_truncation_radius;
        let width = (2.0 / extent).min(1.0);
        let panels = ((r - 1.0) / width).ceil() as usize;
        let step = (r - 1.0) / panels as f64;
        for p in 0..panels {
            let lo = 1.0 + p as f64 * step;
            let hi = if p + 1 == panels { r } else { lo + step };
            rule.push_mapped(lo, hi, &mut nodes, &mut weights);
        }
        Self { nodes, weights, excluded }
    }

    /// `S_{m h}(ξ_a)` stored row-major by node.
    fn transform_table(&self, h: f64, m_max: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len() * m_max);
        for &x in &self.nodes {
            for m in 0..m_max {
                out.push(cross_spectrum(x, h, m as f64 * h));
            }
        }
        out
    }
}

/// `S_d(ξ) = h² sinc²(ξh/2) cos(ξd)`.
fn cross_spectrum(xi: f64, h: f64, d: f64) -> f64 {
    let x = 0.5 * xi * h;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    h * h * sinc * sinc * (xi * d).cos()
}

/// Cosine terms `(coefficient, frequency)` of `ξ² S_{mh}(ξ) / 2`.
fn cosine_terms(m: usize, h: f64) -> [(f64, f64); 3] {
    let m = m as f64;
    [(1.0, m * h), (-0.5, (m + 1.0) * h), (-0.5, (m - 1.0).abs() * h)]
}

/// Coefficient of the non-oscillating part of `ξ² S_{mh}(ξ) / 2`.
fn mean_coefficient(m: usize, h: f64) -> f64 {
    cosine_terms(m, h).iter().filter(|t| t.1 == 0.0).map(|t| t.0).sum()
}

/// `g(R), g'(R), g''(R)` for `g(ξ) = 2 w(ξ) / ξ²`.
fn tail_profile(r: f64, weight: FourierWeight) -> [f64; 3] {
    match weight {
        FourierWeight::One => [2.0 / (r * r), -4.0 / r.powi(3), 12.0 / r.powi(4)],
        _ => {
            let l = r.ln();
            [2.0 * l / (r * r), 2.0 * (1.0 - 2.0 * l) / r.powi(3), 2.0 * (6.0 * l - 5.0) / r.powi(4)]
        }
    }
}

/// `∫_R^∞ w(ξ) S_{mh}(ξ) dξ` using `S = (2/ξ²) Σ c cos(aξ)` beyond `R`, and a
/// bound on its error.
///
/// The non-oscillating term integrates exactly; each oscillating term is
/// integrated by parts three times,
/// `∫_R^∞ g cos(aξ) = -g sin(aR)/a - g' cos(aR)/a² + g'' sin(aR)/a³ + E` with
/// `|E| ≤ |g''(R)| / a³`.
fn tail(m: usize, h: f64, r: f64, weight: FourierWeight) -> (f64, f64) {
    let [g0, g1, g2] = tail_profile(r, weight);
    let mut value = 0.0;
    let mut bound = 0.0;
    for (c, a) in cosine_terms(m, h) {
        if a == 0.0 {
            value += c * tail_integral(r, weight);
        } else {
            let (sn, cs) = (a * r).sin_cos();
            value += c * (-g0 * sn / a - g1 * cs / (a * a) + g2 * sn / a.powi(3));
            bound += c.abs() * g2.abs() / a.powi(3);
        }
    }
    (value, bound)
}

/// `∫_R^∞ (2/ξ²) w(ξ) dξ`.
fn tail_integral(r: f64, weight: FourierWeight) -> f64 {
    match weight {
        FourierWeight::One => 2.0 / r,
        _ => 2.0 * (r.ln() + 1.0) / r,
    }
}

fn radial_weight(rho: f64, weight: FourierWeight) -> f64 {
    match weight {
        FourierWeight::Log => rho.ln(),
        FourierWeight::AbsLog => rho.ln().abs(),
        FourierWeight::One => 1.0,
    }
}

/// Graded Gauss–Legendre rule on `[0, 1]` for integrands with a logarithmic
/// singularity at 0.
fn unit_interval_rule(points: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(points);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let levels = 40;
    let mut a = 0.0;
    for k in (0..=levels).rev() {
        let b = 0.5f64.powi(k);
        rule.push_mapped(a, b, &mut nodes, &mut weights);
        a = b;
    }
    (nodes, weights)
}

type Assembled = (Vec<f64>, f64, f64);

#[allow(clippy::too_many_arguments)]
fn one_dimensional(
    axis: &AxisRule,
    table: &[f64],
    h: f64,
    m_max: usize,
    r: f64,
    eps: f64,
    weight: FourierWeight,
    quad: &QuadratureSpec,
) -> Assembled {
    // The frequency integral is split as log = signed part on [0, R] plus, for
    // |log|, twice the negative part on [0, 1].
    let signed = if weight == FourierWeight::One { FourierWeight::One } else { FourierWeight::Log };
    let skip = if signed == FourierWeight::One { 0 } else { axis.excluded };
    let mut values = vec![0.0; m_max];
    for a in skip..axis.nodes.len() {
        let w = axis.weights[a] * radial_weight(axis.nodes[a], signed);
        for (m, v) in values.iter_mut().enumerate() {
            *v += w * table[a * m_max + m];
        }
    }
    let origin_term = match signed {
        FourierWeight::One => 0.0,
        _ => h * h * eps * (eps.ln() - 1.0),
    };
    let mut tail_bound: f64 = 0.0;
    let mut origin_bound: f64 = 0.0;
    for (m, v) in values.iter_mut().enumerate() {
        let (t, b) = tail(m, h, r, signed);
        *v += origin_term + t;
        tail_bound = tail_bound.max(b);
        if signed != FourierWeight::One {
            let curvature = h * h * ((m as f64 + 1.0) * h).powi(2);
            origin_bound = origin_bound.max(0.5 * curvature * eps.powi(3) * (eps.ln().abs() + 1.0 / 3.0) / 3.0);
        }
    }
    if weight == FourierWeight::AbsLog {
        let (nodes, weights) = unit_interval_rule(quad.fourier_points);
        for (m, v) in values.iter_mut().enumerate() {
            let d = m as f64 * h;
            let disk: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * -x.ln() * cross_spectrum(x, h, d))
                .sum();
            *v += 2.0 * disk;
        }
    }
    (values, tail_bound, origin_bound)
}

#[allow(clippy::too_many_arguments)]
fn two_dimensional(
    axis: &AxisRule,
    table: &[f64],
    h: f64,
    m_max: usize,
    r: f64,
    eps: f64,
    weight: FourierWeight,
    quad: &QuadratureSpec,
) -> Assembled {
    let count = axis.nodes.len();
    let mut values = vec![0.0; m_max * m_max];
    let mut tail_bound: f64 = 0.0;
    let mut origin_bound: f64 = 0.0;

    if weight == FourierWeight::One {
        // Separable: the quadrant integral factorizes over the axes.
        let factor: Vec<f64> = (0..m_max)
            .map(|m| {
                let q: f64 = (0..count).map(|a| axis.weights[a] * table[a * m_max + m]).sum();
                q + tail(m, h, r, weight).0
            })
            .collect();
        for m1 in 0..m_max {
            for m2 in 0..m_max {
                values[m1 * m_max + m2] = factor[m1] * factor[m2];
                let b = PI * h * (tail(m1, h, r, weight).1 + tail(m2, h, r, weight).1);
                tail_bound = tail_bound.max(b + 16.0 / (r * r));
            }
        }
        return (values, tail_bound, origin_bound);
    }

    // Rows T[a][m2] = Σ_b w_b log|ξ_ab| S_{m2}(ξ_b), one per first-axis node.
    let rows: Vec<Vec<f64>> = (0..count)
        .into_par_iter()
        .map(|a| {
            let xa = axis.nodes[a];
            let start = if a < axis.excluded { axis.excluded } else { 0 };
            let mut row = vec![0.0; m_max];
            for b in start..count {
                let xb = axis.nodes[b];
                let w = axis.weights[b] * 0.5 * (xa * xa + xb * xb).ln();
                let s = &table[b * m_max..(b + 1) * m_max];
                for (acc, &sv) in row.iter_mut().zip(s) {
                    *acc += w * sv;
                }
            }
            row
        })
        .collect();
    for (a, row) in rows.iter().enumerate() {
        let wa = axis.weights[a];
        let s = &table[a * m_max..(a + 1) * m_max];
        for m1 in 0..m_max {
            let c = wa * s[m1];
            let out = &mut values[m1 * m_max..(m1 + 1) * m_max];
            for (o, &t) in out.iter_mut().zip(row) {
                *o += c * t;
            }
        }
    }

    // ∫_{[0,ε]²} log|ξ| dξ
    let corner = eps * eps * (eps.ln() - 1.5 + 0.25 * PI + 0.5 * LN_2);
    let h4 = h.powi(4);
    // Strips with one coordinate beyond R: log|ξ| ≈ log ξ_k there and the other
    // axis integrates to ∫_0^∞ S_{mh} = π h [m = 0].
    let strips: Vec<(f64, f64)> = (0..m_max).map(|m| tail(m, h, r, FourierWeight::Log)).collect();
    let lnr = r.ln();
    for m1 in 0..m_max {
        for m2 in 0..m_max {
            let mu1 = mean_coefficient(m1, h);
            let mu2 = mean_coefficient(m2, h);
            let mut v = h4 * corner;
            let mut osc = 0.0;
            if m2 == 0 {
                v += PI * h * strips[m1].0;
                osc += PI * h * strips[m1].1;
            }
            if m1 == 0 {
                v += PI * h * strips[m2].0;
                osc += PI * h * strips[m2].1;
            }
            values[m1 * m_max + m2] += v;
            let radial = 2.0 * (mu1.abs() + mu2.abs()) * (4.0 * lnr + 11.0) / (r * r);
            let far_corner = 16.0 * (lnr + 2.0) / (r * r);
            tail_bound = tail_bound.max(osc + radial + far_corner);
            let curvature = h4 * h * h * ((m1 as f64 + 1.0).powi(2) + (m2 as f64 + 1.0).powi(2));
            origin_bound = origin_bound.max(curvature * eps.powi(4) * (eps.ln().abs() + 1.0));
        }
    }

    if weight == FourierWeight::AbsLog {
        // Twice the negative part of log|ξ| on the quarter disk, in polar coordinates.
        let (rho_nodes, rho_weights) = unit_interval_rule(quad.fourier_points);
        let phi_rule = GaussLegendre::new(24);
        let mut phi_nodes = Vec::new();
        let mut phi_weights = Vec::new();
        phi_rule.push_mapped(0.0, 0.5 * PI, &mut phi_nodes, &mut phi_weights);
        let disk: Vec<f64> = (0..m_max * m_max)
            .into_par_iter()
            .map(|idx| {
                let (d1, d2) = ((idx / m_max) as f64 * h, (idx % m_max) as f64 * h);
                let mut acc = 0.0;
                for (&phi, &wp) in phi_nodes.iter().zip(&phi_weights) {
                    let (sn, cs) = phi.sin_cos();
                    for (&rho, &wr) in rho_nodes.iter().zip(&rho_weights) {
                        acc += wp * wr * rho * -rho.ln()
                            * cross_spectrum(rho * cs, h, d1)
                            * cross_spectrum(rho * sn, h, d2);
                    }
                }
                acc
            })
            .collect();
        for (v, d) in values.iter_mut().zip(disk) {
            *v += 2.0 * d;
        }
    }
    (values, tail_bound, origin_bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_spectrum_integrates_to_triangle() {
        // ∫_0^∞ S_d = π tri_h(d)
        let h = 0.25;
        let quad = QuadratureSpec::default_for(1);
        let axis = AxisRule::new(&quad, 4.0);
        for (m, expected) in [(0usize, PI * h), (1, 0.0), (3, 0.0)] {
            let d = m as f64 * h;
            let q: f64 = axis.nodes.iter().zip(&axis.weights).map(|(&x, &w)| w * cross_spectrum(x, h, d)).sum();
            let tail = tail(m, h, quad.fourier_truncation_radius, FourierWeight::One).0;
            assert!((q + tail - expected).abs() < 1e-9, "m = {m}: {}", q + tail);
        }
    }

    #[test]
    fn corner_log_integral_matches_tensor_quadrature() {
        let eps = 0.3;
        let rule = GaussLegendre::new(40);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut a = 0.0;
        for k in (0..=30).rev() {
            let b = eps * 0.5f64.powi(k);
            rule.push_mapped(a, b, &mut nodes, &mut weights);
            a = b;
        }
        let mut num = 0.0;
        for (&x, &wx) in nodes.iter().zip(&weights) {
            for (&y, &wy) in nodes.iter().zip(&weights) {
                num += wx * wy * 0.5 * (x * x + y * y).ln();
            }
        }
        let closed = eps * eps * (eps.ln() - 1.5 + 0.25 * PI + 0.5 * LN_2);
        assert!((num - closed).abs() < 1e-10, "{num} vs {closed}");
    }

    #[test]
    fn mean_coefficients() {
        assert_eq!(mean_coefficient(0, 0.1), 1.0);
        assert_eq!(mean_coefficient(1, 0.1), -0.5);
        assert_eq!(mean_coefficient(4, 0.1), 0.0);
    }
}
