//! Physical-space evaluation of cell-pair integrals.
//!
//! For a pair of cells at offset `d` every form reduces to
//! `∫ P(t) |t|^{-n-2s} dt` over a radial range, where `P` is either the
//! autocorrelation `Φ_d(t) = Π_k tri(t_k - d_k)` with `tri(u) = max(0, h - |u|)`
//! or its complement `h^n - Φ_0(t)`. Along a ray `t = r c` both are piecewise
//! polynomials in `r` of degree at most `n`, so the radial integral is done in
//! closed form. In 2D the remaining angular integral is smooth between the
//! angles where radial breakpoints cross each other, the coordinate axes or the
//! unit circle; those panels are integrated with an adaptive Gauss–Legendre rule.

use std::f64::consts::PI;

use crate::assembly::QuadratureSpec;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Range {
    /// `|t| ≤ 1`
    Near,
    /// `|t| > 1`
    Far,
    /// all `t`
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Profile {
    Pair,
    Complement,
}

pub(crate) struct PairIntegrator {
    dim: usize,
    h: f64,
    rule: GaussLegendre,
    depth: usize,
    tolerance: f64,
}

impl PairIntegrator {
    pub(crate) fn new(grid: &Grid, quad: &QuadratureSpec) -> Self {
        Self {
            dim: grid.dim(),
            h: grid.h(),
            rule: GaussLegendre::new(quad.gauss_order),
            depth: quad.subdivision_depth,
            tolerance: quad.panel_tolerance,
        }
    }

    /// `∫_range Φ_d(t) |t|^{-n-2s} dt` for a nonzero offset `d`.
    pub(crate) fn pair(&self, d: [f64; 2], range: Range, s: f64, cells: (usize, usize)) -> Result<f64> {
        let (inner, outer) = self.support_radii(d);
        match range {
            Range::Near if inner >= 1.0 => return Ok(0.0),
            Range::Far if outer <= 1.0 => return Ok(0.0),
            _ => {}
        }
        self.angular(d, Profile::Pair, range, s, cells)
    }

    /// `∫_{|t| ≤ 1} (h^n - Φ_0(t)) |t|^{-n} dt`.
    pub(crate) fn self_near(&self, cells: (usize, usize)) -> Result<f64> {
        self.angular([0.0; 2], Profile::Complement, Range::Near, 0.0, cells)
    }

    /// `∫ (h^n - Φ_0(t)) |t|^{-n-2s} dt` over all `t`, `s > 0`.
    pub(crate) fn self_full(&self, s: f64, cells: (usize, usize)) -> Result<f64> {
        self.angular([0.0; 2], Profile::Complement, Range::Full, s, cells)
    }

    /// Smallest and largest `|t|` over the support box of `Φ_d`.
    fn support_radii(&self, d: [f64; 2]) -> (f64, f64) {
        let mut lo2 = 0.0;
        let mut hi2 = 0.0;
        for &dk in d.iter().take(self.dim) {
            let a = dk.abs();
            lo2 += (a - self.h).max(0.0).powi(2);
            hi2 += (a + self.h).powi(2);
        }
        (lo2.sqrt(), hi2.sqrt())
    }

    fn angular(&self, d: [f64; 2], profile: Profile, range: Range, s: f64, cells: (usize, usize)) -> Result<f64> {
        if self.dim == 1 {
            return Ok(self.radial([1.0, 0.0], d, profile, range, s)
                + self.radial([-1.0, 0.0], d, profile, range, s));
        }
        let f = |theta: f64| self.radial([theta.cos(), theta.sin()], d, profile, range, s);
        let breaks = self.angular_breakpoints(d, range);
        let coarse: Vec<f64> = breaks
            .windows(2)
            .map(|w| self.rule.integrate(w[0], w[1], f))
            .collect();
        let total: f64 = coarse.iter().sum();
        // Pieces far below the size of a typical entry need no relative accuracy.
        let floor = self.h.powi(2 * self.dim as i32);
        let tol = self.tolerance * total.abs().max(floor);
        // The radial closed forms cancel terms of size (|d| + 2h)^n down to the
        // size of the result, which bounds the attainable accuracy per radian.
        let reach = (d[0].abs().max(d[1].abs()) + 2.0 * self.h).max(1.0);
        let noise = 64.0 * f64::EPSILON * reach.powi(self.dim as i32);
        let mut acc = 0.0;
        for (w, &whole) in breaks.windows(2).zip(&coarse) {
            acc += self
                .refine(&f, w[0], w[1], whole, self.depth, tol, noise)
                .map_err(|change| Error::QuadratureNonConvergence { i: cells.0, j: cells.1, change })?;
        }
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        depth: usize,
        tol: f64,
        noise: f64,
    ) -> std::result::Result<f64, f64> {
        let mid = 0.5 * (a + b);
        let left = self.rule.integrate(a, mid, f);
        let right = self.rule.integrate(mid, b, f);
        let change = (left + right - whole).abs();
        let allowed = (tol / (2.0 * PI)).max(noise) * (b - a);
        if change <= allowed.max(4.0 * f64::EPSILON * (left.abs() + right.abs())) {
            return Ok(left + right);
        }
        if depth == 0 {
            return Err(change);
        }
        Ok(self.refine(f, a, mid, left, depth - 1, tol, noise)? + self.refine(f, mid, b, right, depth - 1, tol, noise)?)
    }

    fn angular_breakpoints(&self, d: [f64; 2], range: Range) -> Vec<f64> {
        let h = self.h;
        let two_pi = 2.0 * PI;
        let wrap = |t: f64| if t < 0.0 { t + two_pi } else { t };
        let mut out = vec![0.0, 0.5 * PI, PI, 1.5 * PI];
        for e0 in [-h, 0.0, h] {
            for e1 in [-h, 0.0, h] {
                let (x, y) = (d[0] + e0, d[1] + e1);
                if x != 0.0 || y != 0.0 {
                    out.push(wrap(y.atan2(x)));
                }
            }
        }
        if range != Range::Full {
            for e in [-h, 0.0, h] {
                let v = d[0] + e;
                if v.abs() <= 1.0 {
                    let a = v.acos();
                    out.push(a);
                    out.push(two_pi - a);
                }
                let v = d[1] + e;
                if v.abs() <= 1.0 {
                    let a = v.asin();
                    out.push(wrap(a));
                    out.push(PI - a);
                }
            }
        }
        out.retain(|t| (0.0..two_pi).contains(t));
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out.push(two_pi);
        out
    }

    /// `∫ P(r c) r^{-1-2s} dr` over the radial range along direction `c`.
    fn radial(&self, c: [f64; 2], d: [f64; 2], profile: Profile, range: Range, s: f64) -> f64 {
        let h = self.h;
        let n = self.dim;
        let (lo, hi) = match range {
            Range::Near => (0.0, 1.0),
            Range::Far => (1.0, f64::INFINITY),
            Range::Full => (0.0, f64::INFINITY),
        };
        let mut pts: Vec<f64> = Vec::with_capacity(8);
        for k in 0..n {
            if c[k] != 0.0 {
                for e in [-h, 0.0, h] {
                    let r = (d[k] + e) / c[k];
                    if r > 0.0 {
                        pts.push(r);
                    }
                }
            }
        }
        // Beyond the last breakpoint Φ vanishes along the ray.
        let support_end = pts.iter().copied().fold(0.0, f64::max);
        let upper = match profile {
            Profile::Pair => hi.min(support_end),
            Profile::Complement => {
                if hi.is_finite() {
                    hi
                } else {
                    support_end.max(lo)
                }
            }
        };
        if upper <= lo {
            return self.complement_tail(profile, lo, hi, s);
        }
        pts.push(lo);
        pts.push(upper);
        pts.retain(|&r| r >= lo && r <= upper);
        pts.sort_by(f64::total_cmp);
        pts.dedup();

        let hn = h.powi(n as i32);
        let mut acc = 0.0;
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let mut poly = [1.0, 0.0, 0.0];
            let mut zero = false;
            for k in 0..n {
                let u = mid * c[k] - d[k];
                if u.abs() >= h {
                    zero = true;
                    break;
                }
                // tri(r c_k - d_k) = alpha + beta r on this interval
                let (alpha, beta) = if u >= 0.0 { (h + d[k], -c[k]) } else { (h - d[k], c[k]) };
                poly = [poly[0] * alpha, poly[1] * alpha + poly[0] * beta, poly[2] * alpha + poly[1] * beta];
            }
            if zero {
                poly = [0.0; 3];
            }
            if profile == Profile::Complement {
                poly = [hn - poly[0], -poly[1], -poly[2]];
            }
            for (j, &p) in poly.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                if j == 0 && a == 0.0 {
                    // The constant term cancels exactly at the origin; anything
                    // left is rounding in the products above.
                    debug_assert!(p.abs() <= 1e-12 * hn, "non-integrable constant term {p}");
                    continue;
                }
                acc += p * monomial(j, s, a, b);
            }
        }
        acc + self.complement_tail(profile, upper.max(lo), hi, s)
    }

    /// `∫_a^∞ h^n r^{-1-2s} dr` for the complement profile on an unbounded range.
    fn complement_tail(&self, profile: Profile, a: f64, hi: f64, s: f64) -> f64 {
        if profile != Profile::Complement || hi.is_finite() {
            return 0.0;
        }
        assert!(s > 0.0 && a > 0.0, "complement profile diverges at infinity for s = 0");
        self.h.powi(self.dim as i32) * a.powf(-2.0 * s) / (2.0 * s)
    }
}

/// `∫_a^b r^{j-1-2s} dr` with `0 ≤ s < 1/2`.
fn monomial(j: usize, s: f64, a: f64, b: f64) -> f64 {
    if j == 0 {
        let log_ratio = (b / a).ln();
        if s == 0.0 {
            log_ratio
        } else {
            a.powf(-2.0 * s) * -(-2.0 * s * log_ratio).exp_m1() / (2.0 * s)
        }
    } else {
        let e = j as f64 - 2.0 * s;
        (b.powf(e) - a.powf(e)) / e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_matches_direct_formulas() {
        assert!((monomial(0, 0.0, 0.5, 2.0) - 4f64.ln()).abs() < 1e-15);
        assert!((monomial(1, 0.0, 0.5, 2.0) - 1.5).abs() < 1e-15);
        assert!((monomial(2, 0.0, 0.0, 2.0) - 2.0).abs() < 1e-15);
        let s = 0.3;
        let direct = (0.5f64.powf(-0.6) - 2f64.powf(-0.6)) / 0.6;
        assert!((monomial(0, s, 0.5, 2.0) - direct).abs() < 1e-14);
        let direct = (2f64.powf(0.4) - 0.5f64.powf(0.4)) / 0.4;
        assert!((monomial(1, s, 0.5, 2.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn monomial_small_order_tends_to_log() {
        let a = monomial(0, 1e-12, 0.3, 0.9);
        assert!((a - 3f64.ln()).abs() < 1e-11);
    }
}
