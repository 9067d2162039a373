//! Dimensional constants and symbols of the logarithmic and fractional
//! Laplacians.
//!
//! The logarithmic Laplacian has the integral representation
//!
//! ```text
//! L u(x) = c_n P.V.∫_{B_1(x)} (u(x) - u(z)) / |x - z|^n dz
//!        - c_n ∫_{R^n \ B_1(x)} u(z) / |x - z|^n dz + ρ_n u(x)
//! ```
//!
//! with `c_n = π^{-n/2} Γ(n/2)` and `ρ_n = 2 ln 2 + ψ(n/2) - γ`. The fractional
//! Laplacian kernel is `C_{n,s} |z|^{-n-2s}` with
//! `C_{n,s} = 4^s Γ(n/2 + s) / (π^{n/2} |Γ(-s)|)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Digamma function ψ = Γ'/Γ for positive arguments.
///
/// Upward recurrence to `x ≥ 10` followed by the Stirling-type asymptotic
/// series; absolute error below 1e-14 on `(0, ∞)`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma is only implemented for positive arguments");
    let mut x = x;
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli terms B_{2k} / (2k x^{2k}) for k = 1..6.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32_760.0)))));
    shift + x.ln() - 0.5 / x - series
}

/// Surface measure |S^{n-1}| of the unit sphere in `R^n`.
pub fn sphere_measure(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// Constants entering the integral representation of the logarithmic
/// Laplacian in dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalConstants {
    pub n: usize,
    /// Kernel constant `c_n = π^{-n/2} Γ(n/2) = 2 / |S^{n-1}|`.
    pub c_n: f64,
    /// Zero-order constant `ρ_n = 2 ln 2 + ψ(n/2) - γ`.
    pub rho_n: f64,
    pub gamma: f64,
    pub sphere_measure: f64,
}

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if n == 1 || n == 2 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Constants `c_n`, `ρ_n` of the logarithmic Laplacian for `n ∈ {1, 2}`.
pub fn log_constants(n: usize) -> Result<DimensionalConstants> {
    check_dimension(n)?;
    let half = n as f64 / 2.0;
    let c_n = PI.powf(-half) * gamma(half);
    let rho_n = 2.0 * 2f64.ln() + digamma(half) - EULER_GAMMA;
    Ok(DimensionalConstants {
        n,
        c_n,
        rho_n,
        gamma: EULER_GAMMA,
        sphere_measure: sphere_measure(n),
    })
}

/// Normalization constant `C_{n,s}` of the fractional Laplacian kernel.
pub fn frac_constant(n: usize, s: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidOrder { s, upper: 1.0 });
    }
    let half = n as f64 / 2.0;
    // |Γ(-s)| = Γ(1 - s) / s on (0, 1); avoids the reflection formula near s = 0.
    let abs_gamma_neg = gamma(1.0 - s) / s;
    Ok(4f64.powf(s) * gamma(half + s) / (PI.powf(half) * abs_gamma_neg))
}

/// Fourier symbol `2 log |ξ|` of the logarithmic Laplacian.
pub fn log_symbol(xi: &[f64]) -> Result<f64> {
    let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::SingularSymbol);
    }
    Ok(2.0 * norm.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    // High-precision reference values (mpmath, 30 digits).
    const PSI_HALF: f64 = -1.963_510_026_021_423_479_440_976_6;
    const GAMMA_THIRD: f64 = 2.678_938_534_707_747_633_655_692_9;

    #[test]
    fn gamma_matches_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(1.0 / 3.0) - GAMMA_THIRD).abs() / GAMMA_THIRD < 1e-13);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn digamma_matches_known_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(0.5) - PSI_HALF).abs() < 1e-14);
        // ψ(x + 1) = ψ(x) + 1/x
        for &x in &[0.1, 0.7, 3.3, 12.5] {
            assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-13);
        }
    }

    #[test]
    fn one_dimensional_constants() {
        let c = log_constants(1).unwrap();
        assert!((c.c_n - 1.0).abs() < 1e-14);
        assert!((c.rho_n + 2.0 * EULER_GAMMA).abs() < 1e-13);
        assert!((c.rho_n + 1.154_431_3).abs() < 1e-7);
    }

    #[test]
    fn two_dimensional_constants() {
        let c = log_constants(2).unwrap();
        assert!((c.c_n - 1.0 / PI).abs() < 1e-14);
        assert!((c.rho_n - (2.0 * 2f64.ln() - 2.0 * EULER_GAMMA)).abs() < 1e-13);
        assert!((c.rho_n - 0.231_863_1).abs() < 1e-7);
    }

    #[test]
    fn c_n_times_sphere_is_two() {
        for n in 1..=2 {
            let c = log_constants(n).unwrap();
            assert!((c.c_n * c.sphere_measure - 2.0).abs() < 1e-14);
            assert!(c.c_n > 0.0);
        }
    }

    #[test]
    fn unsupported_dimension_rejected() {
        assert!(matches!(log_constants(3), Err(Error::UnsupportedDimension(3))));
        assert!(log_constants(0).is_err());
    }

    #[test]
    fn frac_constant_half_order() {
        let c = frac_constant(1, 0.5).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn frac_constant_rejects_bad_order() {
        assert!(frac_constant(1, 0.0).is_err());
        assert!(frac_constant(1, 1.0).is_err());
        assert!(frac_constant(2, -0.2).is_err());
    }

    #[test]
    fn frac_constant_small_order_limit() {
        for n in 1..=2 {
            let c_n = log_constants(n).unwrap().c_n;
            let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
                .iter()
                .map(|&s| (frac_constant(n, s).unwrap() / s - c_n).abs())
                .collect();
            assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
            let ratio = frac_constant(n, 1e-3).unwrap() / 1e-3 / c_n;
            assert!((0.99..=1.01).contains(&ratio));
        }
    }

    #[test]
    fn frac_constant_positive() {
        for n in 1..=2 {
            for k in 1..100 {
                assert!(frac_constant(n, k as f64 / 100.0).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn log_symbol_values() {
        assert_eq!(log_symbol(&[1.0]).unwrap(), 0.0);
        assert!((log_symbol(&[2.0, 0.0]).unwrap() - 1.386_294_4).abs() < 1e-7);
        assert!(log_symbol(&[0.0, 0.0]).is_err());
        let a = log_symbol(&[0.3, -1.7]).unwrap();
        let b = log_symbol(&[-0.3, 1.7]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn constants_are_bit_identical_across_calls() {
        let a = log_constants(2).unwrap();
        let b = log_constants(2).unwrap();
        assert_eq!(a.rho_n.to_bits(), b.rho_n.to_bits());
        assert_eq!(frac_constant(2, 0.3).unwrap().to_bits(), frac_constant(2, 0.3).unwrap().to_bits());
    }
}
