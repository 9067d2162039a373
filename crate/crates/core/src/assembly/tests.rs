use super::*;
use crate::constants::{frac_constant, EULER_GAMMA};
use crate::quadrature::GaussLegendre;
use proptest::prelude::*;

fn line(cells: usize, h: f64) -> Grid {
    let half = 0.5 * cells as f64 * h;
    Grid::new(&[-half], &[half], &[cells]).unwrap()
}

fn square(cells: usize, h: f64) -> Grid {
    let half = 0.5 * cells as f64 * h;
    Grid::new(&[-half, -half], &[half, half], &[cells, cells]).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Second difference `g(d + h) - 2 g(d) + g(d - h)` of `g(a) = a ln a`.
fn log_second_difference(d: f64, h: f64) -> f64 {
    let g = |a: f64| if a == 0.0 { 0.0 } else { a * a.ln() };
    g(d + h) - 2.0 * g(d) + g(d - h)
}

#[test]
fn log_diagonal_matches_closed_form() {
    for &h in &[0.25, 0.1, 1.0 / 16.0] {
        let g = line(5, h);
        let k = assemble_log_form(&g, &QuadratureSpec::default_for(1)).unwrap();
        let exact = h * (2.0 - 2.0 * h.ln() - 2.0 * EULER_GAMMA);
        assert!(rel(k.matrix[(2, 2)], exact) < 1e-12, "h = {h}: {}", k.matrix[(2, 2)]);
    }
}

#[test]
fn log_single_cell_example_value() {
    let g = line(5, 0.25);
    let k = assemble_log_form(&g, &QuadratureSpec::default_for(1)).unwrap();
    assert!((k.matrix[(0, 0)] - 0.9045).abs() < 1e-4);
}

#[test]
fn log_off_diagonal_matches_closed_form() {
    let h = 0.125;
    let g = line(24, h);
    let k = assemble_log_form(&g, &QuadratureSpec::default_for(1)).unwrap();
    for j in 1..24 {
        let d = j as f64 * h;
        let exact = -log_second_difference(d, h);
        assert!(rel(k.matrix[(0, j)], exact) < 1e-11, "offset {j}: {} vs {exact}", k.matrix[(0, j)]);
        assert!(k.matrix[(0, j)] < 0.0);
    }
}

#[test]
fn separated_cells_match_tensor_quadrature() {
    // centers two apart: the pair lies entirely in the far field
    let h = 0.25;
    let g = line(9, h);
    let k = assemble_log_form(&g, &QuadratureSpec::default_for(1)).unwrap();
    let rule = GaussLegendre::new(20);
    let oracle = -rule.integrate(-1.0 - 0.5 * h, -1.0 + 0.5 * h, |x| {
        rule.integrate(1.0 - 0.5 * h, 1.0 + 0.5 * h, |z| 1.0 / (z - x))
    });
    assert!(rel(k.matrix[(0, 8)], oracle) < 1e-12);

    let g2 = Grid::new(&[-1.125, -0.125], &[1.125, 0.125], &[9, 1]).unwrap();
    let k2 = assemble_log_form(&g2, &QuadratureSpec::default_for(2)).unwrap();
    let oracle2 = -std::f64::consts::FRAC_1_PI
        * rule.integrate(-1.125, -0.875, |x1| {
            rule.integrate(-0.125, 0.125, |x2| {
                rule.integrate(0.875, 1.125, |z1| {
                    rule.integrate(-0.125, 0.125, |z2| 1.0 / ((z1 - x1).powi(2) + (z2 - x2).powi(2)))
                })
            })
        });
    assert!(rel(k2.matrix[(0, 8)], oracle2) < 1e-9, "{} vs {oracle2}", k2.matrix[(0, 8)]);
}

#[test]
fn h0_diagonal_matches_closed_form() {
    for &h in &[0.25, 0.1] {
        let g = line(5, h);
        let hf = assemble_h0_form(&g, &QuadratureSpec::default_for(1)).unwrap();
        let exact = 4.0 * h * (1.0 - h.ln());
        assert!(rel(hf.matrix[(2, 2)], exact) < 1e-12);
    }
}

#[test]
fn h0_off_diagonal_matches_direct_integration() {
    // entries straddling the unit cutoff need the truncated profile integral
    let h = 0.15;
    let g = line(12, h);
    let hf = assemble_h0_form(&g, &QuadratureSpec::default_for(1)).unwrap();
    let rule = GaussLegendre::new(30);
    for j in 1..12 {
        let d = j as f64 * h;
        let lo = d - h;
        let mut w = 0.0;
        // tri(t - d) / t over (lo, min(d + h, 1)), split at the apex t = d
        for (a, b) in [(lo, d), (d, d + h)] {
            let b = b.min(1.0);
            if b > a {
                let a = a.max(1e-300);
                let f = |t: f64| (h - (t - d).abs()) / t;
                w += if a < 1e-12 {
                    // integrable after subtracting the linear vanishing at 0
                    rule.integrate(0.0, b, |t| if t == 0.0 { 1.0 } else { f(t) })
                } else {
                    rule.integrate(a, b, f)
                };
            }
        }
        let expected = -2.0 * w;
        assert!((hf.matrix[(0, j)] - expected).abs() < 1e-12, "offset {j}: {} vs {expected}", hf.matrix[(0, j)]);
    }
}

#[test]
fn fractional_diagonal_matches_closed_form() {
    let h = 0.25;
    let g = line(5, h);
    for &s in &[0.4, 0.2, 0.05, 1e-3] {
        let k = assemble_fractional_form(&g, s, &QuadratureSpec::default_for(1)).unwrap();
        let exact = frac_constant(1, s).unwrap() * h.powf(1.0 - 2.0 * s) / (s * (1.0 - 2.0 * s));
        assert!(rel(k.matrix[(2, 2)], exact) < 1e-12, "s = {s}");
    }
}

#[test]
fn fractional_small_order_approaches_mass() {
    let g = line(5, 0.25);
    let k = assemble_fractional_form(&g, 1e-3, &QuadratureSpec::default_for(1)).unwrap();
    assert!(rel(k.matrix[(0, 0)], 0.25) < 0.01);
}

#[test]
fn fractional_off_diagonal_matches_closed_form() {
    let h = 0.125;
    let s = 0.3;
    let g = line(10, h);
    let k = assemble_fractional_form(&g, s, &QuadratureSpec::default_for(1)).unwrap();
    let c = frac_constant(1, s).unwrap();
    let big_g = |a: f64| if a == 0.0 { 0.0 } else { a.powf(1.0 - 2.0 * s) / (-2.0 * s * (1.0 - 2.0 * s)) };
    for j in 1..10 {
        let d = j as f64 * h;
        let exact = -c * (big_g(d + h) - 2.0 * big_g(d) + big_g(d - h));
        assert!(rel(k.matrix[(0, j)], exact) < 1e-11);
    }
}

#[test]
fn fractional_order_outside_range_rejected() {
    let g = line(5, 0.25);
    let q = QuadratureSpec::default_for(1);
    assert!(matches!(assemble_fractional_form(&g, 0.5, &q), Err(Error::InvalidOrder { .. })));
    assert!(assemble_fractional_form(&g, 0.0, &q).is_err());
}

#[test]
fn fourier_route_single_cell_anchor() {
    let h = 0.25;
    let g = line(5, h);
    let k = assemble_log_form_fourier(&g, &QuadratureSpec::default_for(1)).unwrap();
    let exact = h * (2.0 - 2.0 * h.ln() - 2.0 * EULER_GAMMA);
    assert!(rel(k.matrix[(2, 2)], exact) < 1e-4, "{}", k.matrix[(2, 2)]);
    let b = k.truncation.unwrap();
    assert!(b.max_tail_bound > 0.0 && b.max_tail_bound < 1e-6);
}

#[test]
fn routes_agree_in_one_dimension() {
    let g = Grid::new(&[-2.0], &[2.0], &[32]).unwrap();
    let q = QuadratureSpec::default_for(1);
    let a = assemble_log_form(&g, &q).unwrap();
    let b = assemble_log_form_fourier(&g, &q).unwrap();
    let worst = max_relative_discrepancy(&a.matrix, &b.matrix, 1e-300);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn routes_agree_in_two_dimensions() {
    let g = square(6, 0.25);
    let q = QuadratureSpec::default_for(2);
    let a = assemble_log_form(&g, &q).unwrap();
    let b = assemble_log_form_fourier(&g, &q).unwrap();
    let worst = max_relative_discrepancy(&a.matrix, &b.matrix, 1e-300);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn dilation_shifts_log_form() {
    // B₀(v(·/R), w(·/R)) = R^n (B₀(v, w) - 2 ln R (v, w))
    for (small, large) in [(line(6, 0.1), line(6, 0.2)), (square(4, 0.1), square(4, 0.2))] {
        let q = QuadratureSpec::default_for(small.dim());
        let a = assemble_log_form(&small, &q).unwrap();
        let b = assemble_log_form(&large, &q).unwrap();
        let scale = 2f64.powi(small.dim() as i32);
        let mass = assemble_mass(&small).matrix;
        let predicted = (a.matrix - mass * (2.0 * 2f64.ln())) * scale;
        let worst = max_relative_discrepancy(&b.matrix, &predicted, 1e-300);
        assert!(worst < 1e-9, "dim {}: {worst}", small.dim());
    }
}

#[test]
fn gram_dominates_mass_and_is_positive_definite() {
    for g in [line(8, 0.25), square(4, 0.2)] {
        let q = QuadratureSpec::default_for(g.dim());
        let gram = assemble_abslog_gram(&g, &q).unwrap();
        for i in 0..g.num_cells() {
            assert!(gram.matrix[(i, i)] >= g.cell_volume());
        }
        assert!(gram.matrix.clone().cholesky().is_some());
        assert!(gram.max_asymmetry() <= 1e-12);
    }
}

#[test]
fn gram_single_cell_matches_direct_quadrature() {
    // ‖χ‖² = h + (1/π) ∫_0^∞ |ln ξ| h² sinc²(ξh/2) dξ
    let h = 0.25;
    let g = line(3, h);
    let gram = assemble_abslog_gram(&g, &QuadratureSpec::default_for(1)).unwrap();
    let rule = GaussLegendre::new(24);
    let f = |x: f64| {
        let y = 0.5 * x * h;
        x.ln().abs() * h * h * (y.sin() / y).powi(2)
    };
    let mut acc = 0.0;
    let mut a = 0.0;
    for k in (0..60).rev() {
        let b = 0.5f64.powi(k);
        acc += rule.integrate(a, b, f);
        a = b;
    }
    let mut a = 1.0;
    while a < 4.0e5 {
        acc += rule.integrate(a, a + 1.0, f);
        a += 1.0;
    }
    // beyond 4e5: sinc² averages to 2/(ξh)², so the tail is ≈ 2 (ln a + 1) / a
    acc += 2.0 * (a.ln() + 1.0) / a;
    let expected = h + acc / std::f64::consts::PI;
    assert!(rel(gram.matrix[(1, 1)], expected) < 1e-6, "{} vs {expected}", gram.matrix[(1, 1)]);
}

#[test]
fn h0_and_fractional_forms_are_positive_semidefinite() {
    for g in [line(10, 0.2), square(4, 0.2)] {
        let q = QuadratureSpec::default_for(g.dim());
        let h0 = assemble_h0_form(&g, &q).unwrap();
        let ks = assemble_fractional_form(&g, 0.3, &q).unwrap();
        for m in [h0.matrix, ks.matrix] {
            let eig = m.symmetric_eigenvalues();
            let scale = eig.amax();
            assert!(eig.min() >= -1e-12 * scale, "{}", eig.min());
        }
    }
}

#[test]
fn mass_and_potential() {
    let g = line(8, 0.25);
    let m = assemble_mass(&g);
    assert_eq!(m.kind, FormKind::Mass);
    for i in 0..8 {
        for j in 0..8 {
            assert_eq!(m.matrix[(i, j)], if i == j { 0.25 } else { 0.0 });
        }
    }
    let omega: Vec<usize> = (2..6).collect();
    let regions = RegionSet::new(&g, &omega, &[0], &[0], None).unwrap();
    let q = CellField::constant_on(8, crate::grid::Support::Omega, &omega, 3.0);
    let p = assemble_potential(&g, &regions, &q).unwrap();
    for i in 0..8 {
        assert_eq!(p.matrix[(i, i)], if omega.contains(&i) { 0.75 } else { 0.0 });
    }
    let zero = CellField::zeros(8, crate::grid::Support::Omega);
    assert_eq!(assemble_potential(&g, &regions, &zero).unwrap().matrix.amax(), 0.0);
}

#[test]
fn potential_outside_omega_rejected() {
    let g = line(8, 0.25);
    let regions = RegionSet::new(&g, &[3, 4], &[0], &[0], None).unwrap();
    let q = CellField::from_cells(8, crate::grid::Support::Omega, &[0], &[1.0]);
    assert!(assemble_potential(&g, &regions, &q).is_err());
}

#[test]
fn non_convergence_names_cell_pair() {
    let g = square(4, 0.2);
    let q = QuadratureSpec { gauss_order: 2, subdivision_depth: 0, panel_tolerance: 1e-15, ..QuadratureSpec::default_for(2) };
    match assemble_log_form(&g, &q) {
        Err(Error::QuadratureNonConvergence { i, j, change }) => {
            assert!(i < g.num_cells() && j < g.num_cells());
            assert!(change > 0.0);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn small_truncation_radius_reports_tail() {
    let g = line(8, 0.25);
    let q = QuadratureSpec { fourier_truncation_radius: 50.0, ..QuadratureSpec::default_for(1) };
    assert!(matches!(assemble_log_form_fourier(&g, &q), Err(Error::FourierTail { .. })));
}

#[test]
fn invalid_quadrature_rejected() {
    let g = line(8, 0.25);
    let base = QuadratureSpec::default_for(1);
    for q in [
        QuadratureSpec { gauss_order: 1, ..base },
        QuadratureSpec { fourier_truncation_radius: 1.0, ..base },
        QuadratureSpec { origin_exclusion: 1.0, ..base },
        QuadratureSpec { origin_exclusion: 0.0, ..base },
    ] {
        assert!(matches!(assemble_log_form(&g, &q), Err(Error::InvalidQuadrature(_))));
    }
}

#[test]
fn parseval_reproduces_mass() {
    for g in [line(8, 0.25), square(4, 0.25)] {
        let m = fourier_mass_matrix(&g, &QuadratureSpec::default_for(g.dim())).unwrap();
        let exact = assemble_mass(&g).matrix;
        assert!((m - exact).amax() < 1e-4 * g.cell_volume());
    }
}

#[test]
fn three_dimensional_grid_rejected() {
    // grids are capped at two dimensions
    assert!(Grid::new(&[0.0; 3], &[1.0; 3], &[4, 4, 4]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn forms_are_symmetric_and_translation_invariant(cells in 3usize..12, h in 0.05f64..0.45) {
        let g = line(cells, h);
        let q = QuadratureSpec::default_for(1);
        let k = assemble_log_form(&g, &q).unwrap();
        prop_assert!(k.max_asymmetry() <= 1e-12);
        for i in 0..cells - 1 {
            for j in 0..cells - 1 {
                prop_assert_eq!(k.matrix[(i, j)], k.matrix[(i + 1, j + 1)]);
            }
        }
    }

    #[test]
    fn two_dimensional_forms_are_symmetric(cells in 2usize..5, h in 0.1f64..0.3) {
        let g = square(cells, h);
        let k = assemble_log_form(&g, &QuadratureSpec::default_for(2)).unwrap();
        prop_assert!(k.max_asymmetry() <= 1e-12);
    }
}
