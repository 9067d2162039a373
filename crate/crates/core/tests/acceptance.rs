//! Acceptance criteria. Prints one pass/fail line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use loglap::assembly::{
    assemble_fractional_form, assemble_h0_form, assemble_log_form, assemble_log_form_fourier, assemble_mass,
    assemble_potential, max_relative_discrepancy, QuadratureSpec, SymmetricForm,
};
use loglap::config::{parse_config, Prepared};
use loglap::dnmap::{assemble_dn_map, integral_identity_residual, monotonicity_bounds};
use loglap::grid::{BoxSpec, CellField, Grid, GridSpec, RegionSet, RegionSpec, Support};
use loglap::inversion::{localized_potential, monotonicity_compare, reconstruct_potential};
use loglap::solver::ForwardSolver;
use loglap::spectral::{coercivity_check, dirichlet_spectrum, fractional_expansion_check, scaling_law_check};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<(bool, String), String>;

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: usize, title: &'static str, budget: Duration, f: impl FnOnce() -> Verdict) -> Line {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if elapsed > budget {
        passed = false;
        detail.push_str(&format!("; runtime {:.1} s over budget {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()));
    }
    Line { id, title, passed, detail, elapsed }
}

fn config(name: &str) -> Prepared {
    let path = format!("{}/configs/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_config(&text).unwrap().prepare().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `ln Γ(x)` for `x > 0` by upward shift and the Stirling series.
fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// `C_{1,s} = s 4^s Γ(1/2 + s) / (√π Γ(1 - s))`.
fn frac_constant_1d(s: f64) -> f64 {
    s * 4f64.powf(s) * (ln_gamma(0.5 + s) - ln_gamma(1.0 - s)).exp() / std::f64::consts::PI.sqrt()
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn closed_form_anchors() -> Verdict {
    let h: f64 = 0.25;
    let grid = Grid::new(&[-1.0], &[1.0], &[8]).unwrap();
    let quad = QuadratureSpec::default_for(1);
    let budget = Duration::from_secs(1);
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    let mut timed = |f: &dyn Fn() -> loglap::Result<SymmetricForm>| -> Result<f64, String> {
        let t = Instant::now();
        let form = f().map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        Ok(form.matrix[(0, 0)])
    };
    let k_exact = h * (2.0 - 2.0 * h.ln() - 2.0 * EULER_GAMMA);
    worst = worst.max(rel(timed(&|| assemble_log_form(&grid, &quad))?, k_exact));
    worst = worst.max(rel(timed(&|| assemble_log_form_fourier(&grid, &quad))?, k_exact));
    let h_exact = 4.0 * h * (1.0 - h.ln());
    worst = worst.max(rel(timed(&|| assemble_h0_form(&grid, &quad))?, h_exact));
    for s in [0.1, 0.25, 0.4] {
        let exact = frac_constant_1d(s) * h.powf(1.0 - 2.0 * s) / (s * (1.0 - 2.0 * s));
        worst = worst.max(rel(timed(&|| assemble_fractional_form(&grid, s, &quad))?, exact));
    }
    Ok((
        worst <= 1e-4 && slowest < budget,
        format!("max relative error {worst:.2e} (limit 1e-4), slowest assembly {:.3} s", slowest.as_secs_f64()),
    ))
}

fn route_equivalence() -> Verdict {
    let grid = Grid::new(&[-2.0], &[2.0], &[16]).unwrap();
    let quad = QuadratureSpec::default_for(1);
    let a = assemble_log_form(&grid, &quad).map_err(|e| e.to_string())?;
    let b = assemble_log_form_fourier(&grid, &quad).map_err(|e| e.to_string())?;
    let d = max_relative_discrepancy(&a.matrix, &b.matrix, 1e-300);
    Ok((d <= 1e-3, format!("max entrywise relative discrepancy {d:.2e} (limit 1e-3)")))
}

fn random_potential(omega: &[usize], n: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> CellField {
    let mut q = CellField::zeros(n, Support::Omega);
    for &c in omega {
        q.values[c] = rng.gen_range(lo..hi);
    }
    q
}

fn random_window(cells: &[usize], n: usize, rng: &mut ChaCha8Rng) -> CellField {
    let values: Vec<f64> = cells.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    CellField::from_cells(n, Support::Exterior, cells, &values)
}

fn dn_symmetry() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["dnmap_1d", "reconstruct_1d", "reconstruct_2d"] {
        let p = config(name);
        let k = assemble_log_form(&p.grid, &p.quadrature).map_err(|e| e.to_string())?;
        let n = p.grid.num_cells();
        for _ in 0..5 {
            let q = random_potential(&p.regions.omega, n, &mut rng, 0.0, 2.0);
            let q = assemble_potential(&p.grid, &p.regions, &q).map_err(|e| e.to_string())?;
            let dn = assemble_dn_map(&k, &q, &p.regions, "q").map_err(|e| e.to_string())?;
            worst = worst.max(dn.relative_asymmetry().map_err(|e| e.to_string())?);
            count += 1;
        }
    }
    Ok((worst <= 1e-10, format!("max relative asymmetry {worst:.2e} over {count} configurations (limit 1e-10)")))
}

fn integral_identity() -> Verdict {
    let p = config("identity_1d");
    let k = assemble_log_form(&p.grid, &p.quadrature).map_err(|e| e.to_string())?;
    let n = p.grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q1 = random_potential(&p.regions.omega, n, &mut rng, 0.0, 2.0);
        let q2 = random_potential(&p.regions.omega, n, &mut rng, 0.0, 2.0);
        let f1 = random_window(&p.regions.w1, n, &mut rng);
        let f2 = random_window(&p.regions.w2, n, &mut rng);
        let q1 = assemble_potential(&p.grid, &p.regions, &q1).map_err(|e| e.to_string())?;
        let q2 = assemble_potential(&p.grid, &p.regions, &q2).map_err(|e| e.to_string())?;
        let r = integral_identity_residual(&k, &q1, &q2, &p.regions, &f1, &f2).map_err(|e| e.to_string())?;
        worst = worst.max(r.relative_residual);
    }
    Ok((
        worst <= 1e-9,
        format!("max relative residual {worst:.2e} over 20 draws, |Ω| = {} cells (limit 1e-9)", p.regions.omega.len()),
    ))
}

fn monotonicity_relations() -> Verdict {
    let p = config("monotone_1d");
    let k = assemble_log_form(&p.grid, &p.quadrature).map_err(|e| e.to_string())?;
    let n = p.grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut min_eig = f64::INFINITY;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let q1 = random_potential(&p.regions.omega, n, &mut rng, 0.0, 2.0);
        let mut q2 = q1.clone();
        for &c in &p.regions.omega {
            q2.values[c] += rng.gen_range(0.0..1.0);
        }
        let q1 = assemble_potential(&p.grid, &p.regions, &q1).map_err(|e| e.to_string())?;
        let q2 = assemble_potential(&p.grid, &p.regions, &q2).map_err(|e| e.to_string())?;
        let l1 = assemble_dn_map(&k, &q1, &p.regions, "q1").map_err(|e| e.to_string())?;
        let l2 = assemble_dn_map(&k, &q2, &p.regions, "q2").map_err(|e| e.to_string())?;
        let v = monotonicity_compare(&l1, &l2, 1e-10).map_err(|e| e.to_string())?;
        min_eig = min_eig.min(v.min_eigenvalue);
        let f = random_window(&p.regions.w1, n, &mut rng);
        let b = monotonicity_bounds(&k, &q1, &q2, &p.regions, &f).map_err(|e| e.to_string())?;
        worst = worst.max(b.relative_violation());
    }
    Ok((
        min_eig >= -1e-10 && worst <= 1e-9,
        format!("min eigenvalue {min_eig:.2e} (limit -1e-10), max bound violation {worst:.2e} (limit 1e-9)"),
    ))
}

fn reconstruct(name: &str) -> Result<(f64, Vec<f64>), String> {
    let p = config(name);
    let k = assemble_log_form(&p.grid, &p.quadrature).map_err(|e| e.to_string())?;
    let n = p.grid.num_cells();
    let oracle = |q: &CellField| assemble_dn_map(&k, &assemble_potential(&p.grid, &p.regions, q)?, &p.regions, "q");
    let truth = p.potential("truth");
    let target = oracle(truth).map_err(|e| e.to_string())?;
    let r = reconstruct_potential(oracle, &target, &p.regions.partition, n, 2.0, 1e-3, None).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (block, &v) in p.regions.partition.iter().zip(&r.block_values) {
        worst = worst.max((v - truth.values[block[0]]).abs());
    }
    Ok((worst, r.block_values))
}

fn reconstruction() -> Verdict {
    let t = Instant::now();
    let (e1, v1) = reconstruct("reconstruct_1d")?;
    let t1 = t.elapsed();
    let t = Instant::now();
    let (e2, v2) = reconstruct("reconstruct_2d")?;
    let t2 = t.elapsed();
    let ok = e1 <= 1e-3 && t1 < Duration::from_secs(120) && e2 <= 1e-2 && t2 < Duration::from_secs(600);
    Ok((
        ok,
        format!(
            "1D error {e1:.2e} (limit 1e-3) values {v1:?} in {:.2} s; 2D 8x8 error {e2:.2e} (limit 1e-2) values {v2:?} in {:.2} s",
            t1.as_secs_f64(),
            t2.as_secs_f64()
        ),
    ))
}

fn fractional_expansion() -> Verdict {
    let grid = Grid::new(&[-2.0], &[2.0], &[16]).unwrap();
    let rows = fractional_expansion_check(&grid, &[0.2, 0.1, 0.05], &QuadratureSpec::default_for(1))
        .map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    let ok = ratios.len() == 2 && ratios.iter().all(|&r| r <= 0.6);
    let errors: Vec<String> = rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
    Ok((ok, format!("errors [{}], ratios {ratios:.3?} (limit 0.6)", errors.join(", "))))
}

fn scaling_law() -> Verdict {
    let grid = GridSpec { box_min: vec![-2.0], box_max: vec![2.0], cells_per_axis: vec![64] };
    let omega = BoxSpec { min: vec![-0.5], max: vec![0.5] };
    let r = scaling_law_check(&grid, &omega, 2, &QuadratureSpec::default_for(1)).map_err(|e| e.to_string())?;
    Ok((
        r.relative_discrepancy <= 0.05,
        format!(
            "λ₁(Ω) = {:.5}, λ₁(2Ω) = {:.5}, predicted {:.5}, relative discrepancy {:.2e} (limit 0.05)",
            r.lambda1, r.lambda1_scaled, r.predicted, r.relative_discrepancy
        ),
    ))
}

fn localized_potentials() -> Verdict {
    let p = config("localize_1d");
    let k = assemble_log_form(&p.grid, &p.quadrature).map_err(|e| e.to_string())?;
    let q = assemble_potential(&p.grid, &p.regions, p.potential("q")).map_err(|e| e.to_string())?;
    let solver = ForwardSolver::new(&k, &q, &p.regions).map_err(|e| e.to_string())?;
    let block = &p.regions.partition[1];
    let steps =
        localized_potential(&solver, block, &p.regions.w1, 4, 1e-2, 1e-2).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = steps.iter().map(|s| s.ratio).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = ratios.last().unwrap_or(&0.0) / ratios.first().unwrap_or(&f64::INFINITY);
    Ok((
        steps.len() == 4 && increasing && growth >= 2.0,
        format!("ratios {ratios:.4?}, growth {growth:.3} (limit 2), |M| = {}, |W| = {}", block.len(), p.regions.w1.len()),
    ))
}

fn coercivity() -> Verdict {
    let grid = Grid::new(&[-2.0], &[2.0], &[64]).unwrap();
    let k = assemble_log_form(&grid, &QuadratureSpec::default_for(1)).map_err(|e| e.to_string())?;
    let mass = assemble_mass(&grid);
    let n = grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let (mut agree, mut positive, mut negative) = (0, 0, 0);
    for _ in 0..20 {
        let half = rng.gen_range(0.25..1.25);
        let omega = RegionSpec::interval(-half, half).resolve(&grid).map_err(|e| e.to_string())?;
        let w = RegionSpec::interval(half + 0.15, (half + 0.6).min(1.95)).resolve(&grid).map_err(|e| e.to_string())?;
        let regions = RegionSet::new(&grid, &omega, &w, &w, None).map_err(|e| e.to_string())?;
        let l1 = dirichlet_spectrum(&k, &mass, &omega, 1).map_err(|e| e.to_string())?.lambda1();
        let c = -l1 + rng.gen_range(-1.0..1.0);
        let q = CellField::constant_on(n, Support::Omega, &omega, c);
        let q = assemble_potential(&grid, &regions, &q).map_err(|e| e.to_string())?;
        let r = coercivity_check(&k, &q, &mass, &omega).map_err(|e| e.to_string())?;
        agree += usize::from(r.agrees);
        if r.spectrum.condition_satisfied {
            positive += 1;
        } else {
            negative += 1;
        }
    }
    Ok((
        agree == 20 && positive > 0 && negative > 0,
        format!("{agree}/20 agree ({positive} with λ₁ + min q > 0, {negative} with λ₁ + min q ≤ 0)"),
    ))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let lines = vec![
        run(1, "closed-form anchors", secs(10), closed_form_anchors),
        run(2, "route equivalence", secs(60), route_equivalence),
        run(3, "DN symmetry", secs(120), dn_symmetry),
        run(4, "integral identity", secs(120), integral_identity),
        run(5, "monotonicity relations", secs(120), monotonicity_relations),
        run(6, "constructive reconstruction", secs(720), reconstruction),
        run(7, "fractional expansion", secs(60), fractional_expansion),
        run(8, "scaling law", secs(60), scaling_law),
        run(9, "localized potentials", secs(60), localized_potentials),
        run(10, "coercivity", secs(120), coercivity),
    ];
    let mut failed = 0;
    for l in &lines {
        let mark = if l.passed { "PASS" } else { "FAIL" };
        println!("[{mark}] criterion {:>2} {}: {} ({:.2} s)", l.id, l.title, l.detail, l.elapsed.as_secs_f64());
        failed += usize::from(!l.passed);
    }
    println!("{} of {} acceptance criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
