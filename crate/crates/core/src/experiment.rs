//! Runs one configured experiment and writes its artifacts.
//!
//! Every run writes `report.json` and `manifest.json` plus kind-specific CSV
//! and JSON files. CSV matrices are row-major with a header row of column
//! indices, preceded by a `# config_sha256=<hex>` comment line. JSON files
//! carry `schema_version` and `config_sha256`. Only the manifest contains a
//! timestamp, so reruns of the same configuration reproduce every other file
//! byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::assembly::{
    assemble_abslog_gram, assemble_fractional_form, assemble_h0_form, assemble_log_form, assemble_log_form_fourier,
    assemble_mass, assemble_potential, max_relative_discrepancy, SymmetricForm,
};
use crate::config::{AssembleForm, ConfigError, Experiment, ExperimentConfig, ExteriorData, Prepared, RungeTarget, Tolerances};
use crate::dnmap::{
    assemble_dn_map, dn_from_solver, dn_pairing_by_solve, integral_identity_residual, monotonicity_bounds, DnCache,
    DnMatrix,
};
use crate::error::Result;
use crate::grid::{CellField, Support};
use crate::inversion::{localized_potential, monotonicity_compare, reconstruct_potential, runge_fit};
use crate::solver::{solve_with, stability_audit, ForwardSolver};
use crate::spectral::{coercivity_check, dirichlet_spectrum, fractional_expansion_check, scaling_law_check};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// One asserted numerical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: "<=", limit, passed: value <= limit }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, relation: ">=", limit, passed: value >= limit }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub kind: String,
    pub config_sha256: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Numerical failure that stopped the run.
    pub error: Option<String>,
    pub results: Value,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub report_path: PathBuf,
    pub report: Report,
    /// Written files, relative to `out_dir`, in write order.
    pub files: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("schema violation at {0}")]
    Config(#[from] ConfigError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Files produced by an experiment, kept in memory until the run finishes.
struct Artifacts {
    hash: String,
    files: Vec<(String, Vec<u8>)>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

impl Artifacts {
    fn new(hash: &str) -> Self {
        Self { hash: hash.to_string(), files: Vec::new() }
    }

    fn matrix(&mut self, name: &str, m: &DMatrix<f64>) {
        let mut s = format!("# config_sha256={}\n", self.hash);
        let header: Vec<String> = (0..m.ncols()).map(|j| j.to_string()).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols()).map(|j| fmt_f64(m[(i, j)])).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        self.files.push((name.to_string(), s.into_bytes()));
    }

    /// Cell-indexed columns: `cell`, the cell-center coordinates, then one column per field.
    fn fields(&mut self, name: &str, prepared: &Prepared, columns: &[(&str, &[f64])]) {
        let grid = &prepared.grid;
        let mut s = format!("# config_sha256={}\ncell", self.hash);
        for k in 0..grid.dim() {
            let _ = write!(s, ",x{k}");
        }
        for (label, _) in columns {
            let _ = write!(s, ",{label}");
        }
        s.push('\n');
        for c in 0..grid.num_cells() {
            let _ = write!(s, "{c}");
            for x in grid.center(c) {
                let _ = write!(s, ",{}", fmt_f64(x));
            }
            for (_, values) in columns {
                let _ = write!(s, ",{}", fmt_f64(values[c]));
            }
            s.push('\n');
        }
        self.files.push((name.to_string(), s.into_bytes()));
    }

    fn json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) {
        let doc = json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": kind,
            "config_sha256": self.hash,
            "data": data,
        });
        self.files.push((name.to_string(), pretty(&doc)));
    }
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

/// Validates `config`, runs its experiment and writes all artifacts to `out_dir`.
///
/// Schema violations return [`RunError::Config`] before anything is written.
/// Numerical failures are recorded in the report, which then fails.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> std::result::Result<RunOutcome, RunError> {
    let prepared = config.prepare()?;
    let kind = config.experiment.name();
    let mut artifacts = Artifacts::new(&prepared.hash);
    log::info!("running {kind} (config {})", &prepared.hash[..12]);
    let (checks, results, error) = match execute(config, &prepared, &mut artifacts) {
        Ok((checks, results)) => (checks, results, None),
        Err(e) => {
            log::error!("{e}");
            (Vec::new(), Value::Null, Some(e.to_string()))
        }
    };
    let passed = error.is_none() && checks.iter().all(|c| c.passed);
    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        kind: kind.to_string(),
        config_sha256: prepared.hash.clone(),
        passed,
        checks,
        error,
        results,
    };

    fs::create_dir_all(out_dir)?;
    let mut names = Vec::new();
    let mut hashes = BTreeMap::new();
    artifacts.files.push(("report.json".to_string(), pretty(&report)));
    for (name, bytes) in &artifacts.files {
        fs::write(out_dir.join(name), bytes)?;
        hashes.insert(name.clone(), hex::encode(Sha256::digest(bytes)));
        names.push(name.clone());
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "config_sha256": prepared.hash,
        "kind": kind,
        "passed": passed,
        "versions": {
            "loglap": env!("CARGO_PKG_VERSION"),
            "config_schema": crate::config::CONFIG_SCHEMA_VERSION,
            "report_schema": REPORT_SCHEMA_VERSION,
        },
        "files": hashes,
        "created_unix_seconds": created,
    });
    fs::write(out_dir.join("manifest.json"), pretty(&manifest))?;
    names.push("manifest.json".to_string());
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), report_path: out_dir.join("report.json"), report, files: names })
}

type Executed = (Vec<Check>, Value);

fn execute(config: &ExperimentConfig, p: &Prepared, out: &mut Artifacts) -> Result<Executed> {
    let tol = &config.tolerances;
    match &config.experiment {
        Experiment::Assemble { forms, fractional_orders, compare_routes } => {
            run_assemble(p, tol, forms, fractional_orders, *compare_routes, out)
        }
        Experiment::Solve { potential, data, source, stability_draws, seed } => {
            run_solve(p, tol, potential, data, *source, *stability_draws, *seed, out)
        }
        Experiment::Dnmap { potential, seed } => run_dnmap(p, tol, potential, *seed, out),
        Experiment::Identity { q1, q2, draws, seed, random_range } => {
            run_identity(p, tol, q1.as_deref().zip(q2.as_deref()), *draws, *seed, *random_range, out)
        }
        Experiment::Monotone { q1, q2, draws, seed, random_range } => {
            run_monotone(p, tol, q1.as_deref().zip(q2.as_deref()), *draws, *seed, *random_range, out)
        }
        Experiment::Reconstruct { truth, q_bound, a_max } => {
            run_reconstruct(p, tol, truth, a_max.unwrap_or(2.0 * q_bound), out)
        }
        Experiment::Runge { potential, target, max_relative_residual } => {
            run_runge(p, tol, potential, *target, *max_relative_residual, out)
        }
        Experiment::Localize { potential, block, steps, alpha0, alpha_factor, min_growth } => {
            run_localize(p, tol, potential, *block, *steps, *alpha0, *alpha_factor, *min_growth, out)
        }
        Experiment::Spectrum { count, potential, scaling } => {
            let omega_box = config.omega_box().cloned();
            run_spectrum(p, *count, potential.as_deref(), scaling.map(|s| (s, omega_box)), &config.grid, out)
        }
        Experiment::Fraclimit { s_list, max_ratio } => run_fraclimit(p, s_list, *max_ratio, out),
    }
}

fn log_form(p: &Prepared) -> Result<SymmetricForm> {
    assemble_log_form(&p.grid, &p.quadrature)
}

fn potential_form(p: &Prepared, q: &CellField) -> Result<SymmetricForm> {
    assemble_potential(&p.grid, &p.regions, q)
}

fn symmetry_check(name: &str, form: &SymmetricForm, tol: &Tolerances) -> Check {
    Check::at_most(format!("{name} asymmetry"), form.max_asymmetry(), tol.solver_tol)
}

fn run_assemble(
    p: &Prepared,
    tol: &Tolerances,
    forms: &[AssembleForm],
    orders: &[f64],
    compare_routes: bool,
    out: &mut Artifacts,
) -> Result<Executed> {
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    let mut spatial_log = None;
    for form in forms {
        let (file, f) = match form {
            AssembleForm::Log => ("log_spatial.csv", log_form(p)?),
            AssembleForm::Mass => ("mass.csv", assemble_mass(&p.grid)),
            AssembleForm::AbslogGram => ("abslog_gram.csv", assemble_abslog_gram(&p.grid, &p.quadrature)?),
            AssembleForm::H0Seminorm => ("h0_seminorm.csv", assemble_h0_form(&p.grid, &p.quadrature)?),
        };
        checks.push(symmetry_check(file.trim_end_matches(".csv"), &f, tol));
        out.matrix(file, &f.matrix);
        if *form == AssembleForm::Log {
            spatial_log = Some(f);
        }
    }
    for &s in orders {
        let f = assemble_fractional_form(&p.grid, s, &p.quadrature)?;
        let name = format!("fractional_s{s}");
        checks.push(symmetry_check(&name, &f, tol));
        out.matrix(&format!("{name}.csv"), &f.matrix);
    }
    if compare_routes {
        let spatial = match spatial_log {
            Some(f) => f,
            None => log_form(p)?,
        };
        let fourier = assemble_log_form_fourier(&p.grid, &p.quadrature)?;
        let floor = 1e-300;
        let discrepancy = max_relative_discrepancy(&spatial.matrix, &fourier.matrix, floor);
        checks.push(Check::at_most("route discrepancy (relative, entrywise)", discrepancy, tol.route_tol));
        out.matrix("log_fourier.csv", &fourier.matrix);
        results.insert("route_discrepancy".into(), json!(discrepancy));
        results.insert("fourier_truncation".into(), json!(fourier.truncation));
    }
    results.insert("grid_hash".into(), json!(p.grid.hash()));
    results.insert("num_cells".into(), json!(p.grid.num_cells()));
    results.insert("quadrature".into(), json!(p.quadrature));
    Ok((checks, Value::Object(results)))
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    p: &Prepared,
    tol: &Tolerances,
    potential: &str,
    data: &ExteriorData,
    source: f64,
    draws: usize,
    seed: u64,
    out: &mut Artifacts,
) -> Result<Executed> {
    let n = p.grid.num_cells();
    let k = log_form(p)?;
    let q = potential_form(p, p.potential(potential))?;
    let gram = assemble_abslog_gram(&p.grid, &p.quadrature)?;
    let solver = ForwardSolver::new(&k, &q, &p.regions)?;
    let mut f = CellField::zeros(n, Support::Exterior);
    for (i, &c) in p.regions.w1.iter().enumerate() {
        f.values[c] = match data {
            ExteriorData::Constant(v) => *v,
            ExteriorData::Values(v) => v[i],
        };
    }
    let src = CellField::constant_on(n, Support::Omega, &p.regions.omega, source);
    let report = solve_with(&solver, &p.regions, &f, &src, Some(&gram))?;
    let mut checks = vec![Check::at_most("linear residual", report.linear_residual, tol.solver_tol)];
    let audit = if draws > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let audit = stability_audit(&solver, &p.regions, &gram, &p.regions.w1, draws, &mut rng)?;
        checks.push(Check::at_least("stability ratio finite", f64::from(u8::from(audit.max_ratio.is_finite())), 1.0));
        Some(audit)
    } else {
        None
    };
    out.fields("solution.csv", p, &[("f", &f.values), ("u", &report.u.values)]);
    let results = json!({
        "linear_residual": report.linear_residual,
        "energy_norm": report.energy_norm,
        "data_norms": report.data_norms,
        "stability_ratio": report.stability_ratio,
        "stability_audit": audit,
    });
    Ok((checks, results))
}

fn random_window(rng: &mut ChaCha8Rng, cells: &[usize]) -> Vec<f64> {
    cells.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn window_field(n: usize, cells: &[usize], values: &[f64]) -> CellField {
    CellField::from_cells(n, Support::Exterior, cells, values)
}

fn dn_envelope(dn: &DnMatrix) -> Value {
    json!({ "rows": dn.rows, "cols": dn.cols, "q_tag": dn.q_tag, "grid_hash": dn.grid_hash })
}

fn run_dnmap(p: &Prepared, tol: &Tolerances, potential: &str, seed: u64, out: &mut Artifacts) -> Result<Executed> {
    let k = log_form(p)?;
    let q = potential_form(p, p.potential(potential))?;
    let solver = ForwardSolver::new(&k, &q, &p.regions)?;
    let dn = dn_from_solver(&solver, &p.regions.w2, &p.regions.w1, potential, &k.grid_hash);
    let mut checks = Vec::new();
    let asymmetry = if dn.is_square_window() {
        let a = dn.relative_asymmetry()?;
        checks.push(Check::at_most("relative asymmetry", a, tol.solver_tol));
        Some(a)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = random_window(&mut rng, &p.regions.w1);
        let g = random_window(&mut rng, &p.regions.w2);
        let a = dn.pairing(&f, &g);
        let b = dn_pairing_by_solve(&solver, &p.regions, &f, &g);
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
    }
    checks.push(Check::at_most("Schur pairing vs explicit solve (relative)", worst, tol.solver_tol));
    out.matrix("dn.csv", &dn.matrix);
    out.json("dn.json", "dn_matrix", &dn_envelope(&dn));
    Ok((checks, json!({ "relative_asymmetry": asymmetry, "schur_vs_solve": worst, "shape": [dn.rows.len(), dn.cols.len()] })))
}

fn random_potential(p: &Prepared, rng: &mut ChaCha8Rng, range: [f64; 2]) -> CellField {
    let mut q = CellField::zeros(p.grid.num_cells(), Support::Omega);
    for &c in &p.regions.omega {
        q.values[c] = if range[1] > range[0] { rng.gen_range(range[0]..range[1]) } else { range[0] };
    }
    q
}

fn run_identity(
    p: &Prepared,
    tol: &Tolerances,
    named: Option<(&str, &str)>,
    draws: usize,
    seed: u64,
    range: [f64; 2],
    out: &mut Artifacts,
) -> Result<Executed> {
    let k = log_form(p)?;
    let n = p.grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(draws);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let (q1, q2) = match named {
            Some((a, b)) => (p.potential(a).clone(), p.potential(b).clone()),
            None => (random_potential(p, &mut rng, range), random_potential(p, &mut rng, range)),
        };
        let f1 = window_field(n, &p.regions.w1, &random_window(&mut rng, &p.regions.w1));
        let f2 = window_field(n, &p.regions.w2, &random_window(&mut rng, &p.regions.w2));
        let r = integral_identity_residual(&k, &potential_form(p, &q1)?, &potential_form(p, &q2)?, &p.regions, &f1, &f2)?;
        worst = worst.max(r.relative_residual);
        rows.push(r);
    }
    out.json("identity.json", "integral_identity", &rows);
    let checks = vec![Check::at_most("max relative identity residual", worst, tol.relation_tol)];
    Ok((checks, json!({ "draws": draws, "max_relative_residual": worst })))
}

fn run_monotone(
    p: &Prepared,
    tol: &Tolerances,
    named: Option<(&str, &str)>,
    draws: usize,
    seed: u64,
    range: [f64; 2],
    out: &mut Artifacts,
) -> Result<Executed> {
    let k = log_form(p)?;
    let n = p.grid.num_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(draws);
    let mut min_eig = f64::INFINITY;
    let mut worst_violation: f64 = 0.0;
    for _ in 0..draws {
        let (q1, q2) = match named {
            Some((a, b)) => (p.potential(a).clone(), p.potential(b).clone()),
            None => {
                let q1 = random_potential(p, &mut rng, range);
                let mut q2 = q1.clone();
                for &c in &p.regions.omega {
                    q2.values[c] += rng.gen_range(0.0..1.0);
                }
                (q1, q2)
            }
        };
        let (f1, f2) = (potential_form(p, &q1)?, potential_form(p, &q2)?);
        let l1 = assemble_dn_map(&k, &f1, &p.regions, "q1")?;
        let l2 = assemble_dn_map(&k, &f2, &p.regions, "q2")?;
        let verdict = monotonicity_compare(&l1, &l2, tol.monotone_tol)?;
        let f = window_field(n, &p.regions.w1, &random_window(&mut rng, &p.regions.w1));
        let bounds = monotonicity_bounds(&k, &f1, &f2, &p.regions, &f)?;
        min_eig = min_eig.min(verdict.min_eigenvalue);
        worst_violation = worst_violation.max(bounds.relative_violation());
        rows.push(json!({ "verdict": verdict, "bounds": bounds }));
    }
    out.json("monotone.json", "monotonicity", &rows);
    let checks = vec![
        Check::at_least("min eigenvalue of L2 - L1", min_eig, -tol.monotone_tol),
        Check::at_most("max relative bound violation", worst_violation, tol.relation_tol),
    ];
    Ok((checks, json!({ "draws": draws, "min_eigenvalue": min_eig, "max_relative_violation": worst_violation })))
}

/// Short content tag of a potential, used as the DN cache key.
fn potential_tag(q: &CellField) -> String {
    let mut h = Sha256::new();
    for v in &q.values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

fn run_reconstruct(p: &Prepared, tol: &Tolerances, truth: &str, a_max: f64, out: &mut Artifacts) -> Result<Executed> {
    let k = log_form(p)?;
    let n = p.grid.num_cells();
    let cache = DnCache::new();
    let oracle = |q: &CellField| -> Result<DnMatrix> {
        let tag = potential_tag(q);
        let dn = cache.get_or_try_insert(&k.grid_hash, &tag, || {
            assemble_dn_map(&k, &potential_form(p, q)?, &p.regions, &tag)
        })?;
        Ok((*dn).clone())
    };
    let truth_field = p.potential(truth);
    let target = oracle(truth_field)?;
    let result = reconstruct_potential(oracle, &target, &p.regions.partition, n, a_max, tol.bis_tol, tol.psd_tol)?;
    let expected: Vec<f64> = p
        .regions
        .partition
        .iter()
        .map(|b| b.iter().map(|&c| truth_field.values[c]).fold(f64::INFINITY, f64::min))
        .collect();
    let error = result
        .block_values
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let recovery_tol = tol.recovery_tol.unwrap_or(tol.bis_tol.max(10.0 * result.config.psd_tol));
    let saturated = result.saturated.iter().filter(|&&s| s).count();
    let checks = vec![
        Check::at_most("max block error vs block minimum of truth", error, recovery_tol),
        Check::at_most("saturated blocks", saturated as f64, 0.0),
    ];
    let recovered = result.potential(n, &p.regions.partition);
    out.fields("potential.csv", p, &[("truth", &truth_field.values), ("recovered", &recovered.values)]);
    out.json("reconstruction.json", "reconstruction", &result);
    Ok((
        checks,
        json!({
            "block_values": result.block_values,
            "expected": expected,
            "max_error": error,
            "psd_tol": result.config.psd_tol,
            "a_max": a_max,
            "dn_evaluations": cache.len(),
        }),
    ))
}

fn run_runge(
    p: &Prepared,
    tol: &Tolerances,
    potential: &str,
    target: RungeTarget,
    max_relative: Option<f64>,
    out: &mut Artifacts,
) -> Result<Executed> {
    let k = log_form(p)?;
    let q = potential_form(p, p.potential(potential))?;
    let solver = ForwardSolver::new(&k, &q, &p.regions)?;
    let vol = p.grid.cell_volume();
    let t: Vec<f64> = match target {
        RungeTarget::Constant(c) => vec![c; p.regions.omega.len()],
        RungeTarget::Block(b) => {
            let block = &p.regions.partition[b];
            let height = 1.0 / (block.len() as f64 * vol).sqrt();
            p.regions.omega.iter().map(|c| if block.contains(c) { height } else { 0.0 }).collect()
        }
    };
    let fit = runge_fit(&solver, &t, &p.regions.w1, tol.alpha)?;
    let (u, residual) = solver.solve_values(&fit.f.values, &vec![0.0; p.grid.num_cells()]);
    let mut checks = vec![Check::at_most("linear residual", residual, tol.solver_tol)];
    if let Some(limit) = max_relative {
        checks.push(Check::at_most("relative fit residual", fit.relative_residual(), limit));
    }
    let mut target_full = vec![0.0; p.grid.num_cells()];
    for (&c, &v) in p.regions.omega.iter().zip(&t) {
        target_full[c] = v;
    }
    out.fields("runge.csv", p, &[("target", &target_full), ("f", &fit.f.values), ("u", &u)]);
    Ok((
        checks,
        json!({
            "alpha": fit.alpha,
            "residual": fit.residual,
            "relative_residual": fit.relative_residual(),
            "target_norm": fit.target_norm,
            "singular_values": fit.singular_values,
        }),
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_localize(
    p: &Prepared,
    tol: &Tolerances,
    potential: &str,
    block: usize,
    steps: usize,
    alpha0: f64,
    alpha_factor: f64,
    min_growth: f64,
    out: &mut Artifacts,
) -> Result<Executed> {
    let k = log_form(p)?;
    let q = potential_form(p, p.potential(potential))?;
    let solver = ForwardSolver::new(&k, &q, &p.regions)?;
    let seq = localized_potential(&solver, &p.regions.partition[block], &p.regions.w1, steps, alpha0, alpha_factor)?;
    let ratios: Vec<f64> = seq.iter().map(|s| s.ratio).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    let growth = match (ratios.first(), ratios.last()) {
        (Some(a), Some(b)) if *a > 0.0 => b / a,
        _ => 0.0,
    };
    let worst_residual = seq.iter().map(|s| s.linear_residual).fold(0.0, f64::max);
    let checks = vec![
        Check::at_least("completed steps", seq.len() as f64, steps as f64),
        Check::at_least("ratios strictly increasing", f64::from(u8::from(increasing)), 1.0),
        Check::at_least("concentration growth (last / first)", growth, min_growth),
        Check::at_most("max linear residual", worst_residual, tol.solver_tol),
    ];
    out.json("localized.json", "localized_potentials", &seq);
    Ok((checks, json!({ "ratios": ratios, "growth": growth, "alphas": seq.iter().map(|s| s.alpha).collect::<Vec<_>>() })))
}

fn run_spectrum(
    p: &Prepared,
    count: usize,
    potential: Option<&str>,
    scaling: Option<(crate::config::ScalingRequest, Option<crate::grid::BoxSpec>)>,
    grid_spec: &crate::grid::GridSpec,
    out: &mut Artifacts,
) -> Result<Executed> {
    let k = log_form(p)?;
    let mass = assemble_mass(&p.grid);
    let spectrum = dirichlet_spectrum(&k, &mass, &p.regions.omega, count)?;
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    results.insert("spectrum".into(), json!(spectrum));
    if let Some(name) = potential {
        let q = potential_form(p, p.potential(name))?;
        let c = coercivity_check(&k, &q, &mass, &p.regions.omega)?;
        checks.push(Check::at_least("eigenvalue condition agrees with definiteness", f64::from(u8::from(c.agrees)), 1.0));
        results.insert("coercivity".into(), json!(c));
    }
    if let Some((req, Some(omega_box))) = scaling {
        let s = scaling_law_check(grid_spec, &omega_box, req.factor, &p.quadrature)?;
        checks.push(Check::at_most("scaling-law discrepancy (relative)", s.relative_discrepancy, req.tolerance));
        results.insert("scaling".into(), json!(s));
    }
    out.json("spectrum.json", "spectrum", &results);
    Ok((checks, Value::Object(results)))
}

fn run_fraclimit(p: &Prepared, s_list: &[f64], max_ratio: f64, out: &mut Artifacts) -> Result<Executed> {
    let rows = fractional_expansion_check(&p.grid, s_list, &p.quadrature)?;
    let worst = rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let mut checks = Vec::new();
    if rows.len() >= 2 {
        checks.push(Check::at_most("max error ratio between successive orders", worst, max_ratio));
    }
    out.json("fraclimit.json", "fractional_expansion", &rows);
    Ok((checks, json!({ "rows": rows, "max_ratio": worst })))
}
