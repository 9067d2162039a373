//! Strict JSON experiment configuration.
//!
//! Every field not marked optional below is required; unknown fields are
//! rejected. Documented defaults:
//!
//! | field | default |
//! |---|---|
//! | `regions.w2` | `regions.w1` |
//! | `regions.partition` | one block equal to Ω |
//! | `quadrature` | [`QuadratureSpec::default_for`] the grid dimension |
//! | `tolerances.*` | see [`Tolerances::default`] |
//! | `output_dir` | `loglap-out` (overridden by `--out`) |

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::QuadratureSpec;
use crate::grid::{define_regions, BoxSpec, CellField, Grid, GridSpec, PartitionSpec, RegionSet, RegionSpec, Support};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "loglap-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub regions: RegionsConfig,
    #[serde(default)]
    pub potentials: BTreeMap<String, PotentialSpec>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub experiment: Experiment,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsConfig {
    pub omega: RegionSpec,
    pub w1: RegionSpec,
    #[serde(default)]
    pub w2: Option<RegionSpec>,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
}

/// A potential supported on Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Constant(f64),
    /// One value per partition block.
    Blocks(Vec<f64>),
    /// One value per Ω cell, in increasing cell order.
    Cells(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// PSD tolerance of the monotonicity test; `None` means `1e-8 × max diag` of the target.
    pub psd_tol: Option<f64>,
    pub bis_tol: f64,
    /// Linear residuals and DN asymmetry.
    pub solver_tol: f64,
    /// Runge regularization.
    pub alpha: f64,
    /// Integral identity and monotonicity bounds (relative).
    pub relation_tol: f64,
    /// Smallest admissible eigenvalue of `Λ₂ - Λ₁` when `q₂ ≥ q₁`.
    pub monotone_tol: f64,
    /// Relative entrywise discrepancy between the assembly routes.
    pub route_tol: f64,
    /// Reconstruction error; `None` means `max(bis_tol, 10 psd_tol)`.
    pub recovery_tol: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd_tol: None,
            bis_tol: 1e-3,
            solver_tol: 1e-10,
            alpha: 1e-8,
            relation_tol: 1e-9,
            monotone_tol: 1e-10,
            route_tol: 1e-3,
            recovery_tol: None,
        }
    }
}

/// Exterior Dirichlet data on `W₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExteriorData {
    Constant(f64),
    /// One value per `W₁` cell.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssembleForm {
    Log,
    Mass,
    AbslogGram,
    H0Seminorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RungeTarget {
    /// Normalized indicator of a partition block.
    Block(usize),
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingRequest {
    pub factor: usize,
    #[serde(default = "default_scaling_tolerance")]
    pub tolerance: f64,
}

fn default_scaling_tolerance() -> f64 {
    0.05
}
fn default_forms() -> Vec<AssembleForm> {
    vec![AssembleForm::Log, AssembleForm::Mass]
}
fn default_draws() -> usize {
    20
}
fn default_random_range() -> [f64; 2] {
    [0.0, 2.0]
}
fn default_steps() -> usize {
    4
}
fn default_alpha0() -> f64 {
    1e-2
}
fn default_alpha_factor() -> f64 {
    1e-2
}
fn default_min_growth() -> f64 {
    2.0
}
fn default_s_list() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn default_max_ratio() -> f64 {
    0.6
}
fn default_count() -> usize {
    4
}

/// The subcommand and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Assemble {
        #[serde(default = "default_forms")]
        forms: Vec<AssembleForm>,
        #[serde(default)]
        fractional_orders: Vec<f64>,
        /// Also assemble the log form through the Fourier route and compare.
        #[serde(default)]
        compare_routes: bool,
    },
    Solve {
        potential: String,
        data: ExteriorData,
        /// Constant source `F` on Ω.
        #[serde(default)]
        source: f64,
        #[serde(default)]
        stability_draws: usize,
        #[serde(default)]
        seed: u64,
    },
    Dnmap {
        potential: String,
        #[serde(default)]
        seed: u64,
    },
    Identity {
        /// Named potentials; random draws from `random_range` when absent.
        #[serde(default)]
        q1: Option<String>,
        #[serde(default)]
        q2: Option<String>,
        #[serde(default = "default_draws")]
        draws: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_random_range")]
        random_range: [f64; 2],
    },
    Monotone {
        /// Named potentials with `q2 ≥ q1`; when absent `q1` is drawn from
        /// `random_range` and `q2 = q1 + U(0, 1)` cellwise.
        #[serde(default)]
        q1: Option<String>,
        #[serde(default)]
        q2: Option<String>,
        #[serde(default = "default_draws")]
        draws: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_random_range")]
        random_range: [f64; 2],
    },
    Reconstruct {
        truth: String,
        /// A priori bound on `‖q‖_∞`; bisection runs on `[0, 2 q_bound]` unless `a_max` is set.
        q_bound: f64,
        #[serde(default)]
        a_max: Option<f64>,
    },
    Runge {
        potential: String,
        target: RungeTarget,
        #[serde(default)]
        max_relative_residual: Option<f64>,
    },
    Localize {
        potential: String,
        block: usize,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_alpha0")]
        alpha0: f64,
        #[serde(default = "default_alpha_factor")]
        alpha_factor: f64,
        #[serde(default = "default_min_growth")]
        min_growth: f64,
    },
    Spectrum {
        #[serde(default = "default_count")]
        count: usize,
        /// Checks the coercivity condition against definiteness for this potential.
        #[serde(default)]
        potential: Option<String>,
        /// Requires Ω to be a single box.
        #[serde(default)]
        scaling: Option<ScalingRequest>,
    },
    Fraclimit {
        #[serde(default = "default_s_list")]
        s_list: Vec<f64>,
        #[serde(default = "default_max_ratio")]
        max_ratio: f64,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Assemble { .. } => "assemble",
            Experiment::Solve { .. } => "solve",
            Experiment::Dnmap { .. } => "dnmap",
            Experiment::Identity { .. } => "identity",
            Experiment::Monotone { .. } => "monotone",
            Experiment::Reconstruct { .. } => "reconstruct",
            Experiment::Runge { .. } => "runge",
            Experiment::Localize { .. } => "localize",
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Fraclimit { .. } => "fraclimit",
        }
    }
}

/// Schema violation with the path of the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

/// Parses a configuration, reporting the path of the first offending field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { "<root>".to_string() } else { path }, e.inner().to_string())
    })?;
    Ok(config)
}

/// SHA-256 of the canonical serialization (defaults filled in, fixed key order).
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// A configuration resolved against its grid.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Grid,
    pub regions: RegionSet,
    pub potentials: BTreeMap<String, CellField>,
    pub quadrature: QuadratureSpec,
    pub hash: String,
}

impl Prepared {
    pub fn potential(&self, name: &str) -> &CellField {
        &self.potentials[name]
    }
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be positive and finite (got {v})")))
    }
}

fn nonnegative(path: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("must be nonnegative and finite (got {v})")))
    }
}

impl ExperimentConfig {
    /// Semantic validation and resolution of every index set and potential.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {} (expected {CONFIG_SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let grid = Grid::from_spec(self.grid.clone()).map_err(|e| ConfigError::new("grid", e.to_string()))?;
        let w2 = self.regions.w2.as_ref().unwrap_or(&self.regions.w1);
        let regions = define_regions(&grid, &self.regions.omega, &self.regions.w1, w2, self.regions.partition.as_ref())
            .map_err(|e| ConfigError::new("regions", e.to_string()))?;
        let quadrature = self.quadrature.unwrap_or_else(|| QuadratureSpec::default_for(grid.dim()));
        quadrature.validate().map_err(|e| ConfigError::new("quadrature", e.to_string()))?;
        self.validate_tolerances()?;

        let n = grid.num_cells();
        let mut potentials = BTreeMap::new();
        for (name, spec) in &self.potentials {
            let path = format!("potentials.{name}");
            let mut field = CellField::zeros(n, Support::Omega);
            match spec {
                PotentialSpec::Constant(c) => {
                    for &cell in &regions.omega {
                        field.values[cell] = *c;
                    }
                }
                PotentialSpec::Blocks(values) => {
                    if values.len() != regions.partition.len() {
                        return Err(ConfigError::new(
                            path,
                            format!("{} values for {} partition blocks", values.len(), regions.partition.len()),
                        ));
                    }
                    for (block, &v) in regions.partition.iter().zip(values) {
                        for &cell in block {
                            field.values[cell] = v;
                        }
                    }
                }
                PotentialSpec::Cells(values) => {
                    if values.len() != regions.omega.len() {
                        return Err(ConfigError::new(
                            path,
                            format!("{} values for {} omega cells", values.len(), regions.omega.len()),
                        ));
                    }
                    for (&cell, &v) in regions.omega.iter().zip(values) {
                        field.values[cell] = v;
                    }
                }
            }
            if let Some(v) = field.values.iter().find(|v| !v.is_finite()) {
                return Err(ConfigError::new(path, format!("non-finite value {v}")));
            }
            potentials.insert(name.clone(), field);
        }
        self.validate_experiment(&regions, &potentials)?;
        Ok(Prepared { grid, regions, potentials, quadrature, hash: config_hash(self) })
    }

    fn validate_tolerances(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        if let Some(v) = t.psd_tol {
            nonnegative("tolerances.psd_tol", v)?;
        }
        positive("tolerances.bis_tol", t.bis_tol)?;
        positive("tolerances.solver_tol", t.solver_tol)?;
        nonnegative("tolerances.alpha", t.alpha)?;
        positive("tolerances.relation_tol", t.relation_tol)?;
        nonnegative("tolerances.monotone_tol", t.monotone_tol)?;
        positive("tolerances.route_tol", t.route_tol)?;
        if let Some(v) = t.recovery_tol {
            positive("tolerances.recovery_tol", v)?;
        }
        Ok(())
    }

    fn validate_experiment(
        &self,
        regions: &RegionSet,
        potentials: &BTreeMap<String, CellField>,
    ) -> Result<(), ConfigError> {
        let known = |field: &str, name: &str| -> Result<(), ConfigError> {
            if potentials.contains_key(name) {
                Ok(())
            } else {
                Err(ConfigError::new(format!("experiment.{field}"), format!("unknown potential {name:?}")))
            }
        };
        let block_index = |field: &str, b: usize| -> Result<(), ConfigError> {
            if b < regions.partition.len() {
                Ok(())
            } else {
                Err(ConfigError::new(
                    format!("experiment.{field}"),
                    format!("block {b} out of range ({} blocks)", regions.partition.len()),
                ))
            }
        };
        match &self.experiment {
            Experiment::Assemble { fractional_orders, .. } => {
                for (i, &s) in fractional_orders.iter().enumerate() {
                    if !(s > 0.0 && s < 0.5) {
                        return Err(ConfigError::new(
                            format!("experiment.fractional_orders[{i}]"),
                            format!("order must lie in (0, 0.5) (got {s})"),
                        ));
                    }
                }
            }
            Experiment::Solve { potential, data, source, .. } => {
                known("potential", potential)?;
                if let ExteriorData::Values(v) = data {
                    if v.len() != regions.w1.len() {
                        return Err(ConfigError::new(
                            "experiment.data.values",
                            format!("{} values for {} window cells", v.len(), regions.w1.len()),
                        ));
                    }
                }
                if !source.is_finite() {
                    return Err(ConfigError::new("experiment.source", "must be finite"));
                }
            }
            Experiment::Dnmap { potential, .. } => known("potential", potential)?,
            Experiment::Identity { q1, q2, random_range, .. } | Experiment::Monotone { q1, q2, random_range, .. } => {
                if let Some(name) = q1 {
                    known("q1", name)?;
                }
                if let Some(name) = q2 {
                    known("q2", name)?;
                }
                if q1.is_some() != q2.is_some() {
                    return Err(ConfigError::new("experiment.q2", "give both q1 and q2 or neither"));
                }
                if !(random_range[0] <= random_range[1] && random_range[0].is_finite() && random_range[1].is_finite()) {
                    return Err(ConfigError::new("experiment.random_range", "need finite lo <= hi"));
                }
                if matches!(self.experiment, Experiment::Monotone { .. }) && !regions.windows_coincide() {
                    return Err(ConfigError::new("regions.w2", "monotonicity needs W1 = W2"));
                }
                if let Experiment::Monotone { q1: Some(a), q2: Some(b), .. } = &self.experiment {
                    let (a, b) = (&potentials[a], &potentials[b]);
                    if let Some(&c) = regions.omega.iter().find(|&&c| b.values[c] < a.values[c]) {
                        return Err(ConfigError::new("experiment.q2", format!("q2 < q1 at cell {c}")));
                    }
                }
            }
            Experiment::Reconstruct { truth, q_bound, a_max } => {
                known("truth", truth)?;
                positive("experiment.q_bound", *q_bound)?;
                if let Some(a) = a_max {
                    positive("experiment.a_max", *a)?;
                }
                if !regions.windows_coincide() {
                    return Err(ConfigError::new("regions.w2", "reconstruction needs W1 = W2"));
                }
            }
            Experiment::Runge { potential, target, max_relative_residual } => {
                known("potential", potential)?;
                if let RungeTarget::Block(b) = target {
                    block_index("target.block", *b)?;
                }
                if let Some(v) = max_relative_residual {
                    positive("experiment.max_relative_residual", *v)?;
                }
            }
            Experiment::Localize { potential, block, steps, alpha0, alpha_factor, min_growth } => {
                known("potential", potential)?;
                block_index("block", *block)?;
                if regions.partition[*block].len() == regions.omega.len() {
                    return Err(ConfigError::new("experiment.block", "M must be a proper subset of omega"));
                }
                if *steps == 0 {
                    return Err(ConfigError::new("experiment.steps", "must be at least 1"));
                }
                positive("experiment.alpha0", *alpha0)?;
                if !(*alpha_factor > 0.0 && *alpha_factor < 1.0) {
                    return Err(ConfigError::new("experiment.alpha_factor", "must lie in (0, 1)"));
                }
                positive("experiment.min_growth", *min_growth)?;
            }
            Experiment::Spectrum { count, potential, scaling } => {
                if *count == 0 || *count > regions.omega.len() {
                    return Err(ConfigError::new(
                        "experiment.count",
                        format!("must lie in 1..={}", regions.omega.len()),
                    ));
                }
                if let Some(name) = potential {
                    known("potential", name)?;
                }
                if let Some(s) = scaling {
                    if s.factor < 2 {
                        return Err(ConfigError::new("experiment.scaling.factor", "must be an integer >= 2"));
                    }
                    positive("experiment.scaling.tolerance", s.tolerance)?;
                    if self.omega_box().is_none() {
                        return Err(ConfigError::new("regions.omega", "the scaling check needs omega given as one box"));
                    }
                }
            }
            Experiment::Fraclimit { s_list, max_ratio } => {
                if s_list.is_empty() {
                    return Err(ConfigError::new("experiment.s_list", "must not be empty"));
                }
                for (i, &s) in s_list.iter().enumerate() {
                    if !(s > 0.0 && s < 0.5) {
                        return Err(ConfigError::new(
                            format!("experiment.s_list[{i}]"),
                            format!("order must lie in (0, 0.5) (got {s})"),
                        ));
                    }
                }
                positive("experiment.max_ratio", *max_ratio)?;
            }
        }
        Ok(())
    }

    /// Ω as a single box, when it was given that way.
    pub fn omega_box(&self) -> Option<&BoxSpec> {
        match &self.regions.omega {
            RegionSpec::Boxes(b) if b.len() == 1 => Some(&b[0]),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "grid": {"box_min": [-2.0], "box_max": [2.0], "cells_per_axis": [32]},
            "regions": {
                "omega": {"boxes": [{"min": [-0.5], "max": [0.5]}]},
                "w1": {"boxes": [{"min": [1.0], "max": [1.5]}]},
                "partition": {"equal": {"count": 4}}
            },
            "potentials": {"q": {"blocks": [0.5, 1.0, 0.25, 0.75]}},
            "experiment": {"kind": "dnmap", "potential": "q"}
        })
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(&base().to_string()).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        let p = cfg.prepare().unwrap();
        assert_eq!(p.regions.omega.len(), 8);
        assert_eq!(p.regions.partition.len(), 4);
        assert_eq!(p.quadrature, QuadratureSpec::default_for(1));
        assert_eq!(p.potential("q").values[p.regions.omega[2]], 1.0);
        assert_eq!(p.hash.len(), 64);
    }

    #[test]
    fn unknown_fields_are_rejected_with_their_path() {
        let mut v = base();
        v["grid"]["spacing"] = serde_json::json!(0.1);
        let err = parse_config(&v.to_string()).unwrap_err();
        assert_eq!(err.path, "grid.spacing");

        let mut v = base();
        v["experiment"]["bogus"] = serde_json::json!(1);
        assert!(parse_config(&v.to_string()).is_err());

        let mut v = base();
        v["tolerances"] = serde_json::json!({"bis_tol": "small"});
        assert_eq!(parse_config(&v.to_string()).unwrap_err().path, "tolerances.bis_tol");
    }

    #[test]
    fn inverted_box_is_a_grid_error() {
        let mut v = base();
        v["grid"]["box_max"] = serde_json::json!([-3.0]);
        let err = parse_config(&v.to_string()).unwrap().prepare().unwrap_err();
        assert_eq!(err.path, "grid");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let mut v = base();
        v["experiment"]["potential"] = serde_json::json!("missing");
        assert_eq!(parse_config(&v.to_string()).unwrap().prepare().unwrap_err().path, "experiment.potential");

        let mut v = base();
        v["potentials"]["q"] = serde_json::json!({"blocks": [1.0]});
        assert_eq!(parse_config(&v.to_string()).unwrap().prepare().unwrap_err().path, "potentials.q");

        let mut v = base();
        v["tolerances"] = serde_json::json!({"bis_tol": -1.0});
        assert_eq!(parse_config(&v.to_string()).unwrap().prepare().unwrap_err().path, "tolerances.bis_tol");
    }

    #[test]
    fn hash_ignores_formatting_but_not_content() {
        let a = parse_config(&base().to_string()).unwrap();
        let b = parse_config(&serde_json::to_string_pretty(&base()).unwrap()).unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let mut v = base();
        v["tolerances"] = serde_json::json!({"bis_tol": 1e-4});
        assert_ne!(config_hash(&a), config_hash(&parse_config(&v.to_string()).unwrap()));
    }
}
