use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use loglap::config::{parse_config, DEFAULT_OUTPUT_DIR};
use loglap::experiment::{run_experiment, RunError};

#[derive(Parser)]
#[command(name = "loglap", version, about = "Logarithmic Laplacian forward and inverse problem workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (strict JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Assemble stiffness, mass and Gram matrices.
    Assemble,
    /// Solve the exterior-value problem.
    Solve,
    /// Assemble the DN map on the measurement windows.
    Dnmap,
    /// Check the integral identity on random data.
    Identity,
    /// Check the monotonicity relations.
    Monotone,
    /// Reconstruct a blockwise potential from its DN map.
    Reconstruct,
    /// Runge approximation of an interior target.
    Runge,
    /// Localized potentials on a block.
    Localize,
    /// Dirichlet eigenvalues, coercivity and the scaling law.
    Spectrum,
    /// Fractional-order expansion as s tends to 0.
    Fraclimit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Assemble => "assemble",
            Command::Solve => "solve",
            Command::Dnmap => "dnmap",
            Command::Identity => "identity",
            Command::Monotone => "monotone",
            Command::Reconstruct => "reconstruct",
            Command::Runge => "runge",
            Command::Localize => "localize",
            Command::Spectrum => "spectrum",
            Command::Fraclimit => "fraclimit",
        }
    }
}

fn schema_error(path: &str, message: &str) -> ExitCode {
    eprintln!("schema violation at {path}: {message}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = cli.threads {
        if n == 0 {
            return schema_error("--threads", "must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let Some(config_path) = cli.config else {
        return schema_error("--config", "a configuration file is required");
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => return schema_error("--config", &format!("cannot read {}: {e}", config_path.display())),
    };
    let config = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return schema_error(&e.path, &e.message),
    };
    let wanted = cli.command.name();
    if config.experiment.name() != wanted {
        return schema_error(
            "experiment.kind",
            &format!("config describes {:?} but the subcommand is {wanted:?}", config.experiment.name()),
        );
    }
    let out = cli
        .out
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    match run_experiment(&config, &out) {
        Ok(outcome) => {
            for c in &outcome.report.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!("[{mark}] {}: {:.6e} {} {:.6e}", c.name, c.value, c.relation, c.limit);
            }
            if let Some(e) = &outcome.report.error {
                println!("[FAIL] {e}");
            }
            if outcome.report.passed {
                println!("all checks passed; outputs in {}", outcome.out_dir.display());
                ExitCode::SUCCESS
            } else {
                eprintln!("numerical check failed; see {}", outcome.report_path.display());
                ExitCode::from(1)
            }
        }
        Err(RunError::Config(e)) => schema_error(&e.path, &e.message),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
