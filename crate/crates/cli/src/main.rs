//! `invfilter`: run the filter experiments from a config file.
//!
//! Exit status: 0 on success, 1 on I/O errors or a manifest whose checksums are not
//! reproduced, 2 on configuration errors, 3 on numerical failures.

mod config;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use invfilter_core::par::Execution;

use config::{Plan, Resolved};
use output::{read_source, write_all, RunInfo, RunManifest, Software, Source, MANIFEST};

/// Thread count for replicate-level parallelism; `1` runs sequentially.
pub const THREADS_ENV: &str = "INVFILTER_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    NotReproduced(String),
}

impl CliError {
    fn io(e: impl std::fmt::Display) -> Self {
        CliError::Io(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::NotReproduced(_) => 1,
        }
    }
}

impl From<invfilter_core::Error> for CliError {
    fn from(e: invfilter_core::Error) -> Self {
        use invfilter_core::Error as E;
        match e {
            E::Numerical { .. } | E::NonPositiveEigenvalue { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "invfilter", version, about = "Kalman and 3DVAR iterations for linear inverse problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file or by the manifest of an earlier run.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a config and estimate its cost without running it.
    Validate { config: PathBuf },
    /// Run the oracle checks and print the results.
    Oracle,
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn setup_execution() -> Result<(Execution, usize), CliError> {
    let requested = threads()?;
    if requested == Some(1) || !cfg!(feature = "parallel") {
        return Ok((Execution::Sequential, 1));
    }
    #[cfg(feature = "parallel")]
    {
        if let Some(n) = requested {
            // fails only if a pool already exists, which is harmless here
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok((Execution::Parallel, rayon::current_num_threads()))
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

fn cmd_run(path: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let (cfg, expected) = match read_source(path)? {
        Source::Config(c) => (*c, None),
        Source::Manifest(m) => (m.config, Some(m.checksums)),
    };
    let mut resolved = cfg.resolve()?;
    if let Some(dir) = output {
        resolved.output = dir;
    }
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    let (exec, threads) = setup_execution()?;
    let t0 = Instant::now();
    let outcome = run::execute(&resolved, exec)?;
    let wall = t0.elapsed().as_secs_f64();

    let checksums = outcome.tables.iter().map(|t| (t.name.clone(), output::sha256(&t.bytes))).collect();
    let manifest = RunManifest {
        software: Software { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() },
        run: RunInfo {
            experiment: resolved.experiment.label().into(),
            seed: resolved.seed,
            threads,
            wall_time_s: wall,
            parts_s: outcome.parts_s.clone(),
        },
        config: resolved.to_config(),
        checksums,
    };
    write_all(&resolved.output, &outcome.tables)?;
    std::fs::write(resolved.output.join(MANIFEST), manifest.to_toml()?).map_err(CliError::io)?;

    for line in &outcome.summary {
        println!("{line}");
    }
    println!("wrote {} files to {} in {wall:.2}s", outcome.tables.len() + 1, resolved.output.display());
    if let Some(msg) = outcome.numerical_failure {
        return Err(CliError::Numerical(msg));
    }
    if let Some(expected) = expected {
        let bad: Vec<&String> = expected.keys().filter(|k| manifest.checksums.get(*k) != expected.get(*k)).collect();
        if !bad.is_empty() {
            let names: Vec<&str> = bad.iter().map(|s| s.as_str()).collect();
            return Err(CliError::NotReproduced(format!("checksums differ from the manifest for: {}", names.join(", "))));
        }
        println!("reproduced all {} artifacts of the manifest", expected.len());
    }
    Ok(())
}

/// Filter mode-updates and fine-grid noise values the plan will touch, and the trajectory
/// length; a noisy paired run costs two updates per mode and step.
fn cost(plan: &Plan) -> (f64, f64, String) {
    match plan {
        Plan::Single { spec, filters, replicates, horizon } => {
            let m = (spec.coarse_n * spec.coarse_n) as f64;
            let steps = spec.iterations.unwrap_or(0).max(*horizon) as f64;
            let draws = match spec.data_model {
                invfilter_core::problem::DataModel::Dm1 => steps,
                invfilter_core::problem::DataModel::Dm2 => 1.0,
            };
            let r = *replicates as f64;
            (
                2.0 * r * filters.len() as f64 * steps * m,
                r * draws * (spec.fine_n * spec.fine_n) as f64,
                format!("at least {steps} steps per trajectory (more if the stopping index exceeds it)"),
            )
        }
        Plan::Rate { spec, filters, n_list, replicates } => {
            let m = (spec.coarse_n * spec.coarse_n) as f64;
            let total: usize = n_list.iter().sum();
            let max = *n_list.last().unwrap_or(&0) as f64;
            let r = *replicates as f64;
            let draws = if spec.data_model == invfilter_core::problem::DataModel::Dm1 { max } else { 1.0 };
            (
                2.0 * r * filters.len() as f64 * total as f64 * m,
                r * draws * (spec.fine_n * spec.fine_n) as f64,
                format!("{} budgets up to N = {max}", n_list.len()),
            )
        }
        Plan::Minimax { spec, filters, n_list, replicates } => {
            let total: usize = n_list.iter().sum();
            let max = *n_list.last().unwrap_or(&0) as f64;
            let r = *replicates as f64 * filters.len() as f64;
            (2.0 * r * total as f64 * spec.modes as f64, r * max * spec.modes as f64, format!("{} budgets", n_list.len()))
        }
        Plan::Blowup { spec, horizon, replicates, .. } => {
            let work = *replicates as f64 * *horizon as f64 * spec.modes as f64;
            (2.0 * work, work, format!("{horizon} steps"))
        }
        Plan::Oracle => (0.0, 0.0, "fixed oracle suite, a few seconds".into()),
    }
}

// rough single-core throughput, measured on the paired filter loop and on noise generation
const UPDATES_PER_S: f64 = 2.5e8;
const NOISE_PER_S: f64 = 3e7;

fn report(resolved: &Resolved) {
    println!("schema: ok");
    println!("experiment: {}", resolved.experiment.label());
    println!("output: {}", resolved.output.display());
    println!("seed: {}", resolved.seed);
    match &resolved.plan {
        Plan::Single { spec, .. } => {
            if let invfilter_core::problem::AlphaRule::VariantGeometric { alpha, q } = spec.alpha_rule {
                println!("alpha schedule: alpha_n = {alpha}·{q}^(n-1), admissible (0 < q < 1)");
            }
        }
        Plan::Blowup { alpha, q, .. } => println!("alpha schedule: alpha_n = {alpha}·{q}^(n-1), admissible (0 < q < 1)"),
        _ => {}
    }
    if resolved.warnings.is_empty() {
        println!("warnings: none");
    }
    for w in &resolved.warnings {
        println!("warning: {w}");
    }
    let (updates, noise, note) = cost(&resolved.plan);
    let secs = updates / UPDATES_PER_S + noise / NOISE_PER_S;
    println!("cost: {updates:.3e} filter mode-updates, {noise:.3e} fine-grid noise values ({note})");
    println!("estimated single-thread time: {secs:.1}s");
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let cfg = match read_source(path)? {
        Source::Config(c) => *c,
        Source::Manifest(m) => m.config,
    };
    match cfg.resolve() {
        Ok(r) => {
            report(&r);
            println!("valid");
            Ok(())
        }
        Err(e) => {
            println!("invalid");
            Err(e)
        }
    }
}

fn cmd_oracle() -> Result<(), CliError> {
    let (exec, _) = setup_execution()?;
    let checks = invfilter_core::experiments::oracle_suite(exec)?;
    for c in &checks {
        println!("{:<22} {}  {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} oracle checks failed")));
    }
    println!("all {} oracle checks passed", checks.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, output } => cmd_run(&config, output),
        Command::Validate { config } => cmd_validate(&config),
        Command::Oracle => cmd_oracle(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("invfilter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
