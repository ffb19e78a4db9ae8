use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use walker_cli::{run, Command, ConfigError, RunConfig, EXIT_CONFIG};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "WALKER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "walker", version, about = "Slipping passive walker: hybrid simulation and trajectory tracking")]
struct Cli {
    /// simulate, optimize or reproduce-paper; defaults to the `command` field of the configuration.
    command: Option<Command>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run the configuration echoed in a previous run manifest.
    #[arg(long, conflicts_with = "config")]
    manifest: Option<PathBuf>,
    /// Output directory; overrides the configuration and WALKER_OUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Time step.
    #[arg(long)]
    h: Option<f64>,
    /// Number of intervals.
    #[arg(long = "N")]
    n_steps: Option<usize>,
    /// Write the zero-control baseline instead of the optimized run.
    #[arg(long)]
    uncontrolled: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match (&cli.config, &cli.manifest) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(path)) => {
            let text =
                std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.clone(), source })?;
            RunConfig::from_manifest(&text)?
        }
        (None, None) => RunConfig::default(),
    };
    if cli.config.is_none() && cli.manifest.is_none() {
        if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
            cfg.out_dir = dir.into();
        }
    }
    if let Some(c) = cli.command {
        cfg.command = c;
    }
    if let Some(dir) = &cli.out {
        cfg.out_dir = dir.clone();
    }
    if let Some(h) = cli.h {
        cfg.h = h;
    }
    if let Some(n) = cli.n_steps {
        cfg.n_steps = n;
    }
    if cli.uncontrolled {
        cfg.uncontrolled = true;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            for (k, v) in &report.metrics {
                println!("{k:<34}{v}");
            }
            if let Some(outcome) = report.manifest.get("run.outcome") {
                println!("{:<34}{outcome}", "outcome");
            }
            println!("{:<34}{}", "output", report.out_dir.display());
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
