//! `bosegas`: command-line driver for the dilute Bose gas pipelines.
//!
//! Exit codes: 0 success, 1 failed `verify` check or I/O error, 2 invalid
//! configuration, 3 no convergence, 4 outside the domain of validity.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Axis, CliResult, Observable, Outcome};
use config::{parse_format, Command, RunConfig};

/// Environment variable overriding the cache directory of the config file.
const CACHE_ENV: &str = "BOSEGAS_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "bosegas", version, about = "Bogoliubov theory of the dilute Bose gas on the torus")]
struct Cli {
    /// INI run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Two-body element cache (overrides the environment and the config).
    #[arg(long, global = true, value_name = "PATH")]
    cache_dir: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Output file, written atomically; standard output otherwise.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, global = true, value_name = "FORMAT")]
    format: Option<String>,
    /// Config override, e.g. `--set physics.N=100`; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run the command named in the config.
    Run,
    /// Continuum scattering length.
    Scattering,
    /// Box scattering length and the w, σ coefficients.
    Twobody,
    /// Bogoliubov dispersion table.
    Dispersion,
    /// Mean-field and LHY energies.
    Lhy,
    /// Lowest excitation levels from the universal dispersion.
    Spectrum,
    /// Exact-diagonalization report.
    Ed,
    /// Many-body identity check.
    Verify,
    /// One observable over a list of parameter values.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
        #[arg(long, value_enum)]
        observable: Option<Observable>,
    },
}

fn configure(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(f) = &cli.format {
        cfg.format = parse_format("--format", f)?;
    }
    if let Some(p) = &cli.out {
        cfg.out_path = Some(p.clone());
    }
    if let Some(dir) = cli.cache_dir.clone().or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)) {
        cfg.cache_dir = Some(dir);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> CliResult<i32> {
    let cfg = configure(cli)?;
    if let Some(n) = cli.threads {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (name, outcome): (&str, Outcome) = match &cli.command {
        Some(Sub::Sweep {
            axis,
            values,
            observable,
        }) => ("sweep", commands::sweep(&cfg, *axis, values, *observable)?),
        other => {
            let command = match other {
                Some(Sub::Scattering) => Command::Scattering,
                Some(Sub::Twobody) => Command::Twobody,
                Some(Sub::Dispersion) => Command::Dispersion,
                Some(Sub::Lhy) => Command::Lhy,
                Some(Sub::Spectrum) => Command::Spectrum,
                Some(Sub::Ed) => Command::Ed,
                Some(Sub::Verify) => Command::Verify,
                _ => cfg.command.ok_or_else(|| config::ConfigError {
                    field: "command".into(),
                    message: "no command given on the command line or in the config".into(),
                })?,
            };
            (command.name(), commands::run(&cfg, command)?)
        }
    };
    let bytes = outcome.table.render(name, &outcome.summary, cfg.format);
    match &cfg.out_path {
        Some(path) => {
            output::write_atomic(path, &bytes)?;
            println!("{}", outcome.summary);
        }
        None => {
            std::io::stdout().write_all(&bytes)?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
