use std::path::PathBuf;
use std::process::ExitCode;

use bykov_cli::config::parse_config;
use bykov_cli::experiment::{run_experiment, Experiment};
use bykov_cli::verify::verify_all;
use bykov_cli::{exit_code, CliError};
use clap::{Parser, Subcommand};
use log::error;

#[derive(Parser, Debug)]
#[command(
    name = "bykov",
    version,
    about = "Hitting-time experiments on a two saddle-focus attractor"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Number of return pairs (overrides the config)
    #[arg(long, global = true)]
    pairs: Option<usize>,

    /// Tolerance (overrides the config's conjugacy or certificate tolerance)
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Hitting times and section points
    Simulate,
    /// Lemma sequences and ratios
    Diagnostics,
    /// Birkhoff averages and the historic-behavior certificate
    Birkhoff,
    /// Adjusted hitting times
    Adjusted,
    /// Conjugacy report against `params_g`
    Conjugacy,
    /// Run every acceptance criterion on the reference system
    VerifyAll,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let which = match cli.command {
        Command::VerifyAll => {
            let outcomes = verify_all();
            for o in &outcomes {
                println!("{o}");
            }
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} criteria passed", outcomes.len());
            return Ok(passed == outcomes.len());
        }
        Command::Simulate => Experiment::Simulate,
        Command::Diagnostics => Experiment::Diagnostics,
        Command::Birkhoff => Experiment::Birkhoff,
        Command::Adjusted => Experiment::Adjusted,
        Command::Conjugacy => Experiment::Conjugacy,
    };
    let path = cli.config.as_ref().ok_or_else(|| CliError::Parse {
        path: "$".into(),
        message: "--config is required for this subcommand".into(),
    })?;
    let mut cfg = parse_config(&std::fs::read(path)?)?;
    if let Some(n) = cli.pairs {
        cfg.n_pairs = n;
    }
    if let Some(tol) = cli.tol {
        cfg.tolerances.conjugacy = tol;
        cfg.tolerances.certificate = tol;
    }
    let outcome = run_experiment(&cfg, which, &cli.out)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.verdict)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("BYKOV_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        error!("{e}");
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
