use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use cirl_core::equilibrium::paperclip_report;
use cirl_harness::two_bump::run_two_bump;
use cirl_harness::{run_factorial, run_lambda_sweep, ExperimentSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cirl", version, about = "Cooperative inverse reinforcement learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gridworld teaching experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Equilibrium analysis of the two-round apprenticeship game.
    #[command(subcommand)]
    Equilibrium(EquilibriumCommand),
    /// Serve the teaching-session HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Expert vs instructive demonstrations across feature levels.
    Run(RunArgs),
    /// Instructive-policy regret as a function of the rationality lambda.
    LambdaSweep(SweepArgs),
    /// Scripted two-bump layout: expert vs instructive demonstrations.
    TwoBump {
        /// Seed for the robot's prior particles.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Heatmap CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file ([game] and [experiment] tables).
    #[arg(long)]
    config: PathBuf,
    /// Ground-truth samples per condition.
    #[arg(long)]
    samples: Option<usize>,
    /// Results CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated lambda values.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum EquilibriumCommand {
    /// Fixpoint, exhaustive and analytic thresholds for the paperclip game.
    Paperclip {
        /// Number of points in the theta grid.
        #[arg(long, default_value_t = 10001)]
        grid: usize,
    },
}

fn load_spec(config: &PathBuf, samples: Option<usize>, out: Option<PathBuf>, threads: Option<usize>) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::from_file(config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(n) = samples {
        spec.num_samples = n;
    }
    if let Some(out) = out {
        spec.output_path = out;
    }
    if threads.is_some() {
        spec.threads = threads;
    }
    spec.validate()?;
    Ok(spec)
}

/// Print JSON to stdout; a closed pipe is not an error.
fn emit<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Experiment(ExperimentCommand::Run(args)) => {
            let spec = load_spec(&args.config, args.samples, args.out, args.threads)?;
            let result = run_factorial(&spec)?;
            emit(&result.summary)?;
            eprintln!(
                "wrote {} records to {}",
                result.records.len(),
                spec.output_path.display()
            );
        }
        Command::Experiment(ExperimentCommand::LambdaSweep(args)) => {
            let mut spec = load_spec(&args.config, args.samples, args.out, args.threads)?;
            spec.lambda_sweep = Some(args.lambdas);
            spec.validate()?;
            let result = run_lambda_sweep(&spec)?;
            emit(&result.table)?;
        }
        Command::Experiment(ExperimentCommand::TwoBump { seed, out }) => {
            emit(&run_two_bump(seed, out.as_deref())?)?;
        }
        Command::Serve { host, port } => {
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            runtime.block_on(cirl_service::serve(addr)).with_context(|| format!("serving on {addr}"))?;
        }
        Command::Equilibrium(EquilibriumCommand::Paperclip { grid }) => {
            if grid < 3 {
                bail!("--grid must be at least 3");
            }
            emit(&paperclip_report(grid)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
