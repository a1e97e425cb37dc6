use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sizeclust_cli::{run_benchmark, run_fit, run_simulate, run_sort, CliError, Overrides, RunConfig, RunStatus};
use sizeclust_core::LossMode;

#[derive(Parser)]
#[command(name = "sizeclust", version, about = "Size-constrained clustering of categorical survey data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the mixture posterior only.
    Fit(Flags),
    /// Fit, choose the Bayes action and identify its labels.
    Sort(Flags),
    /// Write a synthetic survey with its planted truth.
    Simulate(Flags),
    /// Replicated simulation study of LSS, LSI and VI-only actions.
    Benchmark(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every random component.
    #[arg(long)]
    seed: Option<u64>,
    /// Weight of the size term.
    #[arg(long)]
    lambda: Option<f64>,
    /// Pseudo-count added to every group.
    #[arg(long)]
    delta: Option<f64>,
    /// Target composition, e.g. 0.25,0.25,0.25,0.25.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eta: Option<Vec<f64>>,
    /// sensitive or invariant.
    #[arg(long)]
    mode: Option<LossMode>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Survey CSV, overriding `data` in the config.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Number of clusters K, overriding `clusters` in the config.
    #[arg(long, short = 'k')]
    clusters: Option<usize>,
}

impl Flags {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&Overrides {
            seed: self.seed,
            lambda: self.lambda,
            delta: self.delta,
            eta: self.eta.clone(),
            mode: self.mode,
            output: self.output.clone(),
            data: self.data.clone(),
            clusters: self.clusters,
        });
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<RunStatus, CliError> {
    match cli.command {
        Command::Fit(flags) => run_fit(&flags.load()?),
        Command::Sort(flags) => {
            let cfg = flags.load()?;
            let out = run_sort(&cfg)?;
            println!(
                "chosen action group sizes {:?}, expected loss {:.6}; VI-only group sizes {:?}",
                out.chosen.group_sizes, out.chosen.expected_loss, out.vi_only.group_sizes
            );
            Ok(out.status)
        }
        Command::Simulate(flags) => run_simulate(&flags.load()?),
        Command::Benchmark(flags) => {
            let out = run_benchmark(&flags.load()?)?;
            for s in &out.summary {
                println!(
                    "{:<4} mean accuracy {:.4}  mean VI from truth {:.4}  collapsed {}",
                    s.variant, s.mean_accuracy, s.mean_vi_from_truth, s.collapsed
                );
            }
            Ok(out.status)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => {
            if status == RunStatus::ConvergenceWarning {
                eprintln!("warning: split R-hat reached the convergence threshold; artifacts were still written");
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
