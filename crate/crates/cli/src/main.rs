use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gnl_cli::ablation::{run_ablation, AblationOptions};
use gnl_cli::config::{load_config, Overrides};
use gnl_cli::fixtures::{write_fixtures, FixtureKind, FixtureParams};
use gnl_cli::oracle_cmd::oracle_report;
use gnl_cli::runner::{run_experiment, RunOptions};

#[derive(Parser)]
#[command(name = "gnl", version, about = "Cold-start guess-and-learn benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridArgs {
    /// Experiment config (TOML with dotted keys).
    #[arg(long)]
    config: PathBuf,
    /// Base output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seed list; overrides `seeds`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Reporting cutoff n; overrides `cutoff`.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Run episodes on all cores.
    #[arg(long)]
    parallel: bool,
}

impl GridArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seeds: self.seeds.clone(),
            cutoff: self.cutoff,
            output: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the learner × strategy × seed grid of a config.
    Run(GridArgs),
    /// Mapping expectation, its Monte Carlo estimate and the oracle band.
    Oracle {
        #[arg(long, default_value_t = 10)]
        classes: usize,
        /// Boundary residual range, `low,high`.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [2usize, 4])]
        boundary: Vec<usize>,
        /// Label-noise residual range, `low,high`.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [4usize, 6])]
        noise: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rerun a batch-mode config for several batch sizes.
    Ablation {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated batch sizes, each at least 2.
        #[arg(long = "k", value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        /// Also run each K with the opposite weight-reset policy.
        #[arg(long)]
        toggle_reset: bool,
    },
    /// Write synthetic datasets in the supported file formats.
    Fixtures {
        /// embeddings, margin, idx, agnews or all.
        #[arg(long, default_value = "all")]
        kind: FixtureKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(grid) => {
            let cfg = load_config(&grid.config, &grid.overrides())?;
            let report = run_experiment(
                &cfg,
                RunOptions {
                    parallel: grid.parallel,
                },
            )?;
            println!("{}", report.dir.display());
            for s in &report.summary {
                println!(
                    "{} {} {} n={} E={} ± {}",
                    s.learner, s.strategy, s.track, s.n, s.mean_final_error, s.stderr_final_error
                );
            }
            if report.failures() > 0 {
                eprintln!("{} episode(s) failed; see manifest.json", report.failures());
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            classes,
            boundary,
            noise,
            trials,
            seed,
        } => {
            let report = oracle_report(classes, (boundary[0], boundary[1]), (noise[0], noise[1]), trials, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Ablation { grid, ks, toggle_reset } => {
            let cfg = load_config(&grid.config, &grid.overrides())?;
            let opts = AblationOptions {
                ks,
                toggle_reset,
                run: RunOptions {
                    parallel: grid.parallel,
                },
            };
            let report = run_ablation(&cfg, &opts)?;
            println!("{}", report.dir.display());
            print!("{}", gnl_cli::ablation::comparison_csv(&report.comparison));
            let failed: usize = report.variants.iter().map(|(_, _, r)| r.failures()).sum();
            if failed > 0 {
                eprintln!("{failed} episode(s) failed; see the per-K manifest.json files");
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Fixtures {
            kind,
            out,
            n,
            dim,
            classes,
            separation,
            radius,
            gamma,
            seed,
        } => {
            let params = FixtureParams {
                n,
                dim,
                classes,
                separation,
                radius,
                gamma,
                seed,
            };
            let written = write_fixtures(kind, &out, &params).context("writing fixtures")?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
