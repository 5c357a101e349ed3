//! Command-line experiment runner for the edge-security learning games.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mecrl_harness::compare::{compare, render_comparison};
use mecrl_harness::config::{load_config, print_default_config, ExperimentConfig, Scenario};
use mecrl_harness::experiment::run_experiment;
use mecrl_harness::metrics::render_summary;
use mecrl_harness::oracle_check::{oracle_check, render_oracle_check};
use mecrl_harness::pretrain::pretrain;
use mecrl_harness::HarnessError;

#[derive(Parser)]
#[command(
    name = "mecrl",
    about = "Seeded simulations of anti-jamming offloading and PHY-layer \
             authentication games with reinforcement-learning defenders",
    version
)]
struct Cli {
    /// Override base_seed from the config file(s).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory from the config file(s).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress report output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its metrics CSV and summary.
    Run { config: PathBuf },
    /// Run several configs on aligned seeds and check they are listed
    /// best-first; exit code 1 when an ordering fails.
    Compare {
        #[arg(num_args = 2.., required = true)]
        configs: Vec<PathBuf>,
    },
    /// Grade a tabular agent against value iteration on a frozen scenario.
    OracleCheck { config: PathBuf },
    /// Train DQN weights across perturbed scenarios for later warm starts.
    Pretrain {
        config: PathBuf,
        /// Weights file to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print every config key with its default value for a scenario.
    PrintDefaultConfig {
        /// offload | auth
        scenario: String,
    },
}

fn apply_overrides(cfg: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
}

fn run(cli: &Cli) -> Result<ExitCode, HarnessError> {
    match &cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(config)?;
            apply_overrides(&mut cfg, cli);
            let result = run_experiment(&cfg)?;
            if !cli.quiet {
                print!("{}", render_summary(&result.summary));
                if let Some(path) = &result.csv_path {
                    println!("metrics: {}", path.display());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { configs } => {
            let mut cfgs = Vec::with_capacity(configs.len());
            for path in configs {
                let mut cfg = load_config(path)?;
                apply_overrides(&mut cfg, cli);
                cfgs.push(cfg);
            }
            let report = compare(&cfgs)?;
            if !cli.quiet {
                print!("{}", render_comparison(&report));
            }
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::OracleCheck { config } => {
            let mut cfg = load_config(config)?;
            apply_overrides(&mut cfg, cli);
            let report = oracle_check(&cfg)?;
            if !cli.quiet {
                print!("{}", render_oracle_check(&report));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Pretrain { config, output } => {
            let mut cfg = load_config(config)?;
            apply_overrides(&mut cfg, cli);
            let report = pretrain(&cfg, output)?;
            if !cli.quiet {
                println!(
                    "pretrained over {} scenarios x {} slots ({} workers); weights: {}",
                    report.scenarios,
                    report.slots_per_scenario,
                    report.workers,
                    report.weights_path.display()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::PrintDefaultConfig { scenario } => {
            let scenario = match scenario.as_str() {
                "offload" => Scenario::Offload,
                "auth" => Scenario::Auth,
                other => {
                    return Err(HarnessError::Usage(format!(
                        "unknown scenario `{other}` (offload | auth)"
                    )))
                }
            };
            print!("{}", print_default_config(scenario));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
