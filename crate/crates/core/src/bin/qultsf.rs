//! Command-line front end: single runs, grids and synthetic data.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qultsf::data::synth;
use qultsf::experiment::{run_experiment, run_grid, ExperimentConfig, GridSpec, ModelSection};
use qultsf::models::ModelKind;

#[derive(Parser)]
#[command(name = "qultsf", version, about = "Hybrid quantum-classical long-term forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Override a config value, e.g. `--set train.learning_rate=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; replaces `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self, seed: Option<u64>) -> qultsf::Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(s) = seed {
            overrides.push(format!("train.seed={s}"));
        }
        if let Some(out) = &self.out {
            overrides.push(format!("output.dir={:?}", out.display().to_string()));
        }
        ExperimentConfig::load(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one model.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Sweep horizons, lookbacks, models and seeds.
    Grid {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "96,192,336,720")]
        horizons: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "336")]
        lookbacks: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "qultsf,linear,nlinear,dlinear")]
        models: Vec<ModelKind>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
    },
    /// Write a seeded synthetic weather-like CSV.
    Synth {
        #[arg(long, default_value_t = 52_696)]
        rows: usize,
        #[arg(long, default_value_t = 21)]
        channels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print a starter config.
    InitConfig {
        /// Dataset path written into the config.
        #[arg(long, default_value = "weather.csv")]
        data: PathBuf,
        #[arg(long, default_value = "qultsf")]
        model: ModelKind,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> qultsf::Result<ExitCode> {
    match cli.command {
        Command::Run { config, seed } => {
            let cfg = config.load(seed)?;
            let res = run_experiment(&cfg)?;
            println!(
                "{} L={} T={} seed={}: mse {:.6} mae {:.6} ({})",
                res.row.model,
                res.row.lookback,
                res.row.horizon,
                res.row.seed,
                res.row.mse,
                res.row.mae,
                res.dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid {
            config,
            horizons,
            lookbacks,
            models,
            seeds,
        } => {
            let cfg = config.load(None)?;
            let grid = GridSpec {
                horizons,
                lookbacks,
                models,
                seeds,
            };
            let report = run_grid(&cfg, &grid)?;
            print!("{}", report.table);
            for (cell, msg) in &report.failures {
                eprintln!("failed: {} L={} T={} seed={}: {msg}", cell.model, cell.lookback, cell.horizon, cell.seed);
            }
            Ok(if report.all_succeeded() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Synth {
            rows,
            channels,
            seed,
            out,
        } => {
            synth::weather_like(rows, channels, seed)?.write_csv(&out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::InitConfig { data, model } => {
            let cfg = ExperimentConfig::new(
                data,
                ModelSection {
                    kind: model.name().into(),
                    ..ModelSection::default()
                },
            );
            print!("{}", cfg.to_toml());
            Ok(ExitCode::SUCCESS)
        }
    }
}
