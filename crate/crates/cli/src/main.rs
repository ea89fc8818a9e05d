//! `gridlag`: run scenarios, sweeps, predictor comparisons and the bundled fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridlag::harness::compare::write_compare_csv;
use gridlag::harness::metrics::write_csv_file;
use gridlag::harness::sweep::write_sweep_csv;
use gridlag::harness::{compare, fixtures, run, sweep, ScenarioConfig, SweepParam};
use gridlag::predictor::BallGuard;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "gridlag",
    version,
    about = "Lattice latency-compensation scenario runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Run one scenario, write metrics.csv and print the final-state hash.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the scenario once per value of one parameter.
    Sweep {
        config: PathBuf,
        /// L (latency rate, ms), G (game level) or loss_prob.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Grid predictor against dead reckoning on the same script.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check the bundled fig6, fig10 and fig11 scenarios.
    Fixtures,
}

#[derive(Args)]
struct Common {
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum)]
    ball_guard: Option<Guard>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Guard {
    Strict,
    Inclusive,
}

impl Common {
    fn load(&self, path: &Path) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::from_path(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(g) = self.ball_guard {
            cfg.prediction.ball_guard = match g {
                Guard::Strict => BallGuard::Strict,
                Guard::Inclusive => BallGuard::Inclusive,
            };
        }
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Verb::Run { config, common } => {
            let cfg = common.load(&config)?;
            let out = run(&cfg)?;
            let path = common.out.join("metrics.csv");
            write_csv_file(&path, &out.metrics)?;
            let s = &out.summary;
            println!("ticks            {}", s.ticks);
            println!("predicted ticks  {}", s.predicted_ticks);
            println!("mean pred error  {}", s.mean_pred_error);
            println!("mean interval    {}", s.mean_interval);
            println!("stall fraction   {}", s.stall_fraction);
            println!("metrics          {}", path.display());
            println!("final-state-hash {}", out.final_hash);
        }
        Verb::Sweep {
            config,
            param,
            values,
            common,
        } => {
            let cfg = common.load(&config)?;
            let param: SweepParam = param.parse()?;
            let rows = sweep(&cfg, param, &values)?;
            let path = common.out.join(format!("sweep_{param}.csv"));
            write_sweep_csv(fs::File::create(&path)?, &rows)?;
            println!(
                "{:>14} {:>14} {:>14} {:>8} {:>14}",
                param, "mean_error", "mean_I", "stalls", "ball_disp"
            );
            for r in &rows {
                println!(
                    "{:>14} {:>14.6} {:>14.6e} {:>8.3} {:>14.6e}",
                    r.value, r.mean_pred_error, r.mean_interval, r.stall_fraction, r.mean_ball_disp
                );
            }
            println!("written to {}", path.display());
        }
        Verb::Compare { config, common } => {
            let cfg = common.load(&config)?;
            let rows = compare(&cfg)?;
            let path = common.out.join("compare.csv");
            write_compare_csv(fs::File::create(&path)?, &rows)?;
            println!(
                "{:<12} {:>10} {:>10} {:>12} {:>12}",
                "predictor", "ticks", "entities", "mean_error", "max_error"
            );
            for r in &rows {
                let name = format!("{:?}", r.predictor);
                println!(
                    "{:<12} {:>10} {:>10} {:>12.6} {:>12.6}",
                    name, r.predicted_ticks, r.predicted_entities, r.mean_error, r.max_error
                );
            }
            println!("written to {}", path.display());
        }
        Verb::Fixtures => {
            let mut first_failure = None;
            for name in fixtures::NAMES {
                for c in fixtures::check(name)? {
                    let mark = if c.passed { "ok  " } else { "FAIL" };
                    println!("{mark} {name}: {}", c.name);
                    if !c.passed && first_failure.is_none() {
                        first_failure = Some(format!("{name}: {} ({})", c.name, c.detail));
                    }
                }
            }
            if let Some(f) = first_failure {
                bail!("fixture check failed: {f}");
            }
        }
    }
    Ok(())
}
