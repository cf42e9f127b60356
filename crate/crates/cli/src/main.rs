use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use excursions::config::RunConfig;
use excursions::exec::RayonExecutor;
use excursions::experiments::{self, RunError};
use excursions::io;
use excursions::plot::emit_plots;

/// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 bad input.
#[derive(Parser)]
#[command(name = "excursions", version, about = "Excursion-theory experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Master seed; overrides `EXCURSION_SEED` and the config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long, short)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact invariant checks on default settings.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// J1 distance between two path CSV files.
    J1 {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        horizon: f64,
    },
    /// Re-draw plots from a report CSV.
    Plot {
        report: PathBuf,
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

fn env_seed() -> Result<Option<u64>, RunError> {
    match std::env::var("EXCURSION_SEED") {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            RunError::Config(excursions::config::ConfigError::Invalid {
                key: "EXCURSION_SEED".into(),
                reason: format!("`{s}` is not an unsigned integer"),
            })
        }),
        Err(_) => Ok(None),
    }
}

fn run_config(mut cfg: RunConfig, common: &Common) -> Result<bool, RunError> {
    if let Some(s) = common.seed.or(env_seed()?) {
        cfg.seed = s;
    }
    let exec = RayonExecutor::new(common.threads.or(cfg.threads))?;
    let outcome = experiments::run(&cfg, &common.out, &exec)?;
    for r in outcome
        .report
        .rows
        .iter()
        .filter(|r| r.verdict != excursions_core::homogenization::Verdict::Info)
    {
        let n = r.n.map_or("*".to_string(), |n| n.to_string());
        println!(
            "{} n={n} {} {} value={} band={}",
            r.verdict.as_str(),
            r.functional,
            r.statistic,
            r.value,
            r.null_band
        );
    }
    println!("wrote {}", common.out.display());
    Ok(outcome.passed())
}

fn dispatch(cli: Cli) -> Result<bool, RunError> {
    match cli.command {
        Command::Run { config, common } => run_config(RunConfig::load(&config)?, &common),
        Command::Verify { config, common } => {
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::verify_defaults(),
            };
            run_config(cfg, &common)
        }
        Command::J1 { a, b, horizon } => {
            let pa = io::read_path(&a)?;
            let pb = io::read_path(&b)?;
            let r = excursions_core::j1::j1_distance(&pa, &pb, horizon)?;
            println!("distance={}", r.distance);
            Ok(true)
        }
        Command::Plot { report, out } => {
            let r = io::report_from_csv(&std::fs::read_to_string(&report)?)?;
            for f in emit_plots(&r, &out)? {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
