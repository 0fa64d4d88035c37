//! `reachset`: run reachability benchmarks and bound calculations from TOML
//! experiment files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use reachset::exec::with_threads;
use reachset::experiments::{
    run_bounds_calc, run_nn_verify, run_sensitivity, sidecar_path, write_csv, write_json,
    ExperimentConfig, Overrides,
};
use reachset::Error;

#[derive(Parser)]
#[command(
    name = "reachset",
    version,
    about = "Sampling-based reachability benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Padded-hull accuracy versus guaranteed radius over a (L, alpha) grid.
    Sensitivity {
        #[command(flatten)]
        common: Common,
    },
    /// Closed-loop ReLU system: padded hull versus enclosing ball.
    NnVerify {
        #[command(flatten)]
        common: Common,
        /// Controller weights (JSON); the constructed controller is used if
        /// this cannot be read.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Evaluate covering numbers, failure probabilities and sample counts.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numerical(_) | Error::Infeasible(_) => 3,
        _ => 2,
    }
}

fn load(common: &Common, weights: Option<PathBuf>) -> reachset::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    cfg.apply(&Overrides {
        seed: common.seed,
        trials: common.trials,
        weights,
        output: common.out.clone(),
    })?;
    Ok(cfg)
}

fn require_out(cfg: &ExperimentConfig) -> reachset::Result<PathBuf> {
    cfg.output.clone().ok_or_else(|| {
        Error::Config("no output path: pass --out or set `output` in the config".into())
    })
}

fn sensitivity(common: &Common) -> reachset::Result<()> {
    let cfg = load(common, None)?;
    let out = require_out(&cfg)?;
    let res = with_threads(common.threads, || run_sensitivity(&cfg))?;
    write_csv(&out, &res.rows)?;
    write_csv(&sidecar_path(&out, "summary", "csv"), &res.cells)?;
    write_csv(&sidecar_path(&out, "timing", "csv"), &res.timing)?;
    println!(
        "{:>6} {:>6} {:>7} {:>12} {:>12} {:>10}",
        "L", "alpha", "M", "median d_H", "eps theory", "held"
    );
    for c in &res.cells {
        println!(
            "{:>6} {:>6} {:>7} {:>12.5} {:>12.5} {:>10.3}",
            c.l, c.alpha, c.m, c.d_h_median, c.eps_theoretical, c.guarantee_rate
        );
    }
    report_written(&out);
    Ok(())
}

fn nn_verify(common: &Common, weights: Option<PathBuf>) -> reachset::Result<()> {
    let cfg = load(common, weights)?;
    let out = require_out(&cfg)?;
    let res = with_threads(common.threads, || run_nn_verify(&cfg))?;
    write_csv(&out, &res.records)?;
    write_csv(&sidecar_path(&out, "summary", "csv"), &res.summary)?;
    write_csv(&sidecar_path(&out, "timing", "csv"), &res.timing)?;
    write_json(&sidecar_path(&out, "bounds", "json"), &res.bounds)?;
    println!(
        "{:>7} {:>9} {:>7} {:>12} {:>12}",
        "horizon", "estimator", "M", "mean d_H", "median d_H"
    );
    for s in &res.summary {
        println!(
            "{:>7} {:>9} {:>7} {:>12.6} {:>12.6}",
            s.horizon,
            s.estimator.to_string(),
            s.m,
            s.d_h_mean,
            s.d_h_median
        );
    }
    if let Some(m_min) = res.bounds.bound.as_ref().and_then(|b| b.m_min) {
        println!("boundary samples for the configured guarantee: {m_min}");
    }
    report_written(&out);
    Ok(())
}

fn bounds(common: &Common) -> reachset::Result<()> {
    let cfg = load(common, None)?;
    let report = run_bounds_calc(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(out) = &cfg.output {
        write_json(out, &report)?;
        report_written(out);
    }
    Ok(())
}

fn report_written(out: &Path) {
    log::info!("wrote {}", out.display());
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sensitivity { common } => sensitivity(common),
        Command::NnVerify { common, weights } => nn_verify(common, weights.clone()),
        Command::Bounds { common } => bounds(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
