use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

use srmec_cli::config::{self, Figure, FullConfig};
use srmec_cli::experiment;
use srmec::schemes::SchemeId;

/// Seeded Monte-Carlo experiment driver for the RIS-assisted symbiotic-radio
/// edge-computing simulator.
#[derive(Parser, Debug)]
#[command(name = "simulate", version, about)]
struct Args {
    /// Flat key = value configuration file; omitted means baseline defaults.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Experiment family: fig3|fig4|fig5|fig6|fig7|custom.
    #[arg(long)]
    figure: Option<String>,

    /// Comma-separated scheme list, e.g. proposed,random_phase,without_ris.
    #[arg(long)]
    scheme: Option<String>,

    /// Monte-Carlo trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,

    /// Root seed; every output byte is a function of (config, seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for results.csv, summary.csv and friends.
    #[arg(long)]
    out: Option<PathBuf>,

    /// RIS phase resolution: continuous or b2, b3, ...
    #[arg(long)]
    phase_mode: Option<String>,

    /// Phase subproblem solver: element (closed form) or sdr (benchmark).
    #[arg(long)]
    phase_solver: Option<String>,

    /// Only recompute summary.csv from an existing results directory.
    #[arg(long)]
    summarize_only: Option<PathBuf>,
}

fn build_config(args: &Args) -> Result<FullConfig> {
    let mut full = match &args.config {
        Some(path) => config::load_config(path)?,
        None => FullConfig::defaults(),
    };
    if let Some(fig) = &args.figure {
        full.spec.figure = Figure::parse(fig)?;
    }
    if let Some(schemes) = &args.scheme {
        full.spec.schemes = schemes
            .split(',')
            .map(|s| SchemeId::parse(s.trim()))
            .collect::<srmec::Result<Vec<_>>>()?;
    }
    if let Some(trials) = args.trials {
        full.spec.trials = trials;
    }
    if let Some(seed) = args.seed {
        full.spec.seed = seed;
    }
    if let Some(out) = &args.out {
        full.spec.out_dir = out.clone();
    }
    if let Some(mode) = &args.phase_mode {
        full.system.phase_mode = config::parse_phase_mode(mode)?;
    }
    if let Some(solver) = &args.phase_solver {
        full.ao.phase_solver = config::parse_phase_solver(solver, &full.sdr)?;
    }
    full.validate()?;
    Ok(full)
}

fn main() -> Result<()> {
    let args = Args::parse();
    if let Some(dir) = &args.summarize_only {
        experiment::summarize(dir)?;
        println!("wrote {}", dir.join("summary.csv").display());
        return Ok(());
    }
    let full = build_config(&args).context("assembling configuration")?;
    let out_dir = full.spec.out_dir.clone();
    experiment::run_experiment(&full)?;
    println!(
        "figure {} done: {} trials x {} schemes -> {}",
        full.spec.figure.name(),
        full.spec.trials,
        full.spec.effective_schemes().len(),
        out_dir.display()
    );
    Ok(())
}
