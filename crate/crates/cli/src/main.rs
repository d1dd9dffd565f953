//! Batch front-end: every pipeline is a subcommand driven by a flat
//! key=value config, producing deterministic CSV artifacts stamped with the
//! config hash. `fixtures` runs the brute-force oracles and writes golden
//! files for cross-checking.

mod commands;
mod config;

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "tubesolve", version, about = "Positive solutions of Δu + u^p = 0 in tubes: ground states, resonance analysis, iterative construction, Pohozaev certificates")]
struct Cli {
    /// flat key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory for CSV artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// rng seed for the random-test-field diagnostics
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// override a config key (repeatable): --override key=value
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// solve the radial ground state U on the unit n-ball
    GroundState,
    /// fiber mode spectrum and base manifold spectrum
    Spectrum,
    /// resonances, admissible intervals, gap/defect/index sweep
    Resonance,
    /// model Morse index across an ε-sweep with the fitted exponent
    MorseSweep,
    /// full construction: iteration scheme + Picard fixed point
    Construct,
    /// eigenvalue ε-derivative checks (model and assembled operator)
    Kato,
    /// integrated Pohozaev identity / nonexistence certificate
    Pohozaev,
    /// run the brute-force oracles and write golden fixture files
    Fixtures,
    /// every pipeline in sequence
    All,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => config::RunConfig::from_file(path)?,
        None => config::RunConfig::default(),
    };
    for spec in &cli.overrides {
        cfg.apply_override(spec)?;
    }
    if let Some(seed) = cli.seed {
        cfg.apply_override(&format!("seed={seed}"))?;
    }
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::GroundState => commands::ground_state(&mut cfg, &cli.out),
        Command::Spectrum => commands::spectrum(&mut cfg, &cli.out),
        Command::Resonance => commands::resonance(&mut cfg, &cli.out),
        Command::MorseSweep => commands::morse_sweep(&mut cfg, &cli.out),
        Command::Construct => commands::construct(&mut cfg, &cli.out),
        Command::Kato => commands::kato(&mut cfg, &cli.out),
        Command::Pohozaev => commands::pohozaev(&mut cfg, &cli.out),
        Command::Fixtures => commands::fixtures(&mut cfg, &cli.out),
        Command::All => {
            commands::ground_state(&mut cfg.clone(), &cli.out)?;
            commands::spectrum(&mut cfg.clone(), &cli.out)?;
            commands::resonance(&mut cfg.clone(), &cli.out)?;
            commands::morse_sweep(&mut cfg.clone(), &cli.out)?;
            commands::construct(&mut cfg.clone(), &cli.out)?;
            commands::kato(&mut cfg.clone(), &cli.out)?;
            commands::pohozaev(&mut cfg.clone(), &cli.out)?;
            commands::fixtures(&mut cfg.clone(), &cli.out)
        }
    }
}
