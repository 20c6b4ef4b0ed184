use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use libor_lab::{
    run_calibrate_mfm, run_compare, run_price, run_verify, ExperimentConfig, LabError, Outcome,
    Overrides,
};

#[derive(Parser)]
#[command(name = "libor-lab", version, about = "LIBOR model experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Implied-vol differences of the approximate LMM drifts against the exact drift.
    Compare(Common),
    /// Positivity, martingale and analytic-tractability checks per model.
    Verify(Common),
    /// Caplet prices and implied vols for every configured model.
    Price(Common),
    /// Backward calibration of the Markov-functional model.
    CalibrateMfm(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    quad_order: Option<usize>,
}

fn load(c: &Common) -> Result<ExperimentConfig, LabError> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    cfg.apply(&Overrides {
        seed: c.seed,
        paths: c.paths,
        out_dir: c.out_dir.clone(),
        quad_order: c.quad_order,
    });
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome, LabError> {
    match cli.command {
        Command::Compare(c) => run_compare(&load(&c)?),
        Command::Verify(c) => run_verify(&load(&c)?),
        Command::Price(c) => run_price(&load(&c)?),
        Command::CalibrateMfm(c) => run_calibrate_mfm(&load(&c)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.report);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
