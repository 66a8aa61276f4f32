use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use threshold_cli::{execute, init_workers, ExperimentKind};

#[derive(Parser)]
#[command(name = "threshold-lab", version, about = "Threshold bound states: solver, kernels, envelopes and sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment config.
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bound state at the configured coupling.
    Solve(RunArgs),
    /// Couplings approaching threshold from above: energies, P_R, falloff.
    Sweep(RunArgs),
    /// Kernel profiles of H0 + tail + k² and their residuals.
    Greens(RunArgs),
    /// Dominating envelope of the threshold state.
    Envelope(RunArgs),
    /// Sweep plus absorbed/spreading verdict.
    Classify(RunArgs),
    /// Domination, sandwich and power-law checks for an inverse-square tail.
    VerifyBounds(RunArgs),
    /// Scaled observables along an energy schedule.
    Theorem1(RunArgs),
    /// Lower bound on the resolvent norm as k → 0.
    Theorem4(RunArgs),
    /// Whatever `kind` the config names.
    Run(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Solve(a) => (Some(ExperimentKind::Solve), a),
        Command::Sweep(a) => (Some(ExperimentKind::Sweep), a),
        Command::Greens(a) => (Some(ExperimentKind::Greens), a),
        Command::Envelope(a) => (Some(ExperimentKind::Envelope), a),
        Command::Classify(a) => (Some(ExperimentKind::Classify), a),
        Command::VerifyBounds(a) => (Some(ExperimentKind::VerifyBounds), a),
        Command::Theorem1(a) => (Some(ExperimentKind::Theorem1), a),
        Command::Theorem4(a) => (Some(ExperimentKind::Theorem4), a),
        Command::Run(a) => (None, a),
    };
    let result = init_workers().and_then(|_| execute(&args.config, kind, args.out.as_deref()));
    match result {
        Ok((dir, manifest)) => {
            println!("{}", dir.display());
            if let Some(w) = manifest["warnings"].as_array() {
                for w in w {
                    eprintln!("warning: {}", w.as_str().unwrap_or_default());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
