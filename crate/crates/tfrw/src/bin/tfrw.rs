use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tfrw::scenario::Scenario;
use tfrw::TfrwError;

/// Toy-cosmology workbench: back-action kernels, posterior pipelines, and
/// the cavity-mirror analogue, driven by scenario JSON files.
#[derive(Parser)]
#[command(name = "tfrw", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the back-action kernel q(r) and locate its peak.
    Kernel(RunArgs),
    /// Run the k-photon posterior update on the configured prior.
    Measure(RunArgs),
    /// Integrate the cavity-mirror trajectory.
    Optomech(RunArgs),
    /// Constant-Hubble conformal mirror trajectory.
    Hubble(RunArgs),
    /// Photon back-action on the mirror wavefunction.
    MirrorMeasure(RunArgs),
    /// Check every invariant of a scenario file without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

/// 2 for configuration/parse problems, 3 for numerical failures.
fn exit_code(err: &TfrwError) -> u8 {
    match err {
        TfrwError::InvalidArgument(_)
        | TfrwError::Configuration(_)
        | TfrwError::InvalidRange(_)
        | TfrwError::GridMismatch => 2,
        TfrwError::QuadratureFailure { .. }
        | TfrwError::DegenerateState
        | TfrwError::NonUnimodal { .. }
        | TfrwError::SupportTruncation { .. }
        | TfrwError::NoDetection
        | TfrwError::Collapse { .. }
        | TfrwError::Singularity => 3,
    }
}

fn run(args: &RunArgs, f: impl Fn(&Scenario, &std::path::Path) -> tfrw::error::Result<()>) -> ExitCode {
    let scenario = match Scenario::load(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match f(&scenario, &args.out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Kernel(a) => run(a, Scenario::run_kernel),
        Command::Measure(a) => run(a, Scenario::run_measure),
        Command::Optomech(a) => run(a, Scenario::run_optomech),
        Command::Hubble(a) => run(a, Scenario::run_hubble),
        Command::MirrorMeasure(a) => run(a, Scenario::run_mirror_measure),
        Command::Validate { scenario } => match Scenario::load(scenario) {
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
            Ok(s) => {
                let report = s.violations();
                if report.is_empty() {
                    println!("ok");
                    ExitCode::SUCCESS
                } else {
                    for v in &report {
                        println!("violation: {v}");
                    }
                    ExitCode::from(1)
                }
            }
        },
    }
}
