use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srotor::runner::{exit_code, run_hj_suite, run_scenario, RunOptions};

/// Spacecraft-rotor reduced dynamics and Hamilton-Jacobi checks.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Directory for trajectory and report files.
    #[arg(long, global = true, env = "SROTOR_OUTPUT_DIR", default_value = ".")]
    output_dir: PathBuf,

    /// Record every k-th step (overrides the config).
    #[arg(long, global = true)]
    stride: Option<usize>,

    /// Seed for random-point batteries.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Suppress the summary line.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and audit conserved quantities.
    Simulate { config: PathBuf },
    /// Run the Hamilton-Jacobi residual batteries.
    HjSuite { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        output_dir: cli.output_dir,
        stride: cli.stride,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Simulate { config } => run_scenario(config, &opts),
        Command::HjSuite { config } => run_hj_suite(config, &opts),
    };
    let code = exit_code(&result);
    match &result {
        Ok(o) if !cli.quiet => {
            let status = if o.passed { "pass" } else { "FAIL" };
            println!("{status}: report written to {}", o.report_path.display());
        }
        Ok(_) => {}
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
