use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tvp_cli::{cmd_check, cmd_lifting, cmd_oracle, cmd_run, cmd_sweep, parse_lambdas};

#[derive(Parser)]
#[command(name = "tvp", version, about = "Thermo-visco-plastic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write diagnostics and field snapshots
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a scenario for several regularization parameters
    Sweep {
        scenario: PathBuf,
        /// Comma-separated list, e.g. 1e-1,1e-2,1e-3
        #[arg(long, default_value = "1e-1,1e-2,1e-3")]
        lambdas: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a scenario and apply every invariant check
    Check { scenario: PathBuf },
    /// Integrate the material-point reference problem
    Oracle {
        params: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Write the lifting of the heat-flux data
    Lifting {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, output } => cmd_run(scenario, output),
        Command::Sweep {
            scenario,
            lambdas,
            output,
        } => match parse_lambdas(lambdas) {
            Ok(l) => cmd_sweep(scenario, &l, output),
            Err(e) => Err(anyhow::anyhow!("--lambdas: {e}")),
        },
        Command::Check { scenario } => cmd_check(scenario),
        Command::Oracle { params, output } => cmd_oracle(params, output),
        Command::Lifting { scenario, output } => cmd_lifting(scenario, output),
    };
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
