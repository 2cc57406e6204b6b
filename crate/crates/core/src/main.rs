use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qcurv::cli;

#[derive(Parser)]
#[command(name = "qcurv", version, about = "Radial prescribed Q-curvature solver")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write solution.csv, report.json and plotdata.csv.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        kernel_cache: Option<PathBuf>,
    },
    /// Run the oracle suite and print a pass/fail table.
    Verify {
        /// Use coarser grids for the spherical checks.
        #[arg(long)]
        fast: bool,
        #[arg(long, hide = true)]
        inject_kernel_fault: bool,
    },
    /// Sweep kappa for a Gaussian curvature profile and write probe.csv.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_BAD_CONFIG } else { cli::EXIT_OK });
        }
    };
    let code = match args.command {
        Command::Solve { config, out, kernel_cache } => {
            cli::cmd_solve(&config, out.as_deref(), kernel_cache.as_deref())
        }
        Command::Verify { fast, inject_kernel_fault } => cli::cmd_verify(fast, inject_kernel_fault),
        Command::Probe { config, out } => cli::cmd_probe(&config, out.as_deref()),
    };
    ExitCode::from(code)
}
