use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phasorq_cli::commands::{
    cmd_export_netlist, cmd_grover, cmd_import_netlist, cmd_sweep, cmd_verify_gates, ExportArgs,
    GroverArgs, ImportArgs, SweepArgs, VerifyArgs,
};
use phasorq_cli::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "phasorq",
    version,
    about = "Analog op-amp emulation of quantum gates and Grover search"
)]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a Grover search through the stage networks and write a JSON report.
    Grover(GroverArgs),
    /// Compile gates and compare them against their ideal matrices.
    VerifyGates(VerifyArgs),
    /// Nominal and ideal ASP for iterations 1..=J as CSV.
    Sweep(SweepArgs),
    /// Write a network as a netlist.
    ExportNetlist(ExportArgs),
    /// Read and validate a netlist, optionally re-exporting it canonically.
    ImportNetlist(ImportArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Grover(a) => cmd_grover(&a).map(drop),
        Command::VerifyGates(a) => cmd_verify_gates(&a).map(drop),
        Command::Sweep(a) => cmd_sweep(&a).map(drop),
        Command::ExportNetlist(a) => cmd_export_netlist(&a).map(drop),
        Command::ImportNetlist(a) => cmd_import_netlist(&a).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
