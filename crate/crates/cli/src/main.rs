mod args;
mod error;
mod model;
mod protocol;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phire_core::gates::{builtin_gate_text, BUILTIN_IDS};

use crate::args::resolve_gate;
use crate::error::{CliError, Result};

/// SumCheck prover/verifier for custom gates, with an accelerator performance model.
///
/// Exit codes: 0 ok, 1 I/O error, 2 proof rejected, 3 malformed input, 4 infeasible config.
#[derive(Debug, Parser)]
#[command(name = "phire", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the built-in gates, or print one definition.
    Gates {
        #[arg(long)]
        show: Option<String>,
    },
    /// Write a synthetic witness as table files.
    Witness(protocol::WitnessCmd),
    Prove(protocol::ProveCmd),
    Verify(protocol::VerifyCmd),
    /// Wiring instances and PermCheck proofs.
    #[command(subcommand)]
    Perm(protocol::PermCmd),
    /// Functional op counts and modeled runtime per gate, as CSV.
    Bench(model::BenchCmd),
    /// Per-round model report for one gate, as CSV.
    Model(model::ModelCmd),
    /// Model the degree-sweep gate over a range of degrees, as CSV.
    SweepDegree(model::SweepCmd),
    /// Build and print the step schedule for a gate.
    Schedule(model::ScheduleCmd),
    /// Design-space exploration over the calibration grid.
    Dse(model::DseCmd),
    /// Model the PermCheck fraction generator.
    Permgen(model::PermGenCmd),
}

fn gates(show: &Option<String>) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match show {
        Some(s) => {
            let g = resolve_gate(s)?;
            match g.id {
                Some(id) => write!(out, "{}", builtin_gate_text(id)?)?,
                None => writeln!(out, "{}", g.poly)?,
            }
        }
        None => {
            writeln!(
                out,
                "{:<10} {:<32} {:>6} {:>6} {:>6}",
                "id", "name", "degree", "terms", "mles"
            )?;
            for id in BUILTIN_IDS {
                let g = resolve_gate(&id.to_string())?.poly;
                writeln!(
                    out,
                    "{:<10} {:<32} {:>6} {:>6} {:>6}",
                    id.to_string(),
                    g.name,
                    g.degree(),
                    g.terms.len(),
                    g.distinct_mles()
                )?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Gates { show } => gates(show),
        Command::Witness(c) => protocol::witness(c),
        Command::Prove(c) => protocol::prove(c),
        Command::Verify(c) => protocol::verify(c),
        Command::Perm(c) => protocol::perm(c),
        Command::Bench(c) => model::bench(c),
        Command::Model(c) => model::model(c),
        Command::SweepDegree(c) => model::sweep_degree(c),
        Command::Schedule(c) => model::schedule(c),
        Command::Dse(c) => model::run_dse(c),
        Command::Permgen(c) => model::permgen(c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::OutputClosed) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
