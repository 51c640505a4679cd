//! `qslt` — sweeps, self-checks, and single-point evaluations of the
//! quantum-speed-limit ratio for a two-emitter pair in Lorentzian baths.
//!
//! Exit codes: 0 success; 1 usage or configuration error; 2 self-check
//! tolerance failure; 3 more than 1% of grid cells failed (outputs are
//! still written) or a point evaluation failed.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use qslt_cli::config::{self, GridArgs, PointArgs};
use qslt_cli::{emit, report};
use qslt_core::sweep::{evaluate_cell, run_sweep, verify};

#[derive(Parser)]
#[command(
    name = "qslt",
    version,
    about = "Quantum-speed-limit sweeps for a two-emitter pair in Lorentzian baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a (gamma0, J) grid and write CSV, plot script, manifest.
    Sweep(GridArgs),
    /// Cross-check the closed forms against the reference integrators.
    Verify(GridArgs),
    /// Evaluate one parameter point and print the result as JSON.
    Point(PointArgs),
}

/// Fraction of failed cells beyond which a sweep exits nonzero.
const FAILURE_EXIT_FRACTION: f64 = 0.01;

fn install_pool(threads: usize) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Sweep(args) => {
            let rc = config::resolve_grid(&args)?;
            install_pool(rc.threads)?;
            let start = Instant::now();
            let grid = run_sweep(&rc.spec)?;
            let elapsed = start.elapsed();
            let paths = emit::emit_outputs(&rc.spec, &grid, &rc.out, elapsed, rc.threads)?;
            println!(
                "{} cells ({} failed) in {:.2}s -> {}",
                grid.cells.len(),
                grid.failed,
                elapsed.as_secs_f64(),
                paths.csv.display()
            );
            if grid.failed_fraction() > FAILURE_EXIT_FRACTION {
                eprintln!(
                    "error: {:.2}% of cells failed (see the flags column)",
                    100.0 * grid.failed_fraction()
                );
                return Ok(3);
            }
            Ok(0)
        }
        Command::Verify(args) => {
            let rc = config::resolve_grid(&args)?;
            install_pool(rc.threads)?;
            let report_data = verify(&rc.spec)?;
            print!("{}", report::render(&report_data));
            if report_data.passed() {
                Ok(0)
            } else {
                Ok(2)
            }
        }
        Command::Point(args) => {
            let (spec, gamma0, hopping, threads) = config::resolve_point(&args)?;
            install_pool(threads)?;
            let record = evaluate_cell(&spec, gamma0, hopping);
            let failed = record.failure.is_some();
            println!(
                "{}",
                serde_json::to_string_pretty(&emit::point_json(&spec, &record))?
            );
            if failed {
                Ok(3)
            } else {
                Ok(0)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests surface as clap "errors" but are
            // successful outcomes; everything else is a usage error.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
