use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levitosim::config::load_config;
use levitosim::scenario::{run_scenario, Scenario};
use levitosim::{check, CliError};

/// Steady-state entanglement scenarios for cavity-levitated
/// nano-ellipsoids: parameter sweeps with deterministic CSV output.
#[derive(Parser)]
#[command(name = "levitosim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario and write its table as CSV.
    Run {
        /// One of: fig2 fig3a fig3b fig4a fig4b figS2 figS3 custom.
        scenario: String,
        /// Configuration file (flat `key = value` format).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for the sweep; defaults to LEVITOSIM_JOBS or
        /// the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Fit the cavity waist to the configured target coupling.
    FitWaist {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the built-in invariant suite.
    Check,
}

fn jobs_from(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("LEVITOSIM_JOBS")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0) // 0 lets the thread pool pick the available parallelism
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            config,
            out,
            jobs,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let cfg = load_config(&config)?;
            let table = run_scenario(scenario, &cfg, jobs_from(jobs))?;
            table.write_csv(&out)?;
            eprintln!(
                "wrote {} rows x {} columns to {}",
                table.rows().len(),
                table.columns().len(),
                out.display()
            );
            Ok(())
        }
        Command::FitWaist { config } => {
            let cfg = load_config(&config)?;
            let cavity = cfg.system.resolve_cavity()?;
            let mode = cfg.system.mode_params()?;
            println!("waist_m = {:.9e}", cavity.waist());
            println!("coupling_hz = {:.9e}", mode.g_cs / std::f64::consts::TAU);
            println!(
                "ratio_g_over_omega = {:.6}",
                mode.g_cs / mode.omega_m
            );
            Ok(())
        }
        Command::Check => {
            let failures = check::run_checks();
            if failures > 0 {
                Err(CliError::Numeric(format!("{failures} check(s) failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
