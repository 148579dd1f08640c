//! Command-line front end: threshold bisection, parameter sweeps, and
//! reproduction of the toolkit's reference numbers as CSV/JSON.

mod config;
mod output;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use cvgme::Error;

#[derive(Parser, Debug)]
#[command(
    name = "cvgme",
    version,
    about = "Certification toolkit for multipartite entanglement structure of CV states",
    after_help = "A key=value config file can set defaults (keys: bisect_tol, jobs, \
                  gabriel_n, sdp_max_iterations); it is read from --config or the \
                  GME_ACTIVATE_CONFIG environment variable, and flags override it.\n\
                  Exit codes: 0 success, 2 usage error, 3 numerical failure."
)]
struct Cli {
    /// Path to a key=value config file (overrides GME_ACTIVATE_CONFIG).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for grid scans.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit the three characteristic squeezing thresholds as JSON.
    Thresholds,
    /// Parameter sweeps over the symmetric three-mode family.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Two-copy Gabriel criterion of the FS state over a lambda grid (CSV).
    Gabriel(GabrielArgs),
    /// CM witness scan over the compound pair state (CSV).
    PairScan(PairScanArgs),
    /// Qubit-subspace matrix elements, closed form next to the oracle (CSV).
    Elements(ElementsArgs),
    /// Fully decomposable witness and PPT diagnostics of the projected
    /// three-qubit state (JSON).
    QubitGme(ElementsArgs),
    /// Multi-copy CM biseparability regression for the FS state (JSON).
    MulticopyCheck(MulticopyArgs),
}

#[derive(Subcommand, Debug)]
enum ScanCommand {
    /// Symmetric witness and PPT values per squeezing parameter (CSV).
    Witness(WitnessScanArgs),
}

#[derive(Args, Debug)]
struct WitnessScanArgs {
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = 1.5)]
    r_max: f64,
    #[arg(long, default_value_t = 61)]
    steps: usize,
}

#[derive(Args, Debug)]
struct GabrielArgs {
    /// Grid as start:stop:steps (endpoints inclusive, within (0, 1)).
    #[arg(long, default_value = "0.05:0.95:19")]
    lambda_grid: String,
    /// Fock index n of the two-copy product vectors.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Debug)]
struct PairScanArgs {
    #[arg(long, default_value_t = 0.05)]
    r1_min: f64,
    #[arg(long, default_value_t = 1.23)]
    r1_max: f64,
    #[arg(long, default_value_t = 0.05)]
    r2_min: f64,
    #[arg(long, default_value_t = 1.95)]
    r2_max: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

#[derive(Args, Debug)]
struct ElementsArgs {
    /// Squeezing parameter of the symmetric three-mode state.
    #[arg(long)]
    r: f64,
}

#[derive(Args, Debug)]
struct MulticopyArgs {
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    copies: usize,
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Bracket(_) | Error::Domain(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match Config::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let jobs = cli.jobs.or(config.jobs).unwrap_or(1).max(1);

    let rendered = match &cli.command {
        Command::Thresholds => runs::thresholds(&config),
        Command::Scan(ScanCommand::Witness(a)) => runs::witness_scan(a.r_min, a.r_max, a.steps),
        Command::Gabriel(a) => {
            let n = a.n.or(config.gabriel_n).unwrap_or(1);
            runs::gabriel(&a.lambda_grid, n)
        }
        Command::PairScan(a) => runs::pair_scan(
            (a.r1_min, a.r1_max),
            (a.r2_min, a.r2_max),
            a.steps,
            jobs,
        ),
        Command::Elements(a) => runs::elements(a.r),
        Command::QubitGme(a) => runs::qubit_gme(a.r),
        Command::MulticopyCheck(a) => runs::multicopy_check(a.r, a.copies),
    };

    match rendered {
        Ok(text) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(3);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
