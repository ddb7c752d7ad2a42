use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mimo_lab::analytic::{antennas_for_3db, antennas_for_3db_unrounded};
use mimo_lab::cli::{csv_string, parse_config, run_sweep, write_csv_atomic, SweepSpec};
use mimo_lab::impairments::ImpairmentConfig;
use mimo_lab::precoding::Precoder;
use mimo_lab::validate;

#[derive(Parser)]
#[command(name = "mimo-lab", version, about = "Multi-user MIMO downlink precoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single scenario from a config file.
    Run {
        /// Path to a `key = value` config file.
        config: PathBuf,
        /// Write CSV here instead of stdout (atomic replace).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a swept scenario from a config file.
    Sweep {
        /// Path to a `key = value` config file with `sweep` and `values`.
        config: PathBuf,
        /// Write CSV here instead of stdout (atomic replace).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Antenna count needed to sit 3 dB below the interference-free bound.
    Rot {
        /// Precoder: mf, zf (alias for zf_exact), zf_exact, zf_scaled.
        #[arg(long)]
        precoder: String,
        /// Number of users.
        #[arg(long)]
        users: usize,
        /// Transmit SNR, dB.
        #[arg(long)]
        snr_t_db: f64,
        /// Gain error spread, dB.
        #[arg(long, default_value_t = 0.0)]
        sigma_a_db: f64,
        /// Phase error spread, degrees.
        #[arg(long, default_value_t = 0.0)]
        sigma_phi_deg: f64,
    },
    /// Statistical self-checks of the sampling machinery.
    Validate {
        #[arg(long, default_value_t = validate::DEFAULT_SEED)]
        seed: u64,
    },
}

/// Optional cap on the worker pool; results do not depend on it.
fn configure_threads() -> Result<(), String> {
    match std::env::var("MIMO_LAB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| format!("MIMO_LAB_THREADS must be a positive integer, got `{raw}`"))?;
            if n == 0 {
                return Err("MIMO_LAB_THREADS must be a positive integer, got `0`".into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("could not configure {n} worker threads: {e}"))
        }
    }
}

fn load_spec(path: &PathBuf) -> Result<SweepSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_scenarios(spec: &SweepSpec, out: Option<&PathBuf>) -> Result<ExitCode, String> {
    let outcome = run_sweep(spec).map_err(|e| e.to_string())?;
    for note in &outcome.notes {
        eprintln!("note: {note}");
    }
    let csv = csv_string(&outcome.rows);
    match out {
        Some(path) => {
            write_csv_atomic(path, &csv)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        None => print!("{csv}"),
    }
    if outcome.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for failure in &outcome.failures {
            eprintln!("failed: {failure}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn parse_rot_precoder(s: &str) -> Result<Precoder, String> {
    match s {
        "mf" => Ok(Precoder::Mf),
        // Both zero-forcing variants follow the same rule.
        "zf" | "zf_exact" => Ok(Precoder::ZfExact),
        "zf_scaled" => Ok(Precoder::ZfScaled),
        other => Err(format!(
            "unknown precoder `{other}` (expected mf|zf|zf_exact|zf_scaled)"
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::Run { config, out } => load_spec(config).and_then(|spec| {
            if spec.axis.is_some() {
                return Err(format!(
                    "{} defines a sweep; use the `sweep` subcommand",
                    config.display()
                ));
            }
            run_scenarios(&spec, out.as_ref())
        }),
        Command::Sweep { config, out } => load_spec(config).and_then(|spec| {
            if spec.axis.is_none() {
                return Err(format!(
                    "{} has no `sweep` axis; use the `run` subcommand",
                    config.display()
                ));
            }
            run_scenarios(&spec, out.as_ref())
        }),
        Command::Rot {
            precoder,
            users,
            snr_t_db,
            sigma_a_db,
            sigma_phi_deg,
        } => (|| {
            let precoder = parse_rot_precoder(precoder)?;
            let cfg = ImpairmentConfig::from_db(*sigma_a_db, *sigma_phi_deg)
                .map_err(|e| e.to_string())?;
            let count =
                antennas_for_3db(precoder, *users, *snr_t_db, &cfg).map_err(|e| e.to_string())?;
            let unrounded = antennas_for_3db_unrounded(precoder, *users, *snr_t_db, &cfg)
                .map_err(|e| e.to_string())?;
            println!("M = {count}  (unrounded {unrounded:.4})");
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Validate { seed } => {
            let checks = validate::run_checks(*seed);
            let mut all_ok = true;
            for check in &checks {
                let verdict = if check.passed() { "ok  " } else { "FAIL" };
                all_ok &= check.passed();
                println!(
                    "{verdict} {:<38} value {:.6}  expected {:.6}  (tol {:.2e})",
                    check.name, check.value, check.expected, check.tolerance
                );
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
