use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phonoblock::optimal::{quadratic_coeffs, scaled_determinant_residual};
use phonoblock::sweep::{resolve_workers, Observable};
use phonoblock::{run_oracle_suite, run_sweep, single_drive_optimal, two_drive_optimal, Branch, Error, MechParams,
    SweepConfig, X22Phase};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser)]
#[command(name = "phonoblock", version, about = "Phonon blockade in coupled Kerr resonators")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write one CSV row per grid point.
    Sweep(SweepArgs),
    /// Run a sweep with a tau axis and write g2(tau) rows.
    G2tau(SweepArgs),
    /// Print closed-form optimal blockade conditions.
    Optimal {
        #[command(subcommand)]
        which: OptimalCommand,
    },
    /// Run the built-in oracle suite.
    Verify,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// TOML sweep configuration.
    config: PathBuf,
    /// Output CSV path.
    #[arg(short, long)]
    output: PathBuf,
    /// Worker threads (overrides PHONOBLOCK_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum OptimalCommand {
    /// Single drive on the first resonator.
    Single {
        #[arg(long, allow_negative_numbers = true)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Drives on both resonators.
    Two {
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
        #[arg(long, allow_negative_numbers = true)]
        j: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// First drive amplitude used for the determinant check.
        #[arg(long, default_value_t = 0.1)]
        omega1: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn run_sweep_command(args: &SweepArgs, require_tau: bool) -> Result<(), Error> {
    let cfg = SweepConfig::from_path(&args.config)?;
    if require_tau && !cfg.wants(Observable::G2Tau) {
        return Err(Error::Config("g2tau needs a tau axis and the g2_tau observable".into()));
    }
    let workers = resolve_workers(args.workers)?;
    let result = run_sweep(&cfg, workers)?;
    let failed = result.records.iter().filter(|r| r.error_code.is_some()).count();
    write_output(&args.output, &args.config, &result)?;
    log::info!(
        "wrote {} rows to {} ({} with error codes)",
        result.records.len(),
        args.output.display(),
        failed
    );
    Ok(())
}

fn write_output(path: &Path, config: &Path, result: &phonoblock::SweepResult) -> Result<(), Error> {
    let comment = format!(
        "phonoblock {} sweep of {} at {}",
        env!("CARGO_PKG_VERSION"),
        config.display(),
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    );
    let out = BufWriter::new(File::create(path)?);
    result.write_csv(out, Some(&comment))
}

fn print_single(j: f64, gamma: f64) -> Result<(), Error> {
    for branch in [Branch::Plus, Branch::Minus] {
        let o = single_drive_optimal(j, gamma, branch)?;
        let a0 = quadratic_coeffs(o.u_opt, j, o.delta_opt, gamma).a0;
        println!(
            "{:<5} delta_opt/gamma = {:.6}  u_opt/gamma = {:.6}  |a0| = {:.3e}",
            format!("{branch:?}").to_lowercase(),
            o.delta_opt / gamma,
            o.u_opt / gamma,
            a0.norm()
        );
    }
    Ok(())
}

fn print_two(u: f64, j: f64, delta: f64, gamma: f64, omega1: f64) -> Result<(), Error> {
    let (plus, minus) = two_drive_optimal(u, j, delta, gamma)?;
    for o in [plus, minus] {
        let p = MechParams {
            delta,
            u,
            j,
            omega1,
            omega2: omega1 * o.zeta,
            phi: o.phi,
            gamma,
            nth: 0.0,
        };
        let printed = scaled_determinant_residual(&p, X22Phase::AsPrinted)?;
        let doubled = scaled_determinant_residual(&p, X22Phase::Doubled)?;
        println!(
            "{:<5} zeta = {:.6}  phi = {:.6} rad = {:.6} pi  det(x22 printed) = {:.3e}  det(x22 doubled) = {:.3e}",
            format!("{:?}", o.branch).to_lowercase(),
            o.zeta,
            o.phi,
            o.phi_over_pi(),
            printed,
            doubled
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match &cli.command {
        Command::Sweep(args) => run_sweep_command(args, false),
        Command::G2tau(args) => run_sweep_command(args, true),
        Command::Optimal { which } => match *which {
            OptimalCommand::Single { j, gamma } => print_single(j, gamma),
            OptimalCommand::Two {
                u,
                j,
                delta,
                gamma,
                omega1,
            } => print_two(u, j, delta, gamma, omega1),
        },
        Command::Verify => {
            let report = run_oracle_suite();
            print!("{report}");
            if !report.passed() {
                return ExitCode::from(EXIT_VERIFICATION);
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
