//! Command-line front end: inference on score CSV files, Monte Carlo
//! experiment cells, and the bootstrap timing comparison.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 numeric or
//! degeneracy failure, 64 usage error.

mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spel::calibrate::{infer_report, InferMethod, Multiplier};
use spel::rng::RngStream;
use spel::simlab::{run_experiment, timing_experiment, Experiment, ExperimentConfig};

/// One failed command: the process exit code and a message for stderr.
pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub(crate) fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 64,
            message: message.into(),
        }
    }

    pub(crate) fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub(crate) fn numeric(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<spel::Error> for Failure {
    fn from(e: spel::Error) -> Self {
        match e {
            spel::Error::InvalidArgument(_) | spel::Error::DimensionMismatch { .. } => {
                Failure::usage(e.to_string())
            }
            spel::Error::DegenerateCovariance(_)
            | spel::Error::GenerationFailed(_)
            | spel::Error::FitFailed(_)
            | spel::Error::Solver(_) => Failure::numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "spel",
    version,
    about = "One-sided lower confidence bounds for the best policy value, \
             with the Monte Carlo and timing experiments behind them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a lower confidence bound from a score CSV file.
    Infer(InferArgs),
    /// Run Monte Carlo experiment cells and write per-method result rows.
    Simulate(SimulateArgs),
    /// Compare the frozen-score bootstrap against refit-per-resample.
    Timing(TimingArgs),
}

#[derive(Args)]
struct InferArgs {
    /// Score file: UTF-8 CSV with header policy_1,...,policy_J and one
    /// observation per row.
    #[arg(long)]
    scores: PathBuf,
    /// One-sided miscoverage level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// auto, chi2, ordinary, corrected, joint, wald, or fs.
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    method: InferMethod,
    /// Bootstrap draws for the calibrated methods.
    #[arg(long, default_value_t = 1000)]
    boot_draws: usize,
    /// gaussian or rademacher.
    #[arg(long, default_value = "gaussian", value_parser = parse_multiplier)]
    multiplier: Multiplier,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// dimension, ties, correlation, or semi.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Experiment,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Number of policies; repeat or comma-separate for several cells.
    #[arg(long, value_delimiter = ',', default_values_t = [20])]
    j: Vec<usize>,
    /// Tie multiplicity (ties/correlation) or near-tied count (semi).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Tied-block correlation; repeat or comma-separate for several cells.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0], allow_negative_numbers = true)]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 300)]
    reps: usize,
    #[arg(long, default_value_t = 500)]
    boot_draws: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value = "gaussian", value_parser = parse_multiplier)]
    multiplier: Multiplier,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; never affects the results, only the wall clock.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct TimingArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    j: usize,
    #[arg(long, default_value_t = 200)]
    boot_draws: usize,
    /// Repeat measurements; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_method(s: &str) -> Result<InferMethod, String> {
    match s {
        "ordinary" => Ok(InferMethod::OrdinaryBoot),
        "corrected" => Ok(InferMethod::CorrectedBoot),
        "joint" => Ok(InferMethod::ProjectedJoint),
        "wald" => Ok(InferMethod::SelectedWald),
        "fs" => Ok(InferMethod::FangSantos),
        other => other.parse().map_err(|e: spel::Error| e.to_string()),
    }
}

fn parse_multiplier(s: &str) -> Result<Multiplier, String> {
    s.parse().map_err(|e: spel::Error| e.to_string())
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    match s {
        "semi" => Ok(Experiment::Semiparametric),
        "timing" => Err("timing runs through the timing subcommand".into()),
        other => other.parse().map_err(|e: spel::Error| e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Infer(args) => cmd_infer(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Timing(args) => cmd_timing(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("spel: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), Failure> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Failure::usage("--alpha must lie strictly between 0 and 1"))
    }
}

fn check_boot_draws(b: usize) -> Result<(), Failure> {
    if b == 0 {
        Err(Failure::usage("--boot-draws must be at least 1"))
    } else {
        Ok(())
    }
}

fn write_output(dir: &std::path::Path, name: &str, content: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Failure::input(format!("cannot create output directory {}: {e}", dir.display()))
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn cmd_infer(args: InferArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    check_boot_draws(args.boot_draws)?;
    let scores = input::read_score_csv(&args.scores)?;
    let stream = RngStream::derive(args.seed, &[0]);
    let report = infer_report(
        &scores,
        args.alpha,
        args.method,
        args.boot_draws,
        args.multiplier,
        &stream,
    )?;
    let doc = output::infer_document(&args, &scores, &report);
    let path = write_output(&args.out, "result.json", &doc)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    check_alpha(args.alpha)?;
    check_boot_draws(args.boot_draws)?;
    if args.j.is_empty() || args.rho.is_empty() {
        return Err(Failure::usage("--j and --rho need at least one value"));
    }
    if args.workers == 0 {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    // Validate every cell before running the first one.
    let mut cells = Vec::new();
    for &num_policies in &args.j {
        for &rho in &args.rho {
            let config = ExperimentConfig {
                experiment: args.experiment,
                n: args.n,
                num_policies,
                tie_multiplicity: args.k,
                rho,
                reps: args.reps,
                boot_draws: args.boot_draws,
                alpha: args.alpha,
                multiplier: args.multiplier,
                master_seed: args.seed,
            };
            config.validate()?;
            cells.push(config);
        }
    }
    let mut rows = Vec::new();
    for config in &cells {
        let result = run_experiment(config, args.workers)?;
        rows.push((config.clone(), result));
    }
    let doc = output::simulate_document(&args, &rows);
    let path = write_output(&args.out, "results.csv", &doc)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_timing(args: TimingArgs) -> Result<(), Failure> {
    check_boot_draws(args.boot_draws)?;
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let mut stream = RngStream::derive(args.seed, &[0]);
    let report = timing_experiment(args.n, args.j, args.boot_draws, args.reps, &mut stream)?;
    let doc = output::timing_document(&args, &report);
    let path = write_output(&args.out, "timing.csv", &doc)?;
    println!("wrote {}", path.display());
    Ok(())
}
