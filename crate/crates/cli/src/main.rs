use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use smb_lab::{commands, compare, report::ReportEnvelope, run_config, CliError, RunOverrides};

#[derive(Parser)]
#[command(
    name = "smb-lab",
    version,
    about = "Information-rate experiments on stationary Markov and Bernoulli shifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config and write <experiment>.csv/.json.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Validate a process spec and print its normalized form.
    Validate { spec: PathBuf },
    /// Compare two JSON reports column by column.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("SMB_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("SMB_LAB_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

// A closed stdout (e.g. piped into `head`) is not an error worth a panic.
fn emit<T: serde::Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("report types serialize");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    init_threads()?;
    match cli.command {
        Cmd::Run {
            config,
            seed,
            output_dir,
        } => {
            let (envelope, _) = run_config(&config, &RunOverrides { seed, output_dir })?;
            emit(&envelope.summary);
            Ok(envelope.passed())
        }
        Cmd::Validate { spec } => {
            let info = commands::describe_spec(&spec)?;
            emit(&info);
            Ok(true)
        }
        Cmd::Compare { a, b, tolerance } => {
            let c = compare::compare(&ReportEnvelope::load(&a)?, &ReportEnvelope::load(&b)?, tolerance)?;
            emit(&c);
            Ok(c.within_tolerance)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("smb-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
