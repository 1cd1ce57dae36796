use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::error::ErrorKind;
use clap::Parser;
use toeplitz_trace_lab::commands::{error_json, write_error, write_metadata};
use toeplitz_trace_lab::{dispatch, load_config, CliError, Command};

/// Thread count for the numeric kernels; nothing else is read from the
/// environment.
const THREADS_VAR: &str = "TOEPLITZ_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "toeplitz-trace-lab",
    version,
    about = "Traces of Toeplitz products with singular symbols"
)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(args: &Args) -> Result<i32, CliError> {
    init_threads()?;
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.apply_seed(seed);
    }
    let outcome = dispatch(&cfg, args.command, &args.out)?;
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    write_metadata(&args.out, args.command, &args.config, cfg.seed, now)?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string().trim_end().to_string());
            eprint!("{}", error_json(&err));
            return ExitCode::from(2);
        }
    };
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprint!("{}", write_error(&args.out, &e));
            ExitCode::from(2)
        }
    }
}
