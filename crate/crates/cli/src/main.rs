use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use sectorkit_cli::{parse_spec_file, render_report, run_command, CliError, Command, Flags, Format, EXIT_INVARIANT, EXIT_OK};

/// Sector structure, measurement, modular data and symmetry breaking for
/// finite-dimensional operator algebras.
#[derive(Parser, Debug)]
#[command(name = "sectorkit", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Spec files (JSON).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Numerical tolerance; a spec's `metadata.tolerance` takes precedence.
    #[arg(long, default_value_t = sectorkit::DEFAULT_TOL)]
    tol: f64,
    /// Number of sampled outcomes for `measure`.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// Seed for sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

fn run(args: &Args) -> Result<i32, CliError> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::Arity("--tol must be positive".into()));
    }
    let specs = args.files.iter().map(|p| parse_spec_file(p, args.tol)).collect::<Result<Vec<_>, _>>()?;
    let flags = Flags { tol: args.tol, samples: args.samples, seed: args.seed };
    let report = run_command(args.command, &specs, &flags)?;
    let text = render_report(&report, args.format);
    std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
    if report.all_passed() {
        Ok(EXIT_OK)
    } else {
        log::warn!("{} of {} checks failed", report.failures(), report.verdicts.len());
        Ok(EXIT_INVARIANT)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
