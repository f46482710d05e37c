//! Command-line front end for `sectorkit`: spec files, commands, reports.

pub mod commands;
pub mod report;
pub mod spec;
mod suites;

pub use commands::{run_command, Command, Flags};
pub use report::{parse_machine, render_report, Format, Report};
pub use spec::{parse_spec, parse_spec_file, ProblemSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{file}: schema error at `{path}`: {message}")]
    Schema { file: String, path: String, message: String },
    #[error("{context}: {error}")]
    Core { context: String, error: sectorkit::Error },
    #[error("{0}")]
    Arity(String),
}

impl CliError {
    /// 2 for input errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { error: sectorkit::Error::Numerical(_), .. } => 3,
            _ => 2,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
