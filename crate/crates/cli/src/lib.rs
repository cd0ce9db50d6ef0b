//! Problem-file driver: parse, validate against the core library, run one task, emit JSON.

pub mod problem;
mod run;

use thiserror::Error;

pub use problem::{parse_problem, ComputeSpec, CrystalSpec, ProblemFile, SideSpec, Task};
pub use run::{run, validate, Overrides, Problem, SCHEMA};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("[{section}]: {message}")]
    Semantic { section: String, message: String },
    #[error("{0}")]
    Io(String),
    /// A computation declined to proceed, such as a transition without a quasi-nilpotence certificate.
    #[error("{module}: refused: {message}")]
    Refusal { module: &'static str, message: String },
    #[error("{module}: {message}")]
    Input { module: &'static str, message: String },
    #[error("{module}: internal invariant violated: {message}")]
    Internal { module: &'static str, message: String },
}

impl CliError {
    /// 1 input error, 2 computation refusal, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Syntax { .. } | CliError::Semantic { .. } | CliError::Io(_) | CliError::Input { .. } => 1,
            CliError::Refusal { .. } => 2,
            CliError::Internal { .. } => 3,
        }
    }
}
