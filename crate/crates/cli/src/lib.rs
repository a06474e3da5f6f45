//! Experiment harness for the `heavytail` library: spec-file parsing,
//! deterministic experiment runs with CSV/manifest outputs, complexity
//! tables, moment reports, and the `verify` release gate.

pub mod config;
pub mod csvio;
pub mod moments;
pub mod runner;
pub mod scenario;
pub mod table;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Spec-file or precondition validation failed; every violated assumption
    /// is listed. Maps to exit code 2.
    #[error("validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// A chain diverged under the abort policy. Maps to exit code 3.
    #[error("chain {chain} diverged at iteration {iteration}")]
    Diverged { chain: usize, iteration: u64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] heavytail::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 2,
            HarnessError::Diverged { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}
