//! Configuration, orchestration and file output for `conswave-core`.
//!
//! [`run`] reads a [`RunConfig`], solves the lattice once while streaming its
//! rows through every diagnostic, and writes the artifacts of the run into
//! its output directory. [`emit_plotdata`] flattens a finished run into CSV
//! tables for plotting.

use std::fmt::Display;
use std::path::{Path, PathBuf};

pub mod config;
pub mod io;
pub mod parallel;
pub mod pipeline;
pub mod plot;
pub mod presets;

pub use config::RunConfig;
pub use conswave_core as core;
pub use parallel::solve_parallel;
pub use pipeline::{run, CheckResult, RunOutcome};
pub use plot::{emit_plotdata, PlotKind};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {source}")]
    Core { stage: &'static str, source: conswave_core::Error },
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{dir}: missing {what}")]
    MissingArtifacts { dir: PathBuf, what: String },
}

impl From<conswave_core::Error> for RunError {
    fn from(source: conswave_core::Error) -> Self {
        RunError::Core { stage: "setup", source }
    }
}

impl RunError {
    pub fn io(path: &Path, e: impl Display) -> Self {
        RunError::Io { path: path.to_path_buf(), msg: e.to_string() }
    }

    pub fn at(stage: &'static str) -> impl Fn(conswave_core::Error) -> RunError {
        move |source| RunError::Core { stage, source }
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}
