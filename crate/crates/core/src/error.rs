use std::fmt;
use std::path::PathBuf;

use crate::diffusion::LinearSolveReport;

/// Concentration species of the `A + B <-> C` system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    A,
    B,
    C,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::A, Species::B, Species::C];

    pub fn name(self) -> &'static str {
        match self {
            Species::A => "a",
            Species::B => "b",
            Species::C => "c",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stage of a splitting step, used to give errors context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Reaction,
    Diffusion,
    Check,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Reaction => "reaction",
            Stage::Diffusion => "diffusion",
            Stage::Check => "invariant check",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid diffusion coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("invalid time configuration: {0}")]
    InvalidTime(String),

    #[error("invalid study setup: {0}")]
    InvalidStudy(String),

    #[error("non-finite value {value} in field at cell {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("species {species} is not strictly positive at cell {index} (value {value:e})")]
    NonPositive {
        species: Species,
        index: usize,
        value: f64,
    },

    #[error(
        "reaction solve did not converge in {iterations} iterations \
         (a={a:e}, b={b:e}, c={c:e}, dt={dt:e}, residual={residual:e})"
    )]
    ReactionNoConvergence {
        a: f64,
        b: f64,
        c: f64,
        dt: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("reaction solve failed at cell {index}: {source}")]
    ReactionCell {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "conjugate gradient did not converge: {} iterations, relative residual {:e}",
        .0.iterations, .0.final_relative_residual
    )]
    CgNoConvergence(LinearSolveReport),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("step {step} failed in {stage} stage: {source}")]
    Step {
        step: usize,
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration errors, 3 for solver failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidParams(_)
            | Error::InvalidCoefficient(_)
            | Error::InvalidTime(_)
            | Error::InvalidStudy(_)
            | Error::Config(_)
            | Error::GridMismatch => 2,
            Error::Io { .. } | Error::Snapshot { .. } => 4,
            Error::Step { source, .. } => match source.exit_code() {
                4 => 4,
                _ => 3,
            },
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
