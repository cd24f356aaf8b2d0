use std::path::PathBuf;

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("exponential overflow evaluating at z = {z}")]
    Range { z: Complex64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Newton iteration did not converge after {iterations} steps from seed {seed} (last |D| = {residual:.3e})")]
    NonConvergence {
        seed: Complex64,
        iterations: usize,
        residual: f64,
    },

    #[error("possible multiple zero near {near}: two roots closer than {tol:e}")]
    MultipleZero { near: Complex64, tol: f64 },

    #[error(
        "root count mismatch over {contour}: argument principle predicts {expected}, found {found}"
    )]
    CountMismatch {
        contour: String,
        expected: i64,
        found: usize,
    },

    #[error("spectrum too short: summation order {n} needs every eigenvalue with |lambda| < R_n = {radius}")]
    SpectrumTooShort { n: u32, radius: f64 },

    #[error("degenerate normalization for lambda = {lambda}")]
    DegenerateNormalization { lambda: Complex64 },

    #[error("no control convention nulls the terminal segment (conjugate: {residual_conjugate:.3e}, plain: {residual_plain:.3e})")]
    ConventionValidation {
        residual_conjugate: f64,
        residual_plain: f64,
    },

    #[error("terminal map degenerate: effective rank {rank} of {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(line: usize, key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration and I/O problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Io { .. } | Error::Schedule(_) => 2,
            _ => 3,
        }
    }
}
