use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid damping profile: {0}")]
    InvalidDamping(String),

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("time step {dt} violates the stability bound dt < dx/sqrt(2) = {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("non-finite value in u at step {step} (t = {t})")]
    Unstable { step: usize, t: f64 },

    #[error(
        "solution reached the boundary frame at step {step} (t = {t}): \
         frame max {frame_max:e} vs field max {field_max:e}"
    )]
    GridTooSmall {
        step: usize,
        t: f64,
        frame_max: f64,
        field_max: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rate fit: {0}")]
    Fit(String),

    #[error("multiplier calibration failed: {0}")]
    Calibration(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
