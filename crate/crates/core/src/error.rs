use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid geometry: {0}")]
    Geometry(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("bad magic in model file (expected \"GSM1\", found {found:?})")]
    BadMagic { found: [u8; 4] },

    #[error("truncated model file: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("non-finite value in {what} at entry {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("halo of {have} cells is too small, {need} required")]
    HaloTooSmall { need: usize, have: usize },

    #[error("boundary specification: {0}")]
    Boundary(String),

    #[error("CFL violation: Courant number {courant:.6} exceeds {limit}")]
    Cfl { courant: f64, limit: f64 },

    #[error("stencil half-width {0} out of range 1..=10")]
    StencilOrder(usize),

    #[error("singular interface eigenbasis (impedance sum {0})")]
    SingularBasis(f64),

    #[error("source at ({x}, {y}) lies outside the grid")]
    SourceOutside { x: f64, y: f64 },

    #[error("length mismatch: {0}")]
    Length(String),

    #[error("non-positive error {value} at point {index}; method matched the reference exactly")]
    NonPositiveError { index: usize, value: f64 },

    #[error("config key `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("step {step} ({phase}): {source}")]
    Step {
        step: usize,
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn at_step(self, step: usize, phase: &'static str) -> Self {
        Error::Step {
            step,
            phase,
            source: Box::new(self),
        }
    }
}
