use std::io;

use thiserror::Error;

/// Errors raised by the simulator and its I/O layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value at step {step} (T = {time}) in cell ({i}, {j})")]
    BlowUp {
        step: u64,
        time: f64,
        i: usize,
        j: usize,
    },

    #[error("no shooting bracket for c = {c} within amplitudes [{lo}, {hi}]")]
    BracketNotFound { c: f64, lo: f64, hi: f64 },

    #[error("radial profile is not monotonically decreasing (first rise at r = {r})")]
    NotMonotone { r: f64 },

    #[error("degenerate spectrum: slice has no energy outside the retained modes")]
    DegenerateSpectrum,

    #[error("samples are not localized: endpoint magnitude is {ratio:.3e} of the maximum")]
    NotLocalized { ratio: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("snapshot magic mismatch")]
    BadMagic,

    #[error("snapshot truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("snapshot dimensions {nx} x {ny} overflow the addressable size")]
    DimensionOverflow { nx: u32, ny: u32 },

    #[error("malformed snapshot header: {0}")]
    BadHeader(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
