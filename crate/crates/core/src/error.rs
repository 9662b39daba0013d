use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by signal processing, geometry and statistics routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("window exceeds signal ({window} samples > {len} samples)")]
    WindowExceedsSignal { window: usize, len: usize },

    #[error("expected a single-channel signal, got {0} channels")]
    MultiChannel(usize),

    #[error("signal is empty")]
    EmptySignal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("band [{low_hz}, {high_hz}] Hz lies outside the valid range for rate {rate_hz} Hz")]
    BandOutsideNyquist { low_hz: f64, high_hz: f64, rate_hz: f64 },

    #[error("band [{low_hz}, {high_hz}] Hz contains no frequency bins")]
    EmptyBand { low_hz: f64, high_hz: f64 },

    #[error("no contraction detected in calibration recording")]
    NoContraction,

    #[error("degenerate calibration: mvc {mvc} <= baseline {baseline}")]
    DegenerateCalibration { mvc: f64, baseline: f64 },

    #[error("non-finite landmark coordinate in frame {frame}")]
    NonFiniteLandmark { frame: u64 },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("p-value {0} outside [0, 1]")]
    PValueOutOfRange(f64),

    #[error("duplicate feature key: {0}")]
    DuplicateKey(String),

    #[error("malformed pitch notation {text:?}: unexpected {token:?}")]
    MalformedPitch { text: String, token: String },

    #[error("empty input: {0}")]
    EmptyInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised while loading or writing session files.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing modality file {modality}: {path}")]
    MissingModalityFile { modality: String, path: PathBuf },

    #[error("rate mismatch for {modality}: manifest declares {declared} Hz, file has {found} Hz")]
    RateMismatch { modality: String, declared: f64, found: f64 },

    #[error("channel mismatch in {path}: header declares {declared}, row {row} has {found}")]
    ChannelMismatch { path: PathBuf, declared: usize, found: usize, row: usize },

    #[error("malformed CSV {path}: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("malformed WAV {path}: {reason}")]
    MalformedWav { path: PathBuf, reason: String },

    #[error("malformed annotation {path} line {line}: {reason}")]
    MalformedAnnotation { path: PathBuf, line: usize, reason: String },

    #[error("invalid manifest {path}: {reason}")]
    InvalidManifest { path: PathBuf, reason: String },

    #[error("modality {0} not present in session")]
    ModalityAbsent(String),

    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, #[source] source: std::io::Error },

    #[error(transparent)]
    Compute(#[from] Error),
}

impl DatasetError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DatasetError::Io { path: path.into(), source }
    }
}
