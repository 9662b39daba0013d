use vocalis_core::DatasetError;

use crate::session::Phase;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("cannot {action} while {phase}")]
    IllegalTransition { phase: Phase, action: &'static str },
    #[error("practice needs a completed MVC calibration while EMG is active")]
    CalibrationRequired,
    #[error("session does not accept signal chunks while {0}")]
    NotAccepting(Phase),
    #[error("{modality} chunk at {found} Hz, session expects {expected} Hz")]
    RateMismatch { modality: &'static str, expected: f64, found: f64 },
    #[error("{modality} chunk starts at {found_s} s, before the {expected_s} s already received")]
    TimeRegression { modality: &'static str, expected_s: f64, found_s: f64 },
    #[error("{modality} chunk starts at {found_s} s, leaving a gap after {expected_s} s")]
    Discontinuity { modality: &'static str, expected_s: f64, found_s: f64 },
    #[error("{modality} chunk has {found} channels, session has {expected}")]
    ChannelMismatch { modality: &'static str, expected: usize, found: usize },
    #[error("{0} is not active in this session")]
    InactiveModality(&'static str),
    #[error("missing modality: {}", .0.join(", "))]
    MissingModality(Vec<String>),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed chunk: {0}")]
    MalformedChunk(String),
    #[error("unknown reference {0:?}")]
    UnknownReference(String),
    #[error("unknown schedule {0:?}")]
    UnknownSchedule(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Compute(#[from] vocalis_core::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
