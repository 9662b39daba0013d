//! Metrics, dataset handling and statistics for multimodal vocal training
//! recordings (surface EMG, laryngeal ultrasound landmarks, audio).

pub mod dataset;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod signal;
pub mod stats;
pub mod synth;

pub use error::{DatasetError, Error, Result};
pub use signal::SampledSignal;
