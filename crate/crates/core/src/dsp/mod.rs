//! Signal processing for EMG and audio: smoothing, envelopes, stability,
//! MVC-normalized RMS, spectra, singing power ratio and pitch.

pub mod envelope;
pub mod filter;
pub mod grid;
pub mod mvc;
pub mod pitch;
pub mod rms;
pub mod spectral;
pub mod stability;

pub use envelope::{emg_envelopes, hilbert_envelope, Envelope};
pub use filter::{band_pass, moving_average};
pub use grid::{resample_to_grid, GridSeries};
pub use mvc::{mvc_from_calibration, normalize_mvc, MvcCalibration, MvcProtocol};
pub use pitch::{estimate_f0, PitchConfig};
pub use rms::{rms_windows, RmsSeries};
pub use spectral::{spr, stft_magnitude, Spectrogram, SprConfig, SprSeries};
pub use stability::{emg_stability, stability, ChannelStability, StabilityConfig, StabilityScore};

use crate::error::Result;
use crate::signal::SampledSignal;

/// Band-pass, STFT and SPR in one call with the default analysis settings.
pub fn audio_spr(audio: &SampledSignal, config: &SprConfig) -> Result<SprSeries> {
    let mono = audio.mixdown();
    let filtered = band_pass(&mono, 500.0, 4000.0)?;
    let spec = stft_magnitude(&filtered, spectral::DEFAULT_STFT_WINDOW, spectral::DEFAULT_STFT_HOP)?;
    spr(&spec, config)
}
