//! Per-bin metrics on the analysis grid.
//!
//! Live sessions and reference building both go through [`compute_bin`], which
//! only ever sees the samples a bin is allowed to depend on. That makes the
//! streamed values equal to the batch values, bit for bit.

use serde::{Deserialize, Serialize};
use vocalis_core::dsp::pitch::{estimate_f0, PitchConfig};
use vocalis_core::dsp::rms::rms;
use vocalis_core::dsp::spectral::{SprConfig, DEFAULT_STFT_WINDOW};
use vocalis_core::dsp::stability::{emg_stability, StabilityConfig};
use vocalis_core::dsp::{audio_spr, MvcCalibration};
use vocalis_core::signal::ms_to_samples;
use vocalis_core::SampledSignal;

use crate::error::{EngineError, Result};

pub const DEFAULT_GRID_MS: f64 = 200.0;
pub const DEFAULT_STABILITY_SPAN_BINS: usize = 5;
pub const DEFAULT_F0_WINDOW: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricsConfig {
    pub grid_ms: f64,
    /// Bins of EMG, ending at the current one, scored for `stability_window`.
    pub stability_span_bins: usize,
    pub stability: StabilityConfig,
    pub spr: SprConfig,
    pub pitch: PitchConfig,
    /// Trailing audio samples handed to the f0 estimator.
    pub f0_window: usize,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            grid_ms: DEFAULT_GRID_MS,
            stability_span_bins: DEFAULT_STABILITY_SPAN_BINS,
            stability: StabilityConfig::default(),
            spr: SprConfig::default(),
            pitch: PitchConfig::default(),
            f0_window: DEFAULT_F0_WINDOW,
        }
    }
}

impl MetricsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_ms.is_finite() && self.grid_ms > 0.0) {
            return Err(EngineError::InvalidConfig(format!("grid_ms must be positive, got {}", self.grid_ms)));
        }
        if self.stability_span_bins == 0 {
            return Err(EngineError::InvalidConfig("stability_span_bins must be at least 1".into()));
        }
        Ok(())
    }

    /// Check that one grid bin of audio fills an STFT window.
    pub fn check_audio_rate(&self, rate_hz: f64) -> Result<()> {
        if ms_to_samples(self.grid_ms, rate_hz) < DEFAULT_STFT_WINDOW {
            return Err(EngineError::InvalidConfig(format!(
                "audio at {rate_hz} Hz gives fewer than {DEFAULT_STFT_WINDOW} samples per {} ms bin",
                self.grid_ms
            )));
        }
        Ok(())
    }
}

/// Sample index range `[start, end)` of grid bin `k`.
pub fn bin_bounds(k: usize, grid_ms: f64, rate_hz: f64) -> (usize, usize) {
    (ms_to_samples(k as f64 * grid_ms, rate_hz), ms_to_samples((k + 1) as f64 * grid_ms, rate_hz))
}

/// Number of whole bins covered by the first `available` samples.
pub fn complete_bins(available: usize, grid_ms: f64, rate_hz: f64) -> usize {
    let mut n = (available as f64 / rate_hz * 1000.0 / grid_ms).floor() as usize;
    while bin_bounds(n, grid_ms, rate_hz).1 <= available {
        n += 1;
    }
    while n > 0 && bin_bounds(n - 1, grid_ms, rate_hz).1 > available {
        n -= 1;
    }
    n
}

/// Number of bins ending at or before session time `t_s`.
pub fn bins_done_at(t_s: f64, grid_ms: f64) -> usize {
    (t_s * 1000.0 / grid_ms + 1e-9).floor().max(0.0) as usize
}

/// Random access to samples by absolute index.
pub trait SampleSource {
    fn rate_hz(&self) -> f64;
    /// One past the last absolute index held.
    fn available(&self) -> usize;
    fn window(&self, start: usize, end: usize) -> SampledSignal;
}

impl SampleSource for SampledSignal {
    fn rate_hz(&self) -> f64 {
        SampledSignal::rate_hz(self)
    }

    fn available(&self) -> usize {
        self.len()
    }

    fn window(&self, start: usize, end: usize) -> SampledSignal {
        self.slice(start, end)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmgBin {
    pub rms_norm: f64,
    pub stability_window: f64,
    pub envelope_mean: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AudioBin {
    pub spr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BinMetrics {
    pub rms_norm: f64,
    pub stability_window: f64,
    pub envelope_mean: f64,
    pub spr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0: Option<f64>,
}

impl BinMetrics {
    pub fn from_parts(emg: EmgBin, audio: AudioBin) -> Self {
        Self {
            rms_norm: emg.rms_norm,
            stability_window: emg.stability_window,
            envelope_mean: emg.envelope_mean,
            spr: audio.spr,
            f0: audio.f0,
        }
    }

    pub fn emg(&self) -> EmgBin {
        EmgBin { rms_norm: self.rms_norm, stability_window: self.stability_window, envelope_mean: self.envelope_mean }
    }

    pub fn audio(&self) -> AudioBin {
        AudioBin { spr: self.spr, f0: self.f0 }
    }
}

/// RMS of bin `k` (MVC-normalized when a calibration is given) and stability
/// over the trailing span ending at `k`.
pub fn emg_bin(k: usize, emg: &dyn SampleSource, cal: Option<&MvcCalibration>, cfg: &MetricsConfig) -> Result<EmgBin> {
    let rate = emg.rate_hz();
    let (start, end) = bin_bounds(k, cfg.grid_ms, rate);
    let block = emg.window(start, end);
    let raw = block.channels().iter().map(|c| rms(c)).sum::<f64>() / block.channel_count() as f64;
    let rms_norm = cal.map_or(raw, |c| c.normalize(raw));

    let span_start = bin_bounds(k.saturating_sub(cfg.stability_span_bins - 1), cfg.grid_ms, rate).0;
    let span = emg_stability(&emg.window(span_start, end), &cfg.stability)?;
    Ok(EmgBin { rms_norm, stability_window: span.mean_s, envelope_mean: span.envelope_mean })
}

/// Segment SPR of bin `k` and f0 of the audio just before its end.
pub fn audio_bin(k: usize, audio: &dyn SampleSource, cfg: &MetricsConfig) -> Result<AudioBin> {
    let (start, end) = bin_bounds(k, cfg.grid_ms, audio.rate_hz());
    let spr = audio_spr(&audio.window(start, end), &cfg.spr)?.segment_db;
    let tail = audio.window(end.saturating_sub(cfg.f0_window), end).mixdown();
    Ok(AudioBin { spr, f0: estimate_f0(&tail, &cfg.pitch) })
}

/// One computed grid bin, flagged when a modality ran out and its values
/// were carried forward from the previous bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBin {
    #[serde(flatten)]
    pub metrics: BinMetrics,
    #[serde(default)]
    pub carried: bool,
}

/// Batch evaluation of every bin covered by at least one modality.
pub fn grid_metrics(
    emg: Option<&SampledSignal>,
    audio: Option<&SampledSignal>,
    cal: Option<&MvcCalibration>,
    cfg: &MetricsConfig,
) -> Result<Vec<GridBin>> {
    cfg.validate()?;
    if let Some(a) = audio {
        cfg.check_audio_rate(a.rate_hz())?;
    }
    let emg_bins = emg.map_or(0, |s| complete_bins(s.len(), cfg.grid_ms, s.rate_hz()));
    let audio_bins = audio.map_or(0, |s| complete_bins(s.len(), cfg.grid_ms, s.rate_hz()));
    let total = emg_bins.max(audio_bins);

    let mut out: Vec<GridBin> = Vec::with_capacity(total);
    let mut last_emg = EmgBin::default();
    let mut last_audio = AudioBin::default();
    for k in 0..total {
        let mut carried = false;
        match emg {
            Some(s) if k < emg_bins => last_emg = emg_bin(k, s, cal, cfg)?,
            Some(_) => carried = true,
            None => {}
        }
        match audio {
            Some(s) if k < audio_bins => last_audio = audio_bin(k, s, cfg)?,
            Some(_) => carried = true,
            None => {}
        }
        out.push(GridBin { metrics: BinMetrics::from_parts(last_emg, last_audio), carried });
    }
    Ok(out)
}
