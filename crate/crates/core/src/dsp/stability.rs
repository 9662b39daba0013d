//! Envelope stability: mean absolute level change between consecutive
//! envelope samples, in decibels. Lower is steadier.

use serde::{Deserialize, Serialize};

use crate::dsp::envelope::{emg_envelopes, Envelope};
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Amplitude floor applied before taking ratios.
pub const DEFAULT_ENVELOPE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    /// Mean absolute dB step.
    pub s: f64,
    /// Number of ratio terms averaged (envelope length minus one).
    pub n_terms: usize,
}

/// `s = mean_t |20·log10(max(A[t+1], ε) / max(A[t], ε))|`.
pub fn stability(envelope: &Envelope, epsilon: f64) -> Result<StabilityScore> {
    stability_of_values(envelope.values(), epsilon)
}

pub fn stability_of_values(values: &[f64], epsilon: f64) -> Result<StabilityScore> {
    if values.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "stability needs at least 2 envelope values, got {}",
            values.len()
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let n_terms = values.len() - 1;
    let total: f64 = values
        .windows(2)
        .map(|w| (20.0 * (w[1].max(epsilon) / w[0].max(epsilon)).log10()).abs())
        .sum();
    Ok(StabilityScore { s: total / n_terms as f64, n_terms })
}

/// Stability of a multi-channel recording: one score per channel and their
/// arithmetic mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStability {
    pub mean_s: f64,
    pub per_channel: Vec<StabilityScore>,
    /// Mean envelope amplitude over all channels.
    pub envelope_mean: f64,
}

/// Parameters for turning raw EMG into a stability score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub smoothing_ms: f64,
    pub trim_fraction: f64,
    pub epsilon: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            smoothing_ms: crate::dsp::envelope::DEFAULT_SMOOTHING_MS,
            trim_fraction: crate::dsp::envelope::DEFAULT_TRIM_FRACTION,
            epsilon: DEFAULT_ENVELOPE_FLOOR,
        }
    }
}

/// Smooth, extract per-channel envelopes and score each channel.
pub fn emg_stability(signal: &SampledSignal, config: &StabilityConfig) -> Result<ChannelStability> {
    let envelopes = emg_envelopes(signal, config.smoothing_ms, config.trim_fraction)?;
    let per_channel = envelopes
        .iter()
        .map(|e| stability(e, config.epsilon))
        .collect::<Result<Vec<_>>>()?;
    let mean_s = per_channel.iter().map(|s| s.s).sum::<f64>() / per_channel.len() as f64;
    let envelope_mean = envelopes.iter().map(Envelope::mean).sum::<f64>() / envelopes.len() as f64;
    Ok(ChannelStability { mean_s, per_channel, envelope_mean })
}
