use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ms_to_samples, SampledSignal};

pub const DEFAULT_RMS_WINDOW_MS: f64 = 200.0;

/// Windowed root-mean-square amplitude.
///
/// For multi-channel input `values` holds the per-window mean of the channel
/// RMS values and `per_channel` keeps the individual series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsSeries {
    pub values: Vec<f64>,
    pub per_channel: Vec<Vec<f64>>,
    pub window_ms: f64,
    pub hop_ms: f64,
    pub normalized: bool,
    /// Start time of the first window.
    pub origin_s: f64,
}

impl RmsSeries {
    /// Center time of every window.
    pub fn center_times(&self) -> Vec<f64> {
        let half = self.window_ms / 2000.0;
        (0..self.values.len())
            .map(|i| self.origin_s + i as f64 * self.hop_ms / 1000.0 + half)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// RMS over consecutive windows; a trailing partial window is dropped.
pub fn rms_windows(signal: &SampledSignal, window_ms: f64, hop_ms: f64) -> Result<RmsSeries> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let window = ms_to_samples(window_ms, signal.rate_hz());
    let hop = ms_to_samples(hop_ms, signal.rate_hz());
    if window == 0 || hop == 0 {
        return Err(Error::InvalidParameter(format!(
            "window {window_ms} ms / hop {hop_ms} ms round to zero samples at {} Hz",
            signal.rate_hz()
        )));
    }
    if window > signal.len() {
        return Err(Error::WindowExceedsSignal { window, len: signal.len() });
    }
    let count = (signal.len() - window) / hop + 1;
    let per_channel: Vec<Vec<f64>> = signal
        .channels()
        .iter()
        .map(|c| (0..count).map(|i| rms(&c[i * hop..i * hop + window])).collect())
        .collect();
    let values = channel_mean(&per_channel, count);
    Ok(RmsSeries {
        values,
        per_channel,
        window_ms,
        hop_ms,
        normalized: false,
        origin_s: signal.origin_s(),
    })
}

pub(crate) fn channel_mean(per_channel: &[Vec<f64>], count: usize) -> Vec<f64> {
    let n = per_channel.len() as f64;
    (0..count).map(|i| per_channel.iter().map(|c| c[i]).sum::<f64>() / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_signal() {
        let s = SampledSignal::mono(vec![-0.75; 4000], 2000.0).unwrap();
        let r = rms_windows(&s, 200.0, 200.0).unwrap();
        assert_eq!(r.len(), 10);
        assert!(r.values.iter().all(|v| (v - 0.75).abs() < 1e-12));
    }

    #[test]
    fn sine_over_whole_cycles() {
        // 50 Hz at 2000 Hz: 40 samples per cycle, 400-sample windows
        let x: Vec<f64> = (0..4000).map(|i| (2.0 * PI * 50.0 * i as f64 / 2000.0).sin()).collect();
        let r = rms_windows(&SampledSignal::mono(x, 2000.0).unwrap(), 200.0, 200.0).unwrap();
        assert!(r.values.iter().all(|v| (v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3));
    }

    #[test]
    fn window_count_at_4370_hz() {
        let s = SampledSignal::mono(vec![1.0; 4370], 4370.0).unwrap();
        assert_eq!(rms_windows(&s, 200.0, 200.0).unwrap().len(), 5);
    }

    #[test]
    fn partial_window_dropped() {
        let s = SampledSignal::mono(vec![1.0; 4370 + 800], 4370.0).unwrap();
        assert_eq!(rms_windows(&s, 200.0, 200.0).unwrap().len(), 5);
    }

    #[test]
    fn channels_are_averaged() {
        let s = SampledSignal::new(vec![vec![1.0; 400], vec![3.0; 400]], 2000.0, 0.0).unwrap();
        let r = rms_windows(&s, 200.0, 200.0).unwrap();
        assert_eq!(r.values, vec![2.0]);
        assert_eq!(r.per_channel, vec![vec![1.0], vec![3.0]]);
    }

    #[test]
    fn empty_signal_fails() {
        let s = SampledSignal::mono(vec![], 2000.0).unwrap();
        assert!(matches!(rms_windows(&s, 200.0, 200.0), Err(Error::EmptySignal)));
    }
}
