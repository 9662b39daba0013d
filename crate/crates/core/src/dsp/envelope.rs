//! Analytic-signal amplitude envelopes.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::filter::moving_average;
use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Fraction of samples dropped at each end of an envelope.
pub const DEFAULT_TRIM_FRACTION: f64 = 0.05;
/// Smoothing window applied to raw EMG before envelope extraction.
pub const DEFAULT_SMOOTHING_MS: f64 = 10.0;
pub const MIN_ENVELOPE_INPUT: usize = 8;

/// Instantaneous amplitude sequence sampled at the rate of its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    values: Vec<f64>,
    source_rate_hz: f64,
    trim_fraction: f64,
}

impl Envelope {
    pub fn new(values: Vec<f64>, source_rate_hz: f64, trim_fraction: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "envelope needs at least 2 values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("envelope values must be finite and nonnegative".into()));
        }
        Ok(Self { values, source_rate_hz, trim_fraction })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_rate_hz(&self) -> f64 {
        self.source_rate_hz
    }

    pub fn trim_fraction(&self) -> f64 {
        self.trim_fraction
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, c: f64) -> Envelope {
        Envelope {
            values: self.values.iter().map(|v| v * c).collect(),
            source_rate_hz: self.source_rate_hz,
            trim_fraction: self.trim_fraction,
        }
    }
}

/// Number of samples removed from each end for a given trim fraction.
pub fn trim_count(len: usize, trim_fraction: f64) -> usize {
    (len as f64 * trim_fraction).floor() as usize
}

/// Magnitude of the analytic signal of a mono segment, built in the frequency
/// domain over the whole segment, with `trim_fraction` of the samples removed
/// from each end.
pub fn hilbert_envelope(signal: &SampledSignal, trim_fraction: f64) -> Result<Envelope> {
    let x = signal.single_channel()?;
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    if x.len() < MIN_ENVELOPE_INPUT {
        return Err(Error::InvalidSignal(format!(
            "envelope needs at least {MIN_ENVELOPE_INPUT} samples, got {}",
            x.len()
        )));
    }
    if !(0.0..=0.25).contains(&trim_fraction) {
        return Err(Error::InvalidParameter(format!("trim_fraction {trim_fraction} outside [0, 0.25]")));
    }
    let magnitude = analytic_magnitude(x);
    let k = trim_count(magnitude.len(), trim_fraction);
    Envelope::new(magnitude[k..magnitude.len() - k].to_vec(), signal.rate_hz(), trim_fraction)
}

/// |x + i·H{x}| for every sample.
pub fn analytic_magnitude(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);

    // one-sided spectrum: keep DC (and Nyquist for even n), double positives
    let half = n / 2;
    let positive_end = if n % 2 == 0 { half } else { half + 1 };
    for v in buf.iter_mut().take(positive_end).skip(1) {
        *v *= 2.0;
    }
    for v in buf.iter_mut().skip(positive_end + usize::from(n % 2 == 0)) {
        *v = Complex64::new(0.0, 0.0);
    }

    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| (c * scale).norm()).collect()
}

/// Moving-average denoising followed by a Hilbert envelope, per channel.
pub fn emg_envelopes(signal: &SampledSignal, smoothing_ms: f64, trim_fraction: f64) -> Result<Vec<Envelope>> {
    let smoothed = moving_average(signal, smoothing_ms)?;
    smoothed
        .split_channels()
        .iter()
        .map(|c| hilbert_envelope(c, trim_fraction))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_signal_gives_zero_envelope() {
        let s = SampledSignal::mono(vec![0.0; 64], 1000.0).unwrap();
        let e = hilbert_envelope(&s, 0.05).unwrap();
        assert!(e.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rejects_multichannel_and_short_input() {
        let s = SampledSignal::new(vec![vec![0.0; 16]; 2], 1000.0, 0.0).unwrap();
        assert!(matches!(hilbert_envelope(&s, 0.05), Err(Error::MultiChannel(2))));
        let s = SampledSignal::mono(vec![], 1000.0).unwrap();
        assert!(matches!(hilbert_envelope(&s, 0.05), Err(Error::EmptySignal)));
        let s = SampledSignal::mono(vec![1.0; 4], 1000.0).unwrap();
        assert!(hilbert_envelope(&s, 0.05).is_err());
    }

    #[test]
    fn trims_each_end() {
        let s = SampledSignal::mono(vec![1.0; 100], 1000.0).unwrap();
        assert_eq!(hilbert_envelope(&s, 0.05).unwrap().len(), 90);
        assert_eq!(hilbert_envelope(&s, 0.0).unwrap().len(), 100);
    }

    #[test]
    fn odd_length_tone() {
        let rate = 8000.0;
        let x: Vec<f64> = (0..1001).map(|i| 0.7 * (2.0 * PI * 500.0 * i as f64 / rate).cos()).collect();
        let s = SampledSignal::mono(x, rate).unwrap();
        let e = hilbert_envelope(&s, 0.1).unwrap();
        assert!(e.values().iter().all(|v| (v - 0.7).abs() < 0.01));
    }
}
