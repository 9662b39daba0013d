//! Short-time spectra and the singing power ratio.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

pub const DEFAULT_STFT_WINDOW: usize = 2048;
pub const DEFAULT_STFT_HOP: usize = 512;
pub const SPR_HIGH_BAND_HZ: [f64; 2] = [2000.0, 4000.0];
pub const SPR_LOW_BAND_HZ: [f64; 2] = [500.0, 1000.0];
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-12;

/// Frame-by-bin magnitude matrix of a tapered short-time Fourier transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrogram {
    /// `magnitudes[frame][bin]`
    pub magnitudes: Vec<Vec<f64>>,
    pub rate_hz: f64,
    pub window_size: usize,
    pub hop: usize,
    pub origin_s: f64,
}

impl Spectrogram {
    pub fn bin_hz(&self) -> f64 {
        self.rate_hz / self.window_size as f64
    }

    pub fn bin_count(&self) -> usize {
        self.window_size / 2 + 1
    }

    pub fn frame_count(&self) -> usize {
        self.magnitudes.len()
    }

    /// Center time of each frame.
    pub fn frame_times(&self) -> Vec<f64> {
        let half = self.window_size as f64 / 2.0;
        (0..self.frame_count())
            .map(|i| self.origin_s + (i * self.hop) as f64 / self.rate_hz + half / self.rate_hz)
            .collect()
    }

    /// Indices of bins whose center frequency lies in `[low_hz, high_hz]`.
    pub fn band_bins(&self, low_hz: f64, high_hz: f64) -> std::ops::RangeInclusive<usize> {
        let bin_hz = self.bin_hz();
        let first = (low_hz / bin_hz).ceil() as usize;
        let last = ((high_hz / bin_hz).floor() as usize).min(self.bin_count() - 1);
        first..=last
    }
}

/// Symmetric Hann taper: `0.5 − 0.5·cos(2πn/(N−1))`.
pub fn hann_symmetric(size: usize) -> Vec<f64> {
    if size == 1 {
        return vec![1.0];
    }
    let denom = (size - 1) as f64;
    (0..size).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / denom).cos()).collect()
}

pub fn stft_magnitude(signal: &SampledSignal, window_size: usize, hop: usize) -> Result<Spectrogram> {
    let x = signal.single_channel()?;
    if window_size < 2 || hop == 0 {
        return Err(Error::InvalidParameter(format!("window_size {window_size} / hop {hop} invalid")));
    }
    if x.len() < window_size {
        return Err(Error::WindowExceedsSignal { window: window_size, len: x.len() });
    }
    let taper = hann_symmetric(window_size);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(window_size);
    let frames = (x.len() - window_size) / hop + 1;
    let bins = window_size / 2 + 1;
    let mut buf = vec![Complex64::new(0.0, 0.0); window_size];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let magnitudes = (0..frames)
        .map(|f| {
            let start = f * hop;
            for (slot, (&v, &w)) in buf.iter_mut().zip(x[start..start + window_size].iter().zip(&taper)) {
                *slot = Complex64::new(v * w, 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf[..bins].iter().map(|c| c.norm()).collect()
        })
        .collect();
    Ok(Spectrogram { magnitudes, rate_hz: signal.rate_hz(), window_size, hop, origin_s: signal.origin_s() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SprConfig {
    pub high_band_hz: [f64; 2],
    pub low_band_hz: [f64; 2],
    pub epsilon: f64,
}

impl Default for SprConfig {
    fn default() -> Self {
        Self { high_band_hz: SPR_HIGH_BAND_HZ, low_band_hz: SPR_LOW_BAND_HZ, epsilon: DEFAULT_ENERGY_FLOOR }
    }
}

/// Per-frame SPR in dB plus the segment-level value from summed energies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprSeries {
    pub values: Vec<f64>,
    pub frame_times_s: Vec<f64>,
    pub segment_db: f64,
    pub high_energy: f64,
    pub low_energy: f64,
    pub high_band_hz: [f64; 2],
    pub low_band_hz: [f64; 2],
    pub epsilon: f64,
}

fn spr_db(high: f64, low: f64, epsilon: f64) -> f64 {
    10.0 * ((high + epsilon) / (low + epsilon)).log10()
}

pub fn spr(spec: &Spectrogram, config: &SprConfig) -> Result<SprSeries> {
    let nyquist = spec.rate_hz / 2.0;
    for band in [config.high_band_hz, config.low_band_hz] {
        if !(band[0] >= 0.0 && band[0] <= band[1] && band[1] <= nyquist) {
            return Err(Error::BandOutsideNyquist { low_hz: band[0], high_hz: band[1], rate_hz: spec.rate_hz });
        }
    }
    if !(config.epsilon.is_finite() && config.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", config.epsilon)));
    }
    let high = spec.band_bins(config.high_band_hz[0], config.high_band_hz[1]);
    let low = spec.band_bins(config.low_band_hz[0], config.low_band_hz[1]);
    for (range, band) in [(&high, config.high_band_hz), (&low, config.low_band_hz)] {
        if range.is_empty() {
            return Err(Error::EmptyBand { low_hz: band[0], high_hz: band[1] });
        }
    }
    let energy = |frame: &[f64], range: &std::ops::RangeInclusive<usize>| -> f64 {
        frame[range.clone()].iter().map(|m| m * m).sum()
    };
    let mut high_total = 0.0;
    let mut low_total = 0.0;
    let values = spec
        .magnitudes
        .iter()
        .map(|frame| {
            let h = energy(frame, &high);
            let l = energy(frame, &low);
            high_total += h;
            low_total += l;
            spr_db(h, l, config.epsilon)
        })
        .collect();
    Ok(SprSeries {
        values,
        frame_times_s: spec.frame_times(),
        segment_db: spr_db(high_total, low_total, config.epsilon),
        high_energy: high_total,
        low_energy: low_total,
        high_band_hz: config.high_band_hz,
        low_band_hz: config.low_band_hz,
        epsilon: config.epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / rate).sin()).collect()
    }

    #[test]
    fn bin_spacing_at_48k() {
        let s = SampledSignal::mono(vec![0.0; 2048], 48_000.0).unwrap();
        let spec = stft_magnitude(&s, 2048, 512).unwrap();
        assert_eq!(spec.bin_hz(), 23.4375);
        assert_eq!(spec.bin_count(), 1025);
        assert_eq!(spec.frame_count(), 1);
    }

    #[test]
    fn silence_has_zero_magnitude() {
        let s = SampledSignal::mono(vec![0.0; 8192], 48_000.0).unwrap();
        let spec = stft_magnitude(&s, 2048, 512).unwrap();
        assert!(spec.magnitudes.iter().flatten().all(|&m| m == 0.0));
    }

    #[test]
    fn peak_bin_of_pure_tone() {
        let rate = 48_000.0;
        let s = SampledSignal::mono(tone(3000.0, rate, 48_000), rate).unwrap();
        let spec = stft_magnitude(&s, 2048, 512).unwrap();
        let expected = (3000.0 / spec.bin_hz()).round() as usize;
        for frame in &spec.magnitudes {
            let argmax = frame
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(argmax, expected);
        }
    }

    #[test]
    fn short_signal_rejected() {
        let s = SampledSignal::mono(vec![0.0; 100], 48_000.0).unwrap();
        assert!(stft_magnitude(&s, 2048, 512).is_err());
    }

    #[test]
    fn band_inclusion_is_inclusive() {
        let s = SampledSignal::mono(vec![0.0; 16], 16.0).unwrap();
        let spec = stft_magnitude(&s, 16, 4).unwrap();
        // 1 Hz bins: [2, 4] holds bins 2, 3, 4
        assert_eq!(spec.band_bins(2.0, 4.0), 2..=4);
    }

    #[test]
    fn high_tone_only_is_strongly_positive() {
        let rate = 48_000.0;
        let s = SampledSignal::mono(tone(3000.0, rate, 48_000), rate).unwrap();
        let spec = stft_magnitude(&s, 2048, 512).unwrap();
        let out = spr(&spec, &SprConfig::default()).unwrap();
        assert!(out.segment_db >= 30.0, "{}", out.segment_db);
        assert!(out.values.iter().all(|v| v.is_finite() && *v >= 30.0));
    }

    #[test]
    fn silence_is_finite() {
        let s = SampledSignal::mono(vec![0.0; 4096], 48_000.0).unwrap();
        let out = spr(&stft_magnitude(&s, 2048, 512).unwrap(), &SprConfig::default()).unwrap();
        assert!(out.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn band_without_bins_rejected() {
        let s = SampledSignal::mono(vec![0.0; 2048], 48_000.0).unwrap();
        let spec = stft_magnitude(&s, 2048, 512).unwrap();
        let cfg = SprConfig { low_band_hz: [500.0, 510.0], ..SprConfig::default() };
        assert!(matches!(spr(&spec, &cfg), Err(Error::EmptyBand { .. })));
        let cfg = SprConfig { high_band_hz: [2000.0, 30_000.0], ..SprConfig::default() };
        assert!(matches!(spr(&spec, &cfg), Err(Error::BandOutsideNyquist { .. })));
    }
}
