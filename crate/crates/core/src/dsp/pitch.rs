//! Normalized-autocorrelation fundamental frequency estimation.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    /// Minimum normalized autocorrelation peak for a voiced decision.
    pub confidence_threshold: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self { f_min: 60.0, f_max: 1500.0, confidence_threshold: 0.3 }
    }
}

/// Estimate f0 of the first channel, or `None` when the frame is unvoiced,
/// too short (< 2 periods of `f_min`), or the peak is below threshold.
pub fn estimate_f0(frame: &SampledSignal, config: &PitchConfig) -> Option<f64> {
    let x = frame.channel(0);
    let rate = frame.rate_hz();
    let max_lag = (rate / config.f_min).ceil() as usize;
    let min_lag = ((rate / config.f_max).floor() as usize).max(1);
    if x.len() < 2 * max_lag || min_lag + 2 > max_lag {
        return None;
    }
    let r = normalized_autocorrelation(x, max_lag + 1);

    let lo = min_lag.max(1);
    let hi = max_lag.min(r.len() - 2);
    let peaks: Vec<usize> = (lo..=hi).filter(|&k| r[k] > 0.0 && r[k] > r[k - 1] && r[k] >= r[k + 1]).collect();
    let best = peaks.iter().map(|&k| r[k]).fold(f64::NEG_INFINITY, f64::max);
    if !(best >= config.confidence_threshold) {
        return None;
    }
    // first peak close to the best avoids subharmonic picks
    let lag = *peaks.iter().find(|&&k| r[k] >= 0.9 * best)?;

    let (a, b, c) = (r[lag - 1], r[lag], r[lag + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > f64::EPSILON { 0.5 * (a - c) / denom } else { 0.0 };
    let f0 = rate / (lag as f64 + shift.clamp(-0.5, 0.5));
    (config.f_min..=config.f_max).contains(&f0).then_some(f0)
}

/// `r[τ] = Σ x[t]x[t+τ] / sqrt(Σ x[t]² · Σ x[t+τ]²)` over the overlap, for
/// `τ < lags`. Zero-energy overlaps yield 0.
pub fn normalized_autocorrelation(x: &[f64], lags: usize) -> Vec<f64> {
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / size as f64;

    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in x {
        prefix.push(prefix.last().unwrap() + v * v);
    }
    let total = prefix[n];
    (0..lags.min(n))
        .map(|tau| {
            let head = prefix[n - tau];
            let tail = total - prefix[tau];
            let denom = (head * tail).sqrt();
            if denom <= 1e-300 {
                0.0
            } else {
                (buf[tau].re * scale / denom).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

/// Pitch deviation in cents.
pub fn cents(f: f64, reference_hz: f64) -> f64 {
    1200.0 * (f / reference_hz).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn frame(x: Vec<f64>, rate: f64) -> SampledSignal {
        SampledSignal::mono(x, rate).unwrap()
    }

    #[test]
    fn a440_sine() {
        let rate = 48_000.0;
        let x = (0..4096).map(|i| (2.0 * PI * 440.0 * i as f64 / rate).sin()).collect();
        let f0 = estimate_f0(&frame(x, rate), &PitchConfig::default()).unwrap();
        assert!((f0 - 440.0).abs() < 1.0, "{f0}");
    }

    #[test]
    fn harmonic_rich_tone_keeps_fundamental() {
        let rate = 48_000.0;
        let f = 196.0;
        let x = (0..4096)
            .map(|i| {
                let t = i as f64 / rate;
                (1..=6).map(|h| (2.0 * PI * f * h as f64 * t).sin() / h as f64).sum()
            })
            .collect();
        let f0 = estimate_f0(&frame(x, rate), &PitchConfig::default()).unwrap();
        assert!((f0 - f).abs() < 1.0, "{f0}");
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x = (0..4096).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert_eq!(estimate_f0(&frame(x, 48_000.0), &PitchConfig::default()), None);
    }

    #[test]
    fn silence_is_unvoiced() {
        assert_eq!(estimate_f0(&frame(vec![0.0; 4096], 48_000.0), &PitchConfig::default()), None);
    }

    #[test]
    fn too_short_is_unvoiced() {
        let rate = 48_000.0;
        let x = (0..512).map(|i| (2.0 * PI * 440.0 * i as f64 / rate).sin()).collect();
        assert_eq!(estimate_f0(&frame(x, rate), &PitchConfig::default()), None);
    }

    #[test]
    fn cents_at_target_is_zero() {
        assert!(cents(261.6255653005986, 261.6255653005986).abs() < 1e-12);
        assert!((cents(880.0, 440.0) - 1200.0).abs() < 1e-9);
    }
}
