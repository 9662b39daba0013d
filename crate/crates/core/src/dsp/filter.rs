//! Time-domain smoothing and zero-phase band-pass filtering.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// Centered moving mean with reflected boundary padding.
///
/// A window of `w` samples spans offsets `-(w/2) ..= w - 1 - w/2` around each
/// output sample. Reflection mirrors about the edge sample without repeating it.
pub fn moving_average(signal: &SampledSignal, window_ms: f64) -> Result<SampledSignal> {
    if !(window_ms.is_finite() && window_ms > 0.0) {
        return Err(Error::InvalidParameter(format!("window_ms must be positive, got {window_ms}")));
    }
    let window = signal.ms_to_samples(window_ms);
    if window == 0 {
        return Err(Error::InvalidParameter(format!(
            "window of {window_ms} ms is shorter than one sample at {} Hz",
            signal.rate_hz()
        )));
    }
    let channels = signal
        .channels()
        .iter()
        .map(|c| moving_average_samples(c, window))
        .collect::<Result<Vec<_>>>()?;
    SampledSignal::new(channels, signal.rate_hz(), signal.origin_s())
}

/// Sample-count form of [`moving_average`].
pub fn moving_average_samples(x: &[f64], window: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least one sample".into()));
    }
    if window > n {
        return Err(Error::WindowExceedsSignal { window, len: n });
    }
    let before = (window / 2) as isize;
    let after = (window - 1 - window / 2) as isize;
    let scale = 1.0 / window as f64;
    let out = (0..n as isize)
        .map(|i| {
            let mut acc = 0.0;
            for j in (i - before)..=(i + after) {
                acc += x[reflect_index(j, n)];
            }
            acc * scale
        })
        .collect();
    Ok(out)
}

fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let period = 2 * (n - 1);
    let mut k = i.rem_euclid(period);
    if k >= n {
        k = period - k;
    }
    k as usize
}

/// Second-order section in transposed direct form II, normalized so `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn lowpass(cutoff_hz: f64, q: f64, rate_hz: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / rate_hz;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b1 = (1.0 - cos) / a0;
        Biquad { b: [b1 / 2.0, b1, b1 / 2.0], a: [-2.0 * cos / a0, (1.0 - alpha) / a0] }
    }

    fn highpass(cutoff_hz: f64, q: f64, rate_hz: f64) -> Self {
        let w0 = 2.0 * PI * cutoff_hz / rate_hz;
        let (sin, cos) = w0.sin_cos();
        let alpha = sin / (2.0 * q);
        let a0 = 1.0 + alpha;
        let b0 = (1.0 + cos) / 2.0 / a0;
        Biquad { b: [b0, -2.0 * b0, b0], a: [-2.0 * cos / a0, (1.0 - alpha) / a0] }
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Magnitude response at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64, rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / rate_hz;
        let z1 = num_complex(w, 1.0);
        let z2 = num_complex(w, 2.0);
        let num = (self.b[0] + self.b[1] * z1.0 + self.b[2] * z2.0, self.b[1] * z1.1 + self.b[2] * z2.1);
        let den = (1.0 + self.a[0] * z1.0 + self.a[1] * z2.0, self.a[0] * z1.1 + self.a[1] * z2.1);
        (num.0.hypot(num.1)) / (den.0.hypot(den.1))
    }
}

// e^{-i k w} as (re, im)
fn num_complex(w: f64, k: f64) -> (f64, f64) {
    ((k * w).cos(), -(k * w).sin())
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    sections: Vec<Biquad>,
}

/// Butterworth band-pass order per edge (high-pass and low-pass each).
pub const BAND_PASS_ORDER: usize = 4;

impl SosFilter {
    /// Butterworth band-pass built as a high-pass at `low_hz` cascaded with a
    /// low-pass at `high_hz`, each of order [`BAND_PASS_ORDER`].
    pub fn butterworth_band_pass(low_hz: f64, high_hz: f64, rate_hz: f64) -> Result<Self> {
        let nyquist = rate_hz / 2.0;
        if !(low_hz > 0.0 && low_hz < high_hz && high_hz < nyquist) {
            return Err(Error::BandOutsideNyquist { low_hz, high_hz, rate_hz });
        }
        let qs = butterworth_qs(BAND_PASS_ORDER);
        let mut sections: Vec<Biquad> = qs.iter().map(|&q| Biquad::highpass(low_hz, q, rate_hz)).collect();
        sections.extend(qs.iter().map(|&q| Biquad::lowpass(high_hz, q, rate_hz)));
        Ok(SosFilter { sections })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Single-pass magnitude response.
    pub fn gain_at(&self, freq_hz: f64, rate_hz: f64) -> f64 {
        self.sections.iter().map(|s| s.gain_at(freq_hz, rate_hz)).product()
    }

    /// Causal filtering with state initialized to the step-response steady
    /// state scaled by `x[0]`.
    fn filter_in_place(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else { return };
        let mut level = first;
        for s in &self.sections {
            let g = s.dc_gain();
            let y_ss = g * level;
            let mut z2 = s.b[2] * level - s.a[1] * y_ss;
            let mut z1 = s.b[1] * level - s.a[0] * y_ss + z2;
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * y + z2;
                z2 = s.b[2] * input - s.a[1] * y;
                *v = y;
            }
            level = y_ss;
        }
    }

    /// Forward-backward filtering with odd-extension padding.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            let mut y = x.to_vec();
            self.filter_in_place(&mut y);
            self.filter_in_place(&mut y);
            return y;
        }
        let pad = (3 * (2 * self.sections.len() + 1)).max(n / 4).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.filter_in_place(&mut ext);
        ext.reverse();
        self.filter_in_place(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }
}

fn butterworth_qs(order: usize) -> Vec<f64> {
    (0..order / 2)
        .map(|k| {
            let theta = PI * (2 * k + 1) as f64 / (2 * order) as f64;
            1.0 / (2.0 * theta.cos())
        })
        .collect()
}

/// Zero-phase Butterworth band-pass applied to every channel.
pub fn band_pass(signal: &SampledSignal, low_hz: f64, high_hz: f64) -> Result<SampledSignal> {
    let filter = SosFilter::butterworth_band_pass(low_hz, high_hz, signal.rate_hz())?;
    let channels = signal.channels().iter().map(|c| filter.filtfilt(c)).collect();
    SampledSignal::new(channels, signal.rate_hz(), signal.origin_s())
}
