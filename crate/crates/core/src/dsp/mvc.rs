//! Maximum-voluntary-contraction calibration and amplitude normalization.

use serde::{Deserialize, Serialize};

use crate::dsp::filter::moving_average_samples;
use crate::dsp::rms::RmsSeries;
use crate::error::{Error, Result};
use crate::signal::{ms_to_samples, SampledSignal};

/// Calibration protocol: repeated sustained vowels at maximal comfortable
/// intensity, separated by rests, inside a fixed window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvcProtocol {
    pub window_s: f64,
    pub sustain_s: f64,
    pub rest_s: f64,
    /// Moving-average span used to smooth the rectified signal.
    pub smoothing_ms: f64,
    /// Rest threshold as a fraction of the running maximum.
    pub rest_fraction: f64,
}

impl Default for MvcProtocol {
    fn default() -> Self {
        Self { window_s: 35.0, sustain_s: 3.0, rest_s: 5.0, smoothing_ms: 200.0, rest_fraction: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvcCalibration {
    pub mvc_amplitude: f64,
    pub baseline_noise: f64,
    pub window_s: f64,
    pub sustain_s: f64,
    pub rest_s: f64,
    /// False when no rest interval was found and the baseline fell back to
    /// the 5th percentile of the envelope.
    pub rest_detected: bool,
}

impl MvcCalibration {
    /// Calibration with explicit values and the default protocol timings.
    pub fn from_values(mvc_amplitude: f64, baseline_noise: f64) -> Result<Self> {
        let p = MvcProtocol::default();
        let cal = Self {
            mvc_amplitude,
            baseline_noise,
            window_s: p.window_s,
            sustain_s: p.sustain_s,
            rest_s: p.rest_s,
            rest_detected: true,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mvc_amplitude.is_finite()
            && self.baseline_noise.is_finite()
            && self.baseline_noise >= 0.0
            && self.mvc_amplitude > self.baseline_noise)
        {
            return Err(Error::DegenerateCalibration { mvc: self.mvc_amplitude, baseline: self.baseline_noise });
        }
        Ok(())
    }

    /// Affine map sending the baseline to 0 and the MVC to 1, clamped below at 0.
    pub fn normalize(&self, value: f64) -> f64 {
        ((value - self.baseline_noise) / (self.mvc_amplitude - self.baseline_noise)).max(0.0)
    }
}

/// Rectified, channel-averaged, moving-average envelope.
pub fn rectified_envelope(signal: &SampledSignal, smoothing_ms: f64) -> Result<Vec<f64>> {
    let rectified = signal.map_samples(f64::abs).mixdown();
    let window = ms_to_samples(smoothing_ms, signal.rate_hz()).max(1);
    moving_average_samples(rectified.channel(0), window.min(rectified.len()))
}

/// Derive MVC amplitude and baseline noise from a calibration recording.
///
/// Only the first `protocol.window_s` seconds are used. Rest intervals are runs
/// where the envelope stays below `rest_fraction` of its running maximum for at
/// least half of `rest_s`.
pub fn mvc_from_calibration(signal: &SampledSignal, protocol: &MvcProtocol) -> Result<MvcCalibration> {
    if signal.is_empty() {
        return Err(Error::EmptySignal);
    }
    let needed = (protocol.window_s * signal.rate_hz()).round() as usize;
    if signal.len() < needed {
        return Err(Error::InvalidSignal(format!(
            "calibration recording lasts {:.3} s, protocol window is {} s",
            signal.duration_s(),
            protocol.window_s
        )));
    }
    let window = signal.slice(0, needed.max(1));
    let envelope = rectified_envelope(&window, protocol.smoothing_ms)?;

    let mvc_amplitude = envelope.iter().copied().fold(0.0_f64, f64::max);

    let min_rest = ((protocol.rest_s * 0.5) * signal.rate_hz()).round() as usize;
    let mut rest_samples = Vec::new();
    let mut run: Vec<f64> = Vec::new();
    let mut running_max = 0.0_f64;
    for &v in &envelope {
        running_max = running_max.max(v);
        if running_max > 0.0 && v < protocol.rest_fraction * running_max {
            run.push(v);
        } else {
            if run.len() >= min_rest.max(1) {
                rest_samples.append(&mut run);
            }
            run.clear();
        }
    }
    if run.len() >= min_rest.max(1) {
        rest_samples.append(&mut run);
    }

    let rest_detected = !rest_samples.is_empty();
    let baseline_noise = if rest_detected { median(&mut rest_samples) } else { percentile(&envelope, 5.0) };

    if mvc_amplitude <= baseline_noise || mvc_amplitude == 0.0 {
        return Err(Error::NoContraction);
    }
    Ok(MvcCalibration {
        mvc_amplitude,
        baseline_noise,
        window_s: protocol.window_s,
        sustain_s: protocol.sustain_s,
        rest_s: protocol.rest_s,
        rest_detected,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Linear-interpolated percentile, `q` in [0, 100].
pub(crate) fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Express an RMS series as a fraction of the calibrated contraction range.
pub fn normalize_mvc(series: &RmsSeries, cal: &MvcCalibration) -> Result<RmsSeries> {
    cal.validate()?;
    let map = |v: &Vec<f64>| v.iter().map(|&x| cal.normalize(x)).collect::<Vec<_>>();
    Ok(RmsSeries {
        values: map(&series.values),
        per_channel: series.per_channel.iter().map(map).collect(),
        normalized: true,
        ..series.clone()
    })
}
