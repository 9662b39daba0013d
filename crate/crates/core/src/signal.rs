use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled multi-channel time series.
///
/// Samples are stored per channel; every channel has the same length.
/// `origin_s` is the time of the first sample on the owning clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    channels: Vec<Vec<f64>>,
    rate_hz: f64,
    origin_s: f64,
}

impl SampledSignal {
    pub fn new(channels: Vec<Vec<f64>>, rate_hz: f64, origin_s: f64) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidSignal(format!("rate_hz must be positive, got {rate_hz}")));
        }
        if channels.is_empty() {
            return Err(Error::InvalidSignal("at least one channel is required".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidSignal("channels have unequal lengths".into()));
        }
        if !origin_s.is_finite() {
            return Err(Error::InvalidSignal("origin_s must be finite".into()));
        }
        Ok(Self { channels, rate_hz, origin_s })
    }

    pub fn mono(samples: Vec<f64>, rate_hz: f64) -> Result<Self> {
        Self::new(vec![samples], rate_hz, 0.0)
    }

    pub fn with_origin(mut self, origin_s: f64) -> Self {
        self.origin_s = origin_s;
        self
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn origin_s(&self) -> f64 {
        self.origin_s
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Number of samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.rate_hz
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// The only channel of a mono signal.
    pub fn single_channel(&self) -> Result<&[f64]> {
        if self.channels.len() != 1 {
            return Err(Error::MultiChannel(self.channels.len()));
        }
        Ok(&self.channels[0])
    }

    pub fn split_channels(&self) -> Vec<SampledSignal> {
        self.channels
            .iter()
            .map(|c| SampledSignal { channels: vec![c.clone()], rate_hz: self.rate_hz, origin_s: self.origin_s })
            .collect()
    }

    /// Samples `[start, end)` of every channel; `origin_s` shifts accordingly.
    pub fn slice(&self, start: usize, end: usize) -> SampledSignal {
        let end = end.min(self.len());
        let start = start.min(end);
        SampledSignal {
            channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(),
            rate_hz: self.rate_hz,
            origin_s: self.origin_s + start as f64 / self.rate_hz,
        }
    }

    /// Append another signal with matching rate and channel count.
    pub fn append(&mut self, other: &SampledSignal) -> Result<()> {
        if other.rate_hz != self.rate_hz {
            return Err(Error::InvalidSignal(format!(
                "rate mismatch on append: {} vs {}",
                self.rate_hz, other.rate_hz
            )));
        }
        if other.channel_count() != self.channel_count() {
            return Err(Error::InvalidSignal(format!(
                "channel count mismatch on append: {} vs {}",
                self.channel_count(),
                other.channel_count()
            )));
        }
        for (dst, src) in self.channels.iter_mut().zip(&other.channels) {
            dst.extend_from_slice(src);
        }
        Ok(())
    }

    pub fn map_samples(&self, f: impl Fn(f64) -> f64) -> SampledSignal {
        SampledSignal {
            channels: self.channels.iter().map(|c| c.iter().map(|&x| f(x)).collect()).collect(),
            rate_hz: self.rate_hz,
            origin_s: self.origin_s,
        }
    }

    /// Average all channels into one.
    pub fn mixdown(&self) -> SampledSignal {
        if self.channels.len() == 1 {
            return self.clone();
        }
        let n = self.channels.len() as f64;
        let mixed = (0..self.len())
            .map(|i| self.channels.iter().map(|c| c[i]).sum::<f64>() / n)
            .collect();
        SampledSignal { channels: vec![mixed], rate_hz: self.rate_hz, origin_s: self.origin_s }
    }

    /// Convert a duration in milliseconds to a whole number of samples.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.rate_hz)
    }
}

pub fn ms_to_samples(ms: f64, rate_hz: f64) -> usize {
    (ms * rate_hz / 1000.0).round() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        let err = SampledSignal::new(vec![vec![0.0; 3], vec![0.0; 2]], 100.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidSignal(_)));
    }

    #[test]
    fn rejects_nonpositive_rate() {
        assert!(SampledSignal::mono(vec![0.0], 0.0).is_err());
        assert!(SampledSignal::mono(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn slice_shifts_origin() {
        let s = SampledSignal::mono((0..10).map(f64::from).collect(), 10.0).unwrap();
        let part = s.slice(5, 8);
        assert_eq!(part.channel(0), &[5.0, 6.0, 7.0]);
        assert!((part.origin_s() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ten_ms_at_2000_hz_is_twenty_samples() {
        assert_eq!(ms_to_samples(10.0, 2000.0), 20);
    }
}
