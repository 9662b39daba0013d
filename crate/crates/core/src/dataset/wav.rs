//! PCM WAV audio (16-bit integer or 32-bit float).

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::DatasetError;
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WavInfo {
    pub rate_hz: u32,
    pub channels: u16,
}

fn malformed(path: &Path, e: impl ToString) -> DatasetError {
    DatasetError::MalformedWav { path: path.to_path_buf(), reason: e.to_string() }
}

pub fn read_wav_info(path: &Path) -> Result<WavInfo, DatasetError> {
    let reader = WavReader::open(path).map_err(|e| malformed(path, e))?;
    let spec = reader.spec();
    check_format(path, spec)?;
    Ok(WavInfo { rate_hz: spec.sample_rate, channels: spec.channels })
}

fn check_format(path: &Path, spec: WavSpec) -> Result<(), DatasetError> {
    match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) | (SampleFormat::Float, 32) => Ok(()),
        (fmt, bits) => Err(malformed(path, format!("unsupported sample format {fmt:?} {bits}-bit"))),
    }
}

/// Decoded audio normalized to [-1, 1]. Multi-channel files are returned as
/// is; callers mix down.
pub fn read_wav(path: &Path) -> Result<SampledSignal, DatasetError> {
    let mut reader = WavReader::open(path).map_err(|e| malformed(path, e))?;
    let spec = reader.spec();
    check_format(path, spec)?;
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(path, e))?,
        SampleFormat::Float => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(path, e))?,
    };
    let n_ch = spec.channels as usize;
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n_ch); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (dst, &v) in channels.iter_mut().zip(frame) {
            dst.push(v);
        }
    }
    Ok(SampledSignal::new(channels, spec.sample_rate as f64, 0.0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Int16,
    Float32,
}

pub fn write_wav(path: &Path, signal: &SampledSignal, encoding: WavEncoding) -> Result<(), DatasetError> {
    let spec = WavSpec {
        channels: signal.channel_count() as u16,
        sample_rate: signal.rate_hz().round() as u32,
        bits_per_sample: match encoding {
            WavEncoding::Int16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Int16 => SampleFormat::Int,
            WavEncoding::Float32 => SampleFormat::Float,
        },
    };
    let mut writer = WavWriter::create(path, spec).map_err(|e| malformed(path, e))?;
    for i in 0..signal.len() {
        for ch in signal.channels() {
            let v = ch[i];
            match encoding {
                WavEncoding::Int16 => writer.write_sample((v.clamp(-1.0, 1.0) * 32767.0).round() as i16),
                WavEncoding::Float32 => writer.write_sample(v as f32),
            }
            .map_err(|e| malformed(path, e))?;
        }
    }
    writer.finalize().map_err(|e| malformed(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let s = SampledSignal::mono(vec![0.0, 0.5, -0.25, 1.0], 48_000.0).unwrap();
        write_wav(&path, &s, WavEncoding::Float32).unwrap();
        assert_eq!(read_wav_info(&path).unwrap(), WavInfo { rate_hz: 48_000, channels: 1 });
        assert_eq!(read_wav(&path).unwrap(), s);
    }

    #[test]
    fn int16_stereo() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.wav");
        let s = SampledSignal::new(vec![vec![0.5, -0.5], vec![0.25, 0.0]], 48_000.0, 0.0).unwrap();
        write_wav(&path, &s, WavEncoding::Int16).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.channel_count(), 2);
        for (a, b) in back.channels().iter().flatten().zip(s.channels().iter().flatten()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn garbage_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.wav");
        std::fs::write(&path, b"not a wav").unwrap();
        assert!(matches!(read_wav(&path), Err(DatasetError::MalformedWav { .. })));
    }
}
