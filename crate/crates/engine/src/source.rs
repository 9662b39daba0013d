//! Chunk sources: replay of recorded signals, and a framed byte stream for
//! live devices.
//!
//! Wire format of one block, little-endian:
//! `u8 modality (0 = EMG, 1 = audio) | u8 reserved | u16 channels | u32 frames`
//! followed by `frames × channels` interleaved `f64` samples.

use std::io::Read;

use vocalis_core::signal::ms_to_samples;
use vocalis_core::SampledSignal;

use crate::error::{EngineError, Result};
use crate::session::Chunk;

pub trait ChunkSource {
    fn read_chunk(&mut self) -> Option<Result<Chunk>>;
}

/// Cuts recorded signals into consecutive chunks of `chunk_ms`.
pub struct ReplaySource {
    emg: Option<SampledSignal>,
    audio: Option<SampledSignal>,
    chunk_ms: f64,
    index: usize,
}

impl ReplaySource {
    pub fn new(emg: Option<SampledSignal>, audio: Option<SampledSignal>, chunk_ms: f64) -> Self {
        assert!(chunk_ms > 0.0, "chunk length must be positive");
        Self { emg, audio, chunk_ms, index: 0 }
    }

    fn piece(signal: &SampledSignal, k: usize, chunk_ms: f64) -> Option<SampledSignal> {
        let start = ms_to_samples(k as f64 * chunk_ms, signal.rate_hz());
        let end = ms_to_samples((k + 1) as f64 * chunk_ms, signal.rate_hz()).min(signal.len());
        (start < end).then(|| signal.slice(start, end).with_origin(start as f64 / signal.rate_hz()))
    }
}

impl ChunkSource for ReplaySource {
    fn read_chunk(&mut self) -> Option<Result<Chunk>> {
        let k = self.index;
        let chunk = Chunk {
            emg: self.emg.as_ref().and_then(|s| Self::piece(s, k, self.chunk_ms)),
            audio: self.audio.as_ref().and_then(|s| Self::piece(s, k, self.chunk_ms)),
        };
        if chunk.emg.is_none() && chunk.audio.is_none() {
            return None;
        }
        self.index += 1;
        Some(Ok(chunk))
    }
}

impl Iterator for ReplaySource {
    type Item = Result<Chunk>;

    fn next(&mut self) -> Option<Self::Item> {
        self.read_chunk()
    }
}

const HEADER_LEN: usize = 8;

/// Encode one modality's samples as a wire block.
pub fn encode_block(modality: WireModality, signal: &SampledSignal) -> Vec<u8> {
    let channels = signal.channel_count();
    let frames = signal.len();
    let mut out = Vec::with_capacity(HEADER_LEN + frames * channels * 8);
    out.push(modality as u8);
    out.push(0);
    out.extend_from_slice(&(channels as u16).to_le_bytes());
    out.extend_from_slice(&(frames as u32).to_le_bytes());
    for i in 0..frames {
        for c in 0..channels {
            out.extend_from_slice(&signal.channel(c)[i].to_le_bytes());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum WireModality {
    Emg = 0,
    Audio = 1,
}

/// Turns wire blocks into time-stamped chunks. The sender never transmits
/// time; each block continues where the previous block of its modality ended.
#[derive(Debug, Clone)]
pub struct BlockDecoder {
    emg_rate_hz: Option<f64>,
    audio_rate_hz: Option<f64>,
    emg_samples: usize,
    audio_samples: usize,
}

impl BlockDecoder {
    pub fn new(emg_rate_hz: Option<f64>, audio_rate_hz: Option<f64>) -> Self {
        Self { emg_rate_hz, audio_rate_hz, emg_samples: 0, audio_samples: 0 }
    }

    /// Restart the clock, e.g. when practice begins.
    pub fn reset(&mut self) {
        self.emg_samples = 0;
        self.audio_samples = 0;
    }

    pub fn decode(&mut self, block: &[u8]) -> Result<Chunk> {
        if block.len() < HEADER_LEN {
            return Err(EngineError::MalformedChunk(format!("{} bytes is shorter than a header", block.len())));
        }
        let (header, body) = block.split_at(HEADER_LEN);
        let channels = u16::from_le_bytes([header[2], header[3]]) as usize;
        let frames = u32::from_le_bytes([header[4], header[5], header[6], header[7]]) as usize;
        self.decode_body(header[0], channels, frames, body)
    }

    fn decode_body(&mut self, modality: u8, channels: usize, frames: usize, body: &[u8]) -> Result<Chunk> {
        if channels == 0 {
            return Err(EngineError::MalformedChunk("zero channels".into()));
        }
        if body.len() != frames * channels * 8 {
            return Err(EngineError::MalformedChunk(format!(
                "expected {} payload bytes for {frames}×{channels}, got {}",
                frames * channels * 8,
                body.len()
            )));
        }
        let mut data = vec![Vec::with_capacity(frames); channels];
        for (i, bytes) in body.chunks_exact(8).enumerate() {
            data[i % channels].push(f64::from_le_bytes(bytes.try_into().expect("8 bytes")));
        }
        let (rate, counter, name) = match modality {
            0 => (self.emg_rate_hz, &mut self.emg_samples, "emg"),
            1 => (self.audio_rate_hz, &mut self.audio_samples, "audio"),
            m => return Err(EngineError::MalformedChunk(format!("unknown modality tag {m}"))),
        };
        let rate = rate.ok_or(EngineError::InactiveModality(name))?;
        let signal = SampledSignal::new(data, rate, *counter as f64 / rate)?;
        *counter += frames;
        Ok(if modality == 0 { Chunk { emg: Some(signal), audio: None } } else { Chunk { emg: None, audio: Some(signal) } })
    }
}

/// Reads wire blocks from any byte stream.
pub struct ByteStreamSource<R> {
    reader: R,
    decoder: BlockDecoder,
}

impl<R: Read> ByteStreamSource<R> {
    pub fn new(reader: R, emg_rate_hz: Option<f64>, audio_rate_hz: Option<f64>) -> Self {
        Self { reader, decoder: BlockDecoder::new(emg_rate_hz, audio_rate_hz) }
    }

    fn read_block(&mut self) -> Result<Option<Chunk>> {
        let mut header = [0u8; HEADER_LEN];
        let mut got = 0;
        while got < HEADER_LEN {
            let n = self.reader.read(&mut header[got..])?;
            if n == 0 {
                if got == 0 {
                    return Ok(None);
                }
                return Err(EngineError::MalformedChunk("stream ended inside a header".into()));
            }
            got += n;
        }
        let channels = u16::from_le_bytes([header[2], header[3]]) as usize;
        let frames = u32::from_le_bytes([header[4], header[5], header[6], header[7]]) as usize;
        let mut body = vec![0u8; frames * channels * 8];
        self.reader
            .read_exact(&mut body)
            .map_err(|e| EngineError::MalformedChunk(format!("stream ended inside a block: {e}")))?;
        self.decoder.decode_body(header[0], channels, frames, &body).map(Some)
    }
}

impl<R: Read> ChunkSource for ByteStreamSource<R> {
    fn read_chunk(&mut self) -> Option<Result<Chunk>> {
        self.read_block().transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_round_trip() {
        let emg = SampledSignal::new(vec![vec![0.1, -0.2, 0.3], vec![1.0, 2.0, 3.0]], 2000.0, 0.0).unwrap();
        let mut bytes = encode_block(WireModality::Emg, &emg);
        bytes.extend(encode_block(WireModality::Emg, &emg));
        let mut src = ByteStreamSource::new(bytes.as_slice(), Some(2000.0), None);
        let first = src.read_chunk().unwrap().unwrap().emg.unwrap();
        assert_eq!(first, emg);
        let second = src.read_chunk().unwrap().unwrap().emg.unwrap();
        assert_eq!(second.origin_s(), 3.0 / 2000.0);
        assert!(src.read_chunk().is_none());
    }

    #[test]
    fn truncated_and_foreign_blocks_rejected() {
        let emg = SampledSignal::mono(vec![0.5; 4], 2000.0).unwrap();
        let bytes = encode_block(WireModality::Emg, &emg);
        let mut src = ByteStreamSource::new(&bytes[..bytes.len() - 3], Some(2000.0), None);
        assert!(matches!(src.read_chunk(), Some(Err(EngineError::MalformedChunk(_)))));

        let mut dec = BlockDecoder::new(None, Some(48_000.0));
        assert!(matches!(dec.decode(&bytes), Err(EngineError::InactiveModality("emg"))));
        assert!(dec.decode(&[9, 0, 1, 0, 0, 0, 0, 0]).is_err());
    }

    #[test]
    fn replay_covers_whole_signal() {
        let s = SampledSignal::mono((0..1001).map(f64::from).collect(), 1000.0).unwrap();
        let pieces: Vec<SampledSignal> = ReplaySource::new(Some(s.clone()), None, 300.0).map(|c| c.unwrap().emg.unwrap()).collect();
        assert_eq!(pieces.len(), 4);
        assert_eq!(pieces[3].len(), 101);
        assert_eq!(pieces[2].origin_s(), 0.6);
        let joined: Vec<f64> = pieces.iter().flat_map(|p| p.channel(0).to_vec()).collect();
        assert_eq!(joined, s.channel(0));
    }
}
