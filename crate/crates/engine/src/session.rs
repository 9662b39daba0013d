//! One learner session: phase machine, incremental metrics and frame ticks.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use vocalis_core::dataset::schedule::event_at;
use vocalis_core::dataset::{PitchEvent, PitchLabel};
use vocalis_core::dsp::{mvc_from_calibration, MvcCalibration, MvcProtocol};
use vocalis_core::signal::ms_to_samples;
use vocalis_core::SampledSignal;

use crate::error::{EngineError, Result};
use crate::frame::{FeedbackFrame, MetricSet};
use crate::metrics::{audio_bin, bin_bounds, bins_done_at, complete_bins, emg_bin, BinMetrics, MetricsConfig, SampleSource};
use crate::reference::ReferenceTrace;

pub const DEFAULT_TICK_HZ: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Idle,
    Calibrating,
    Practicing,
    Review,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Learner-side signals a session expects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub emg_rate_hz: Option<f64>,
    pub audio_rate_hz: Option<f64>,
    pub tick_hz: f64,
    pub metrics: MetricsConfig,
    pub protocol: MvcProtocol,
    /// Learner gender, compared against the reference at practice start.
    pub gender: Option<String>,
}

impl SessionConfig {
    pub fn new(emg_rate_hz: Option<f64>, audio_rate_hz: Option<f64>) -> Self {
        Self {
            emg_rate_hz,
            audio_rate_hz,
            tick_hz: DEFAULT_TICK_HZ,
            metrics: MetricsConfig::default(),
            protocol: MvcProtocol::default(),
            gender: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.metrics.validate()?;
        if !(self.tick_hz.is_finite() && self.tick_hz > 0.0) {
            return Err(EngineError::InvalidConfig(format!("tick rate must be positive, got {}", self.tick_hz)));
        }
        if self.emg_rate_hz.is_none() && self.audio_rate_hz.is_none() {
            return Err(EngineError::InvalidConfig("session needs EMG or audio".into()));
        }
        for rate in [self.emg_rate_hz, self.audio_rate_hz].into_iter().flatten() {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(EngineError::InvalidConfig(format!("sample rate must be positive, got {rate}")));
            }
        }
        if let Some(rate) = self.audio_rate_hz {
            self.metrics.check_audio_rate(rate)?;
        }
        Ok(())
    }
}

/// Signals arriving together; either modality may be absent from a chunk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Chunk {
    pub emg: Option<SampledSignal>,
    pub audio: Option<SampledSignal>,
}

/// Rolling store addressed by absolute sample index.
#[derive(Debug, Clone)]
struct SampleBuffer {
    modality: &'static str,
    rate_hz: f64,
    offset: usize,
    channels: Vec<Vec<f64>>,
}

impl SampleBuffer {
    fn new(modality: &'static str, rate_hz: f64) -> Self {
        Self { modality, rate_hz, offset: 0, channels: Vec::new() }
    }

    fn end(&self) -> usize {
        self.offset + self.channels.first().map_or(0, Vec::len)
    }

    fn push(&mut self, chunk: &SampledSignal) -> Result<()> {
        if chunk.rate_hz() != self.rate_hz {
            return Err(EngineError::RateMismatch { modality: self.modality, expected: self.rate_hz, found: chunk.rate_hz() });
        }
        if !self.channels.is_empty() && chunk.channel_count() != self.channels.len() {
            return Err(EngineError::ChannelMismatch {
                modality: self.modality,
                expected: self.channels.len(),
                found: chunk.channel_count(),
            });
        }
        let expected_s = self.end() as f64 / self.rate_hz;
        let half = 0.5 / self.rate_hz;
        let found_s = chunk.origin_s();
        if found_s < expected_s - half {
            return Err(EngineError::TimeRegression { modality: self.modality, expected_s, found_s });
        }
        if found_s > expected_s + half {
            return Err(EngineError::Discontinuity { modality: self.modality, expected_s, found_s });
        }
        if self.channels.is_empty() {
            self.channels = vec![Vec::new(); chunk.channel_count()];
        }
        for (dst, src) in self.channels.iter_mut().zip(chunk.channels()) {
            dst.extend_from_slice(src);
        }
        Ok(())
    }

    fn discard_before(&mut self, index: usize) {
        if index > self.offset {
            let n = (index - self.offset).min(self.end() - self.offset);
            for c in &mut self.channels {
                c.drain(..n);
            }
            self.offset += n;
        }
    }
}

impl SampleSource for SampleBuffer {
    fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    fn available(&self) -> usize {
        self.end()
    }

    fn window(&self, start: usize, end: usize) -> SampledSignal {
        assert!(start >= self.offset && end <= self.end(), "window outside retained samples");
        let channels = self.channels.iter().map(|c| c[start - self.offset..end - self.offset].to_vec()).collect();
        SampledSignal::new(channels, self.rate_hz, start as f64 / self.rate_hz).expect("validated on push")
    }
}

#[derive(Debug, Clone, Default)]
struct PitchAccumulator {
    frames: usize,
    learner_stability: f64,
    expert_stability: f64,
    spr_delta: f64,
    rms_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchSummary {
    pub pitch: PitchLabel,
    pub frames: usize,
    pub learner_stability_mean: f64,
    pub expert_stability_mean: f64,
    pub mean_spr_delta: f64,
    pub mean_rms_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub phase: Phase,
    pub frames: usize,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_id: Option<String>,
    pub pitches: Vec<PitchSummary>,
    /// Mean SPR delta over every frame with a target pitch, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_spr_delta: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SessionState {
    phase: Phase,
    clock_s: f64,
    calibration: Option<MvcCalibration>,
    schedule: Vec<PitchEvent>,
    reference: Option<Arc<ReferenceTrace>>,
    config: SessionConfig,
    warnings: Vec<String>,
    calibration_emg: Option<SampleBuffer>,
    emg: Option<SampleBuffer>,
    audio: Option<SampleBuffer>,
    bins: Vec<BinMetrics>,
    ticks: u64,
    per_pitch: BTreeMap<PitchLabel, PitchAccumulator>,
}

impl SessionState {
    pub fn new(config: SessionConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            phase: Phase::Idle,
            clock_s: 0.0,
            calibration: None,
            schedule: Vec::new(),
            reference: None,
            config,
            warnings: Vec::new(),
            calibration_emg: None,
            emg: None,
            audio: None,
            bins: Vec::new(),
            ticks: 0,
            per_pitch: BTreeMap::new(),
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Session time of the data consumed since practice started.
    pub fn clock_s(&self) -> f64 {
        self.clock_s
    }

    pub fn calibration(&self) -> Option<&MvcCalibration> {
        self.calibration.as_ref()
    }

    pub fn schedule(&self) -> &[PitchEvent] {
        &self.schedule
    }

    pub fn reference(&self) -> Option<&ReferenceTrace> {
        self.reference.as_deref()
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Learner metrics of every completed bin since practice started.
    pub fn bins(&self) -> &[BinMetrics] {
        &self.bins
    }

    fn emg_active(&self) -> bool {
        self.config.emg_rate_hz.is_some()
    }

    fn illegal(&self, action: &'static str) -> EngineError {
        EngineError::IllegalTransition { phase: self.phase, action }
    }

    pub fn start_calibration(&mut self) -> Result<()> {
        if self.phase != Phase::Idle {
            return Err(self.illegal("start calibration"));
        }
        self.phase = Phase::Calibrating;
        self.calibration_emg = self.config.emg_rate_hz.map(|r| SampleBuffer::new("emg", r));
        Ok(())
    }

    /// Use known calibration values instead of the recorded calibration task.
    pub fn set_calibration(&mut self, cal: MvcCalibration) -> Result<()> {
        if !matches!(self.phase, Phase::Idle | Phase::Calibrating) {
            return Err(self.illegal("set calibration"));
        }
        cal.validate()?;
        self.calibration = Some(cal);
        Ok(())
    }

    /// Finish calibration and start practice against `reference`. The MVC is
    /// taken from the calibration EMG received so far unless one was set.
    pub fn start_practice(&mut self, reference: Arc<ReferenceTrace>, schedule: Vec<PitchEvent>) -> Result<()> {
        if self.phase != Phase::Calibrating {
            return Err(self.illegal("start practice"));
        }
        if self.emg_active() && self.calibration.is_none() {
            let recorded = self.calibration_emg.as_ref().filter(|b| b.end() > 0).ok_or(EngineError::CalibrationRequired)?;
            let signal = recorded.window(recorded.offset, recorded.end());
            let protocol = MvcProtocol { window_s: self.config.protocol.window_s.min(signal.duration_s()), ..self.config.protocol };
            self.calibration = Some(mvc_from_calibration(&signal, &protocol)?);
        }
        if let (Some(mine), Some(theirs)) = (&self.config.gender, &reference.gender) {
            if !mine.eq_ignore_ascii_case(theirs) {
                self.warnings.push(format!(
                    "reference {} is {theirs} while the learner is {mine}; pitches are not transposed",
                    reference.id
                ));
            }
        }
        self.calibration_emg = None;
        self.emg = self.config.emg_rate_hz.map(|r| SampleBuffer::new("emg", r));
        self.audio = self.config.audio_rate_hz.map(|r| SampleBuffer::new("audio", r));
        self.reference = Some(reference);
        self.schedule = schedule;
        self.clock_s = 0.0;
        self.bins.clear();
        self.ticks = 0;
        self.per_pitch.clear();
        self.phase = Phase::Practicing;
        Ok(())
    }

    /// Practicing → Review, or Review → Idle.
    pub fn end_session(&mut self) -> Result<()> {
        match self.phase {
            Phase::Practicing => {
                self.phase = Phase::Review;
                self.emg = None;
                self.audio = None;
            }
            Phase::Review => {
                self.phase = Phase::Idle;
                self.calibration = None;
                self.reference = None;
                self.schedule.clear();
                self.warnings.clear();
            }
            _ => return Err(self.illegal("end session")),
        }
        Ok(())
    }

    /// Ingest one chunk. During calibration the EMG is stored for the MVC; during
    /// practice new bins are computed and any frames now due are returned.
    pub fn process_chunk(&mut self, chunk: &Chunk) -> Result<Vec<FeedbackFrame>> {
        match self.phase {
            Phase::Calibrating => {
                self.check_modalities(chunk)?;
                if let (Some(buf), Some(emg)) = (self.calibration_emg.as_mut(), &chunk.emg) {
                    buf.push(emg)?;
                }
                Ok(Vec::new())
            }
            Phase::Practicing => {
                self.check_modalities(chunk)?;
                if let (Some(buf), Some(emg)) = (self.emg.as_mut(), &chunk.emg) {
                    buf.push(emg)?;
                }
                if let (Some(buf), Some(audio)) = (self.audio.as_mut(), &chunk.audio) {
                    buf.push(audio)?;
                }
                self.advance()
            }
            phase => Err(EngineError::NotAccepting(phase)),
        }
    }

    fn check_modalities(&self, chunk: &Chunk) -> Result<()> {
        if chunk.emg.is_some() && self.config.emg_rate_hz.is_none() {
            return Err(EngineError::InactiveModality("emg"));
        }
        if chunk.audio.is_some() && self.config.audio_rate_hz.is_none() {
            return Err(EngineError::InactiveModality("audio"));
        }
        for (sig, rate, modality) in [(&chunk.emg, self.config.emg_rate_hz, "emg"), (&chunk.audio, self.config.audio_rate_hz, "audio")] {
            if let (Some(s), Some(r)) = (sig, rate) {
                if s.rate_hz() != r {
                    return Err(EngineError::RateMismatch { modality, expected: r, found: s.rate_hz() });
                }
            }
        }
        Ok(())
    }

    fn buffers(&self) -> impl Iterator<Item = &SampleBuffer> {
        self.emg.iter().chain(self.audio.iter())
    }

    fn advance(&mut self) -> Result<Vec<FeedbackFrame>> {
        let cfg = self.config.metrics;
        let ready = self.buffers().map(|b| complete_bins(b.end(), cfg.grid_ms, b.rate_hz)).min().unwrap_or(0);
        while self.bins.len() < ready {
            let k = self.bins.len();
            let emg = match &self.emg {
                Some(b) => emg_bin(k, b, self.calibration.as_ref(), &cfg)?,
                None => Default::default(),
            };
            let audio = match &self.audio {
                Some(b) => audio_bin(k, b, &cfg)?,
                None => Default::default(),
            };
            self.bins.push(BinMetrics::from_parts(emg, audio));
        }

        self.clock_s = self.buffers().map(|b| b.end() as f64 / b.rate_hz).fold(f64::INFINITY, f64::min);
        let mut frames = Vec::new();
        loop {
            let t = (self.ticks + 1) as f64 / self.config.tick_hz;
            if !self.buffers().all(|b| ms_to_samples(t * 1000.0, b.rate_hz) <= b.end()) {
                break;
            }
            self.ticks += 1;
            frames.push(self.frame_at(t));
        }
        self.trim();
        Ok(frames)
    }

    fn frame_at(&mut self, t: f64) -> FeedbackFrame {
        let done = bins_done_at(t, self.config.metrics.grid_ms).min(self.bins.len());
        let latest = done.checked_sub(1);
        let learner = latest.map(|k| MetricSet::from(&self.bins[k])).unwrap_or_default();
        let expert = match (latest, &self.reference) {
            (Some(k), Some(r)) => r.bin(k).map(MetricSet::from).unwrap_or_default(),
            _ => MetricSet::default(),
        };
        let target = event_at(&self.schedule, t).map(|e| e.label.clone());
        let frame = FeedbackFrame::new(t, target.clone(), learner, expert, self.phase);
        if let (Some(pitch), Some(_)) = (target, latest) {
            let acc = self.per_pitch.entry(pitch).or_default();
            acc.frames += 1;
            acc.learner_stability += frame.learner.stability_window_db;
            acc.expert_stability += frame.expert.stability_window_db;
            acc.spr_delta += frame.deviation.spr_delta;
            acc.rms_delta += frame.deviation.rms_delta;
        }
        frame
    }

    fn trim(&mut self) {
        let cfg = self.config.metrics;
        let next = self.bins.len();
        if let Some(b) = self.emg.as_mut() {
            let keep = bin_bounds(next.saturating_sub(cfg.stability_span_bins - 1), cfg.grid_ms, b.rate_hz).0;
            b.discard_before(keep);
        }
        if let Some(b) = self.audio.as_mut() {
            let (start, end) = bin_bounds(next, cfg.grid_ms, b.rate_hz);
            b.discard_before(start.min(end.saturating_sub(cfg.f0_window)));
        }
    }

    pub fn summary(&self) -> SessionSummary {
        let pitches: Vec<PitchSummary> = self
            .per_pitch
            .iter()
            .map(|(pitch, a)| {
                let n = a.frames as f64;
                PitchSummary {
                    pitch: pitch.clone(),
                    frames: a.frames,
                    learner_stability_mean: a.learner_stability / n,
                    expert_stability_mean: a.expert_stability / n,
                    mean_spr_delta: a.spr_delta / n,
                    mean_rms_delta: a.rms_delta / n,
                }
            })
            .collect();
        let counted: usize = self.per_pitch.values().map(|a| a.frames).sum();
        let mean_spr_delta =
            (counted > 0).then(|| self.per_pitch.values().map(|a| a.spr_delta).sum::<f64>() / counted as f64);
        SessionSummary {
            phase: self.phase,
            frames: self.ticks as usize,
            duration_s: self.ticks as f64 / self.config.tick_hz,
            reference_id: self.reference.as_ref().map(|r| r.id.clone()),
            pitches,
            mean_spr_delta,
            warnings: self.warnings.clone(),
        }
    }
}
