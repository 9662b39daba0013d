//! Synthetic recordings with known properties, for fixtures and demos.
//!
//! EMG is modelled as random-sign noise scaled by an activation level, so the
//! rectified amplitude equals the level exactly. Voice is a harmonic tone at
//! the scheduled pitch with adjustable energy in the 2–4 kHz band.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::emg_csv::write_emg_csv;
use crate::dataset::landmarks::write_landmarks;
use crate::dataset::manifest::{CalibrationSpec, Modality, ModalityFiles, SessionManifest, SkillLevel, SCHEMA_VERSION};
use crate::dataset::pitch::PitchLabel;
use crate::dataset::schedule::{event_at, scale_schedule, PitchEvent, DEFAULT_BPM};
use crate::dataset::wav::{write_wav, WavEncoding};
use crate::error::DatasetError;
use crate::geometry::{LandmarkSet, Point};
use crate::signal::SampledSignal;

/// Random-sign bursts of the given amplitudes, each `sustain_s` long and
/// followed by `rest_s` of silence, padded with silence to `total_s`.
pub fn calibration_bursts(rate_hz: f64, amplitudes: &[f64], sustain_s: f64, rest_s: f64, total_s: f64, seed: u64) -> SampledSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = (total_s * rate_hz).round() as usize;
    let mut x = vec![0.0; n];
    for (i, &amp) in amplitudes.iter().enumerate() {
        let start = ((rest_s + i as f64 * (sustain_s + rest_s)) * rate_hz).round() as usize;
        let end = (start + (sustain_s * rate_hz).round() as usize).min(n);
        for v in x.iter_mut().take(end).skip(start) {
            *v = if rng.random_bool(0.5) { amp } else { -amp };
        }
    }
    SampledSignal::mono(x, rate_hz).expect("positive rate")
}

/// Slow co-variation between muscle activation and upper-band voice energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulation {
    Constant,
    /// Activation and ring both follow `1 + depth·sin(2πt/period)`.
    InPhase { period_s: f64, depth: f64 },
    /// Ring follows the inverse of the activation modulation.
    AntiPhase { period_s: f64, depth: f64 },
}

impl Modulation {
    fn factors(self, t: f64) -> (f64, f64) {
        match self {
            Modulation::Constant => (1.0, 1.0),
            Modulation::InPhase { period_s, depth } => {
                let m = 1.0 + depth * (2.0 * PI * t / period_s).sin();
                (m, m)
            }
            Modulation::AntiPhase { period_s, depth } => {
                let s = depth * (2.0 * PI * t / period_s).sin();
                (1.0 + s, 1.0 - s)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub participant_id: String,
    pub session_id: Option<String>,
    pub skill_level: SkillLevel,
    pub gender: Option<String>,
    pub emg_rate_hz: u32,
    pub emg_channels: usize,
    pub audio_rate_hz: u32,
    pub low: PitchLabel,
    pub high: PitchLabel,
    pub hold_s: f64,
    /// Extra time appended after the last pitch event.
    pub tail_s: f64,
    /// Activation level while a pitch is held.
    pub emg_level: f64,
    /// Activation level between and after pitch events.
    pub emg_rest_level: f64,
    pub voice_amplitude: f64,
    /// Gain applied to harmonics falling in 2–4 kHz.
    pub ring_gain: f64,
    pub modulation: Modulation,
    pub with_landmarks: bool,
    pub calibration: Option<(f64, f64)>,
    pub seed: u64,
}

impl SyntheticSession {
    pub fn new(participant_id: &str, low: PitchLabel, high: PitchLabel) -> Self {
        Self {
            participant_id: participant_id.to_string(),
            session_id: None,
            skill_level: SkillLevel::Professional,
            gender: None,
            emg_rate_hz: 2000,
            emg_channels: 2,
            audio_rate_hz: 48_000,
            low,
            high,
            hold_s: 2.0,
            tail_s: 0.0,
            emg_level: 0.5,
            emg_rest_level: 0.0,
            voice_amplitude: 0.3,
            ring_gain: 1.0,
            modulation: Modulation::Constant,
            with_landmarks: true,
            calibration: Some((1.0, 0.0)),
            seed: 1,
        }
    }

    pub fn schedule(&self) -> Vec<PitchEvent> {
        scale_schedule(&self.low, &self.high, DEFAULT_BPM, self.hold_s, true)
            .expect("white-key range")
            .events
    }

    pub fn duration_s(&self) -> f64 {
        self.schedule().last().map_or(0.0, |e| e.end_s) + self.tail_s
    }

    /// Activation level at time `t`, before modulation.
    fn activation(&self, events: &[PitchEvent], t: f64) -> f64 {
        if event_at(events, t).is_some() {
            self.emg_level
        } else {
            self.emg_rest_level
        }
    }

    pub fn emg(&self) -> SampledSignal {
        let events = self.schedule();
        let rate = self.emg_rate_hz as f64;
        let n = (self.duration_s() * rate).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let channels = (0..self.emg_channels)
            .map(|c| {
                let gain = 1.0 - 0.1 * c as f64;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / rate;
                        let (m, _) = self.modulation.factors(t);
                        let level = self.activation(&events, t) * m * gain;
                        if rng.random_bool(0.5) {
                            level
                        } else {
                            -level
                        }
                    })
                    .collect()
            })
            .collect();
        SampledSignal::new(channels, rate, 0.0).expect("valid synthetic EMG")
    }

    pub fn audio(&self) -> SampledSignal {
        let events = self.schedule();
        let rate = self.audio_rate_hz as f64;
        let n = (self.duration_s() * rate).round() as usize;
        let nyquist = rate / 2.0;
        let mut phases = vec![0.0_f64; 64];
        let mut x = Vec::with_capacity(n);
        for i in 0..n {
            let t = i as f64 / rate;
            let Some(event) = event_at(&events, t) else {
                x.push(0.0);
                continue;
            };
            let f0 = event.label.freq_hz();
            let (_, ring) = self.modulation.factors(t);
            let mut v = 0.0;
            let mut norm = 0.0;
            for (h, phase) in phases.iter_mut().enumerate() {
                let k = (h + 1) as f64;
                let f = k * f0;
                if f >= nyquist * 0.9 {
                    break;
                }
                *phase = (*phase + 2.0 * PI * f / rate) % (2.0 * PI);
                let mut w = 1.0 / k;
                if (2000.0..=4000.0).contains(&f) {
                    w *= self.ring_gain * ring;
                }
                norm += 1.0 / k;
                v += w * phase.sin();
            }
            x.push(self.voice_amplitude * v / norm.max(1.0));
        }
        SampledSignal::mono(x, rate).expect("valid synthetic audio")
    }

    /// Five annotated frames per pitch; cord length grows with pitch.
    pub fn landmarks(&self) -> Vec<LandmarkSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0xA5A5);
        let mut out = Vec::new();
        for event in self.schedule() {
            let base = 80.0 + 0.8 * (event.label.midi() - 40) as f64;
            for k in 0..5 {
                let t = event.start_s + (k as f64 + 0.5) * event.duration_s() / 5.0;
                let len = base + rng.random_range(-1.0..1.0);
                let half_gap = 6.0;
                out.push(LandmarkSet {
                    vs: Point::new(200.0, 120.0),
                    vl1: Point::new(200.0 - half_gap - 2.0, 120.0 + len),
                    vl2: Point::new(200.0 - half_gap + 2.0, 120.0 + len),
                    vr1: Point::new(200.0 + half_gap - 2.0, 120.0 + len),
                    vr2: Point::new(200.0 + half_gap + 2.0, 120.0 + len),
                    frame_index: (t * 30.0).round() as u64,
                    pitch: Some(event.label.spn().to_string()),
                    calibration_mm_per_px: None,
                });
            }
        }
        out
    }

    /// Write `manifest.json`, `emg.csv`, `audio.wav` and optionally
    /// `landmarks.ndjson` into `dir`; returns the manifest path.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, DatasetError> {
        std::fs::create_dir_all(dir).map_err(|e| DatasetError::Io { path: dir.to_path_buf(), source: e })?;
        write_emg_csv(&dir.join("emg.csv"), &self.emg())?;
        write_wav(&dir.join("audio.wav"), &self.audio(), WavEncoding::Float32)?;
        let mut modalities = vec![Modality::Emg, Modality::Audio];
        let mut files = ModalityFiles {
            emg: Some("emg.csv".into()),
            audio: Some("audio.wav".into()),
            landmarks: None,
        };
        if self.with_landmarks {
            write_landmarks(&dir.join("landmarks.ndjson"), &self.landmarks())?;
            modalities.push(Modality::Ultrasound);
            files.landmarks = Some("landmarks.ndjson".into());
        }
        let manifest = SessionManifest {
            schema_version: SCHEMA_VERSION,
            participant_id: self.participant_id.clone(),
            session_id: self.session_id.clone(),
            skill_level: self.skill_level,
            gender: self.gender.clone(),
            voice_type: None,
            group: None,
            order: None,
            modalities,
            emg_rate_hz: Some(self.emg_rate_hz as f64),
            audio_rate_hz: Some(self.audio_rate_hz as f64),
            video_fps: self.with_landmarks.then_some(30.0),
            pitch_events: self.schedule(),
            files,
            calibration: self
                .calibration
                .map(|(mvc_amplitude, baseline_noise)| CalibrationSpec::Values { mvc_amplitude, baseline_noise }),
        };
        let path = dir.join("manifest.json");
        manifest.write(&path)?;
        Ok(path)
    }
}
