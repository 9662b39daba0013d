//! Versioned JSON session manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::schedule::PitchEvent;
use crate::error::DatasetError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkillLevel {
    Novice,
    Experienced,
    Professional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Emg,
    Ultrasound,
    Audio,
}

impl Modality {
    pub fn name(self) -> &'static str {
        match self {
            Modality::Emg => "emg",
            Modality::Ultrasound => "ultrasound",
            Modality::Audio => "audio",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModalityFiles {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emg: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio: Option<PathBuf>,
    /// Landmark annotations derived from the ultrasound video.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landmarks: Option<PathBuf>,
}

/// How the session's MVC calibration is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CalibrationSpec {
    Values { mvc_amplitude: f64, baseline_noise: f64 },
    Recording { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionManifest {
    pub schema_version: u32,
    pub participant_id: String,
    #[serde(default)]
    pub session_id: Option<String>,
    pub skill_level: SkillLevel,
    #[serde(default)]
    pub gender: Option<String>,
    #[serde(default)]
    pub voice_type: Option<String>,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub order: Option<String>,
    pub modalities: Vec<Modality>,
    #[serde(default)]
    pub emg_rate_hz: Option<f64>,
    #[serde(default)]
    pub audio_rate_hz: Option<f64>,
    #[serde(default)]
    pub video_fps: Option<f64>,
    #[serde(default)]
    pub pitch_events: Vec<PitchEvent>,
    pub files: ModalityFiles,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSpec>,
}

impl SessionManifest {
    pub fn has(&self, m: Modality) -> bool {
        self.modalities.contains(&m)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, DatasetError> {
        let invalid = |reason: String| DatasetError::InvalidManifest { path: path.to_path_buf(), reason };
        let manifest: SessionManifest = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        manifest.validate().map_err(invalid)?;
        Ok(manifest)
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n").map_err(|e| DatasetError::io(path, e))
    }

    fn validate(&self) -> Result<(), String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.participant_id.is_empty() {
            return Err("participant_id is empty".into());
        }
        let positive = |v: Option<f64>| v.is_none_or(|r| r.is_finite() && r > 0.0);
        if !positive(self.emg_rate_hz) || !positive(self.audio_rate_hz) || !positive(self.video_fps) {
            return Err("rates must be positive".into());
        }
        for m in &self.modalities {
            let (file, rate) = match m {
                Modality::Emg => (&self.files.emg, self.emg_rate_hz),
                Modality::Audio => (&self.files.audio, self.audio_rate_hz),
                Modality::Ultrasound => (&self.files.landmarks, self.video_fps),
            };
            if file.is_none() {
                return Err(format!("modality {} declared without a file", m.name()));
            }
            if rate.is_none() {
                return Err(format!("modality {} declared without a rate", m.name()));
            }
        }
        for e in &self.pitch_events {
            if !(e.start_s < e.end_s) {
                return Err(format!("pitch event {} has start >= end", e.label));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "participant_id": "P01",
        "skill_level": "novice",
        "modalities": ["emg"],
        "emg_rate_hz": 2000,
        "pitch_events": [{"pitch": "C4", "start_s": 0.0, "end_s": 2.0}],
        "files": {"emg": "emg.csv"}
    }"#;

    #[test]
    fn parses_minimal() {
        let m = SessionManifest::from_json(MINIMAL, Path::new("m.json")).unwrap();
        assert_eq!(m.pitch_events[0].label.midi(), 60);
        assert!(m.has(Modality::Emg));
        assert!(!m.has(Modality::Audio));
    }

    #[test]
    fn rejects_wrong_version_and_missing_file() {
        let v2 = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(SessionManifest::from_json(&v2, Path::new("m.json")).is_err());
        let no_file = MINIMAL.replace("\"files\": {\"emg\": \"emg.csv\"}", "\"files\": {}");
        assert!(SessionManifest::from_json(&no_file, Path::new("m.json")).is_err());
        let bad_pitch = MINIMAL.replace("\"C4\"", "\"Q4\"");
        assert!(SessionManifest::from_json(&bad_pitch, Path::new("m.json")).is_err());
    }

    #[test]
    fn calibration_variants() {
        let v: CalibrationSpec = serde_json::from_str(r#"{"mvc_amplitude": 1.0, "baseline_noise": 0.1}"#).unwrap();
        assert!(matches!(v, CalibrationSpec::Values { .. }));
        let r: CalibrationSpec = serde_json::from_str(r#"{"file": "mvc.csv"}"#).unwrap();
        assert!(matches!(r, CalibrationSpec::Recording { .. }));
    }
}
