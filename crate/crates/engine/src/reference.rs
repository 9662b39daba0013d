//! Expert reference traces on the analysis grid.

use std::path::Path;

use serde::{Deserialize, Serialize};
use vocalis_core::dataset::manifest::Modality;
use vocalis_core::dataset::{PitchEvent, Session};
use vocalis_core::dsp::{MvcCalibration, MvcProtocol};

use crate::error::{EngineError, Result};
use crate::metrics::{grid_metrics, BinMetrics, GridBin, MetricsConfig};

pub const REFERENCE_FORMAT: &str = "vocalis-reference";
pub const REFERENCE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrace {
    pub format: String,
    pub version: u32,
    pub id: String,
    pub participant_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice_type: Option<String>,
    pub grid_ms: f64,
    pub metrics: MetricsConfig,
    pub calibration: MvcCalibration,
    pub schedule: Vec<PitchEvent>,
    pub bins: Vec<GridBin>,
}

impl ReferenceTrace {
    /// Expert values for grid bin `k`; the last bin holds past the end.
    pub fn bin(&self, k: usize) -> Option<&BinMetrics> {
        self.bins.get(k.min(self.bins.len().saturating_sub(1))).map(|b| &b.metrics)
    }

    pub fn duration_s(&self) -> f64 {
        self.bins.len() as f64 * self.grid_ms / 1000.0
    }

    pub fn read(path: &Path) -> Result<Self> {
        let trace: Self = serde_json::from_slice(&std::fs::read(path)?)?;
        if trace.format != REFERENCE_FORMAT || trace.version != REFERENCE_VERSION {
            return Err(EngineError::InvalidConfig(format!(
                "{} is not a {REFERENCE_FORMAT} v{REFERENCE_VERSION} document",
                path.display()
            )));
        }
        Ok(trace)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

/// Batch metrics of a recorded session, on the same grid and with the same
/// per-bin computation as a live session.
pub fn build_reference(session: &Session, cfg: &MetricsConfig, protocol: &MvcProtocol) -> Result<ReferenceTrace> {
    let manifest = session.manifest();
    let mut missing = Vec::new();
    for m in [Modality::Emg, Modality::Audio] {
        if !manifest.has(m) {
            missing.push(m.name().to_string());
        }
    }
    if manifest.pitch_events.is_empty() {
        missing.push("pitch events".to_string());
    }
    if !missing.is_empty() {
        return Err(EngineError::MissingModality(missing));
    }

    let calibration = session.calibration_or_self(protocol)?;
    let bins = grid_metrics(Some(session.emg()?), Some(session.audio()?), Some(&calibration), cfg)?;
    let id = match &manifest.session_id {
        Some(s) => format!("{}-{s}", manifest.participant_id),
        None => manifest.participant_id.clone(),
    };
    Ok(ReferenceTrace {
        format: REFERENCE_FORMAT.into(),
        version: REFERENCE_VERSION,
        id,
        participant_id: manifest.participant_id.clone(),
        session_id: manifest.session_id.clone(),
        gender: manifest.gender.clone(),
        voice_type: manifest.voice_type.clone(),
        grid_ms: cfg.grid_ms,
        metrics: *cfg,
        calibration,
        schedule: manifest.pitch_events.clone(),
        bins,
    })
}

/// Load every `*.json` reference in a directory, sorted by id.
pub fn load_library(dir: &Path) -> Result<Vec<ReferenceTrace>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            out.push(ReferenceTrace::read(&path)?);
        }
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}
