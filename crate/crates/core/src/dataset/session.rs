use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use crate::dataset::emg_csv;
use crate::dataset::landmarks::read_landmarks;
use crate::dataset::manifest::{CalibrationSpec, Modality, SessionManifest};
use crate::dataset::wav;
use crate::dsp::mvc::{mvc_from_calibration, MvcCalibration, MvcProtocol};
use crate::error::DatasetError;
use crate::geometry::LandmarkSet;
use crate::signal::SampledSignal;

/// A validated session whose modality data is read on first access.
///
/// Existence of every referenced file and the rates in file headers are
/// checked when the session is loaded.
#[derive(Debug)]
pub struct Session {
    manifest: SessionManifest,
    manifest_path: PathBuf,
    dir: PathBuf,
    warnings: Vec<String>,
    emg: OnceLock<SampledSignal>,
    audio: OnceLock<SampledSignal>,
    landmarks: OnceLock<Vec<LandmarkSet>>,
}

fn lazy<'a, T>(cell: &'a OnceLock<T>, load: impl FnOnce() -> Result<T, DatasetError>) -> Result<&'a T, DatasetError> {
    if let Some(v) = cell.get() {
        return Ok(v);
    }
    let value = load()?;
    Ok(cell.get_or_init(|| value))
}

pub fn load_session(manifest_path: &Path) -> Result<Session, DatasetError> {
    let manifest = SessionManifest::read(manifest_path)?;
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut warnings = Vec::new();

    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
    let require = |modality: Modality, rel: &Option<PathBuf>| -> Result<PathBuf, DatasetError> {
        let rel = rel.as_ref().ok_or_else(|| DatasetError::ModalityAbsent(modality.name().into()))?;
        let path = resolve(rel);
        if !path.is_file() {
            return Err(DatasetError::MissingModalityFile { modality: modality.name().into(), path });
        }
        Ok(path)
    };

    if manifest.has(Modality::Emg) {
        let path = require(Modality::Emg, &manifest.files.emg)?;
        let header = emg_csv::read_header(&path)?;
        let declared = manifest.emg_rate_hz.unwrap_or_default();
        if header.rate_hz as f64 != declared {
            return Err(DatasetError::RateMismatch { modality: "emg".into(), declared, found: header.rate_hz as f64 });
        }
    }
    if manifest.has(Modality::Audio) {
        let path = require(Modality::Audio, &manifest.files.audio)?;
        let info = wav::read_wav_info(&path)?;
        let declared = manifest.audio_rate_hz.unwrap_or_default();
        if info.rate_hz as f64 != declared {
            return Err(DatasetError::RateMismatch { modality: "audio".into(), declared, found: info.rate_hz as f64 });
        }
        if info.channels > 1 {
            warnings.push(format!("audio has {} channels; mixed down by averaging", info.channels));
        }
    }
    if manifest.has(Modality::Ultrasound) {
        require(Modality::Ultrasound, &manifest.files.landmarks)?;
    }
    if let Some(CalibrationSpec::Recording { file }) = &manifest.calibration {
        let path = resolve(file);
        if !path.is_file() {
            return Err(DatasetError::MissingModalityFile { modality: "calibration".into(), path });
        }
    }

    Ok(Session {
        manifest,
        manifest_path: manifest_path.to_path_buf(),
        dir,
        warnings,
        emg: OnceLock::new(),
        audio: OnceLock::new(),
        landmarks: OnceLock::new(),
    })
}

impl Session {
    pub fn manifest(&self) -> &SessionManifest {
        &self.manifest
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn participant_id(&self) -> &str {
        &self.manifest.participant_id
    }

    fn path_of(&self, rel: &Option<PathBuf>, modality: Modality) -> Result<PathBuf, DatasetError> {
        if !self.manifest.has(modality) {
            return Err(DatasetError::ModalityAbsent(modality.name().into()));
        }
        let rel = rel.as_ref().ok_or_else(|| DatasetError::ModalityAbsent(modality.name().into()))?;
        Ok(if rel.is_absolute() { rel.clone() } else { self.dir.join(rel) })
    }

    pub fn emg(&self) -> Result<&SampledSignal, DatasetError> {
        lazy(&self.emg, || {
            let path = self.path_of(&self.manifest.files.emg, Modality::Emg)?;
            emg_csv::read_emg_csv(&path)
        })
    }

    /// Mono audio; multi-channel files are averaged.
    pub fn audio(&self) -> Result<&SampledSignal, DatasetError> {
        lazy(&self.audio, || {
            let path = self.path_of(&self.manifest.files.audio, Modality::Audio)?;
            Ok(wav::read_wav(&path)?.mixdown())
        })
    }

    pub fn landmarks(&self) -> Result<&[LandmarkSet], DatasetError> {
        lazy(&self.landmarks, || {
            let path = self.path_of(&self.manifest.files.landmarks, Modality::Ultrasound)?;
            read_landmarks(&path)
        })
        .map(Vec::as_slice)
    }

    /// MVC calibration declared in the manifest, if any.
    pub fn calibration(&self, protocol: &MvcProtocol) -> Result<Option<MvcCalibration>, DatasetError> {
        match &self.manifest.calibration {
            None => Ok(None),
            Some(CalibrationSpec::Values { mvc_amplitude, baseline_noise }) => {
                Ok(Some(MvcCalibration::from_values(*mvc_amplitude, *baseline_noise)?))
            }
            Some(CalibrationSpec::Recording { file }) => {
                let path = if file.is_absolute() { file.clone() } else { self.dir.join(file) };
                let signal = emg_csv::read_emg_csv(&path)?;
                Ok(Some(mvc_from_calibration(&signal, protocol)?))
            }
        }
    }

    /// Declared calibration, or one derived from the EMG recording itself
    /// with the protocol window shortened to the recording length.
    pub fn calibration_or_self(&self, protocol: &MvcProtocol) -> Result<MvcCalibration, DatasetError> {
        if let Some(cal) = self.calibration(protocol)? {
            return Ok(cal);
        }
        let emg = self.emg()?;
        let whole = MvcProtocol { window_s: protocol.window_s.min(emg.duration_s()), ..*protocol };
        Ok(mvc_from_calibration(emg, &whole)?)
    }
}
