//! Session files, pitch notation, scale schedules and feature export.

pub mod emg_csv;
pub mod features;
pub mod landmarks;
pub mod manifest;
pub mod pitch;
pub mod schedule;
pub mod segment;
pub mod session;
pub mod wav;

pub use features::{export_features, import_features, FeatureKey, FeatureTable, Metric, Phase, RowMeta};
pub use manifest::{CalibrationSpec, Modality, ModalityFiles, SessionManifest, SkillLevel};
pub use pitch::{format_spn, parse_spn, PitchLabel};
pub use schedule::{scale_schedule, EventSource, PitchEvent, ScaleSchedule};
pub use segment::{segment_by_pitch, PitchSegment, Segmentation};
pub use session::{load_session, Session};
