use serde::{Deserialize, Serialize};
use vocalis_core::dataset::PitchLabel;
use vocalis_core::dsp::pitch::cents;

use crate::metrics::BinMetrics;
use crate::session::Phase;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub envelope_mean: f64,
    pub stability_window_db: f64,
    pub rms_norm: f64,
    pub spr_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_hz: Option<f64>,
}

impl From<&BinMetrics> for MetricSet {
    fn from(b: &BinMetrics) -> Self {
        Self {
            envelope_mean: b.envelope_mean,
            stability_window_db: b.stability_window,
            rms_norm: b.rms_norm,
            spr_db: b.spr,
            f0_hz: b.f0,
        }
    }
}

/// Learner minus expert; `f0_cents` is the learner's offset from the target pitch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub rms_delta: f64,
    pub stability_delta: f64,
    pub spr_delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f0_cents: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackFrame {
    pub t_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pitch: Option<PitchLabel>,
    pub learner: MetricSet,
    pub expert: MetricSet,
    pub deviation: Deviation,
    pub phase: Phase,
}

impl FeedbackFrame {
    pub fn new(t_s: f64, target_pitch: Option<PitchLabel>, learner: MetricSet, expert: MetricSet, phase: Phase) -> Self {
        let f0_cents = match (learner.f0_hz, &target_pitch) {
            (Some(f), Some(p)) => Some(cents(f, p.freq_hz())),
            _ => None,
        };
        let deviation = Deviation {
            rms_delta: learner.rms_norm - expert.rms_norm,
            stability_delta: learner.stability_window_db - expert.stability_window_db,
            spr_delta: learner.spr_db - expert.spr_db,
            f0_cents,
        };
        Self { t_s, target_pitch, learner, expert, deviation, phase }
    }

    /// One line of newline-delimited JSON, without the newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("frame fields are finite")
    }
}
