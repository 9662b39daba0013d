use serde::{Deserialize, Serialize};

use crate::dataset::pitch::PitchLabel;
use crate::dataset::schedule::PitchEvent;
use crate::signal::SampledSignal;

#[derive(Debug, Clone, PartialEq)]
pub struct PitchSegment {
    pub label: PitchLabel,
    pub event_index: usize,
    pub signal: SampledSignal,
    /// The event extended past the recording and was cut short.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedEvent {
    pub event_index: usize,
    pub pitch: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Segmentation {
    pub segments: Vec<PitchSegment>,
    pub skipped: Vec<SkippedEvent>,
}

fn sample_index(t: f64, signal: &SampledSignal) -> i64 {
    ((t - signal.origin_s()) * signal.rate_hz()).round() as i64
}

/// Slice `[start_s, end_s)` of the signal for every event. Times are on the
/// signal's clock (`origin_s` is the time of sample 0).
pub fn segment_by_pitch(signal: &SampledSignal, events: &[PitchEvent]) -> Segmentation {
    let len = signal.len() as i64;
    let mut out = Segmentation::default();
    for (event_index, event) in events.iter().enumerate() {
        let start = sample_index(event.start_s, signal);
        let end = sample_index(event.end_s, signal);
        if start >= len {
            out.skipped.push(SkippedEvent {
                event_index,
                pitch: event.label.to_string(),
                reason: format!("event starts at {:.3} s, after the signal ends", event.start_s),
            });
            continue;
        }
        let truncated = end > len || start < 0;
        let (s, e) = (start.max(0), end.min(len));
        if e <= s {
            out.skipped.push(SkippedEvent {
                event_index,
                pitch: event.label.to_string(),
                reason: "event covers no samples".into(),
            });
            continue;
        }
        out.segments.push(PitchSegment {
            label: event.label.clone(),
            event_index,
            signal: signal.slice(s as usize, e as usize),
            truncated,
        });
    }
    out
}
