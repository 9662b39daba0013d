use serde::{Deserialize, Serialize};

use crate::dataset::pitch::{is_white_key, PitchLabel};
use crate::error::{Error, Result};

pub const DEFAULT_BPM: f64 = 80.0;
pub const DEFAULT_HOLD_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventSource {
    ScaleTask,
    SongSegment,
}

/// A held pitch over `[start_s, end_s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchEvent {
    #[serde(rename = "pitch")]
    pub label: PitchLabel,
    pub start_s: f64,
    pub end_s: f64,
    #[serde(default = "default_source")]
    pub source: EventSource,
}

fn default_source() -> EventSource {
    EventSource::ScaleTask
}

impl PitchEvent {
    pub fn new(label: PitchLabel, start_s: f64, end_s: f64, source: EventSource) -> Result<Self> {
        if !(start_s.is_finite() && end_s.is_finite() && start_s < end_s) {
            return Err(Error::InvalidParameter(format!("pitch event needs start < end, got [{start_s}, {end_s})")));
        }
        Ok(Self { label, start_s, end_s, source })
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start_s <= t && t < self.end_s
    }
}

/// Metronome-paced scale task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSchedule {
    pub bpm: f64,
    pub hold_s: f64,
    pub events: Vec<PitchEvent>,
}

impl ScaleSchedule {
    pub fn event_at(&self, t: f64) -> Option<&PitchEvent> {
        event_at(&self.events, t)
    }
}

pub fn event_at(events: &[PitchEvent], t: f64) -> Option<&PitchEvent> {
    events.iter().find(|e| e.contains(t))
}

/// Consecutive `hold_s` events stepping from `low` to `high` inclusive,
/// chromatically or over the C-major white keys.
pub fn scale_schedule(
    low: &PitchLabel,
    high: &PitchLabel,
    bpm: f64,
    hold_s: f64,
    white_keys_only: bool,
) -> Result<ScaleSchedule> {
    if low.midi() > high.midi() {
        return Err(Error::EmptyInput(format!("pitch range {low}..{high} is empty")));
    }
    if !(hold_s.is_finite() && hold_s > 0.0) || !(bpm.is_finite() && bpm > 0.0) {
        return Err(Error::InvalidParameter(format!("bpm {bpm} / hold {hold_s} s must be positive")));
    }
    if white_keys_only {
        for p in [low, high] {
            if !p.is_white_key() {
                return Err(Error::InvalidParameter(format!("{p} is not a white key")));
            }
        }
    }
    let events = (low.midi()..=high.midi())
        .filter(|&m| !white_keys_only || is_white_key(m))
        .enumerate()
        .map(|(i, midi)| {
            let start = i as f64 * hold_s;
            PitchEvent::new(PitchLabel::from_midi(midi)?, start, start + hold_s, EventSource::ScaleTask)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleSchedule { bpm, hold_s, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::pitch::parse_spn;

    fn sched(a: &str, b: &str, white: bool) -> Result<ScaleSchedule> {
        scale_schedule(&parse_spn(a).unwrap(), &parse_spn(b).unwrap(), DEFAULT_BPM, DEFAULT_HOLD_S, white)
    }

    #[test]
    fn single_pitch() {
        let s = sched("C4", "C4", true).unwrap();
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.events[0].duration_s(), 2.0);
    }

    #[test]
    fn one_octave_of_white_keys() {
        let s = sched("C4", "C5", true).unwrap();
        let names: Vec<_> = s.events.iter().map(|e| e.label.spn().to_string()).collect();
        assert_eq!(names, ["C4", "D4", "E4", "F4", "G4", "A4", "B4", "C5"]);
        assert_eq!(s.events[7].start_s, 14.0);
    }

    #[test]
    fn chromatic_octave() {
        assert_eq!(sched("C4", "C5", false).unwrap().events.len(), 13);
    }

    #[test]
    fn rejects_descending_and_accidentals() {
        assert!(sched("C5", "C4", true).is_err());
        assert!(sched("C#4", "C5", true).is_err());
        assert!(sched("C#4", "C5", false).is_ok());
    }

    #[test]
    fn event_lookup() {
        let s = sched("C4", "E4", true).unwrap();
        assert_eq!(s.event_at(2.5).unwrap().label.spn(), "D4");
        assert!(s.event_at(6.0).is_none());
    }

    #[test]
    fn event_requires_order() {
        let l = parse_spn("C4").unwrap();
        assert!(PitchEvent::new(l.clone(), 1.0, 1.0, EventSource::ScaleTask).is_err());
        assert!(PitchEvent::new(l, 1.0, 0.5, EventSource::SongSegment).is_err());
    }
}
