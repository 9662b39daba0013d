//! Scientific pitch notation and 12-tone equal temperament (A4 = 440 Hz).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const SHARP_NAMES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];
const WHITE_PITCH_CLASSES: [i32; 7] = [0, 2, 4, 5, 7, 9, 11];

#[derive(Debug, Clone, PartialEq)]
pub struct PitchLabel {
    spn: String,
    midi: i32,
    freq_hz: f64,
}

pub fn midi_to_hz(midi: i32) -> f64 {
    440.0 * 2f64.powf((midi - 69) as f64 / 12.0)
}

pub fn is_white_key(midi: i32) -> bool {
    WHITE_PITCH_CLASSES.contains(&midi.rem_euclid(12))
}

impl PitchLabel {
    pub fn from_midi(midi: i32) -> Result<Self> {
        if !(0..=127).contains(&midi) {
            return Err(Error::InvalidParameter(format!("midi note {midi} outside 0..=127")));
        }
        Ok(Self { spn: format_spn(midi), midi, freq_hz: midi_to_hz(midi) })
    }

    pub fn spn(&self) -> &str {
        &self.spn
    }

    pub fn midi(&self) -> i32 {
        self.midi
    }

    pub fn freq_hz(&self) -> f64 {
        self.freq_hz
    }

    pub fn is_white_key(&self) -> bool {
        is_white_key(self.midi)
    }
}

impl Eq for PitchLabel {}

impl PartialOrd for PitchLabel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PitchLabel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.midi.cmp(&other.midi).then_with(|| self.spn.cmp(&other.spn))
    }
}

impl std::hash::Hash for PitchLabel {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.midi.hash(state);
        self.spn.hash(state);
    }
}

/// Canonical spelling with sharps, e.g. `C#4`.
pub fn format_spn(midi: i32) -> String {
    let octave = midi.div_euclid(12) - 1;
    format!("{}{}", SHARP_NAMES[midi.rem_euclid(12) as usize], octave)
}

/// Parse `letter[accidental]octave`, octave in -1..=9. Accidentals: `#`, `♯`,
/// `b`, `♭`. The original spelling is kept.
pub fn parse_spn(text: &str) -> Result<PitchLabel> {
    let malformed = |token: &str| Error::MalformedPitch { text: text.to_string(), token: token.to_string() };
    let trimmed = text.trim();
    let mut chars = trimmed.chars();
    let letter = chars.next().ok_or_else(|| malformed(""))?;
    let base = match letter.to_ascii_uppercase() {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return Err(malformed(&letter.to_string())),
    };
    let rest = chars.as_str();
    let (shift, octave_text) = match rest.chars().next() {
        Some(c @ ('#' | '♯')) => (1, &rest[c.len_utf8()..]),
        Some(c @ ('b' | '♭')) => (-1, &rest[c.len_utf8()..]),
        _ => (0, rest),
    };
    if octave_text.is_empty() {
        return Err(malformed(rest));
    }
    let octave: i32 = octave_text.parse().map_err(|_| malformed(octave_text))?;
    if !(-1..=9).contains(&octave) {
        return Err(malformed(octave_text));
    }
    let midi = 12 * (octave + 1) + base + shift;
    if !(0..=127).contains(&midi) {
        return Err(malformed(trimmed));
    }
    Ok(PitchLabel { spn: trimmed.to_string(), midi, freq_hz: midi_to_hz(midi) })
}

impl FromStr for PitchLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_spn(s)
    }
}

impl fmt::Display for PitchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spn)
    }
}

impl Serialize for PitchLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.spn)
    }
}

impl<'de> Deserialize<'de> for PitchLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_spn(&text).map_err(serde::de::Error::custom)
    }
}
