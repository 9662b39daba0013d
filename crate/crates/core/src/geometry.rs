//! Vocal-fold length from five annotated ultrasound landmarks.
//!
//! The true vocal cords run from their common anterior connection point to
//! the midpoints of the left and right cord end pairs; the length is the
//! average of the two distances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point::new(x, y)
    }
}

/// The five laryngeal key points of one annotated frame, in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet {
    /// Anterior connection point of the cords.
    pub vs: Point,
    pub vl1: Point,
    pub vl2: Point,
    pub vr1: Point,
    pub vr2: Point,
    pub frame_index: u64,
    pub pitch: Option<String>,
    pub calibration_mm_per_px: Option<f64>,
}

impl LandmarkSet {
    pub fn points(&self) -> [Point; 5] {
        [self.vs, self.vl1, self.vl2, self.vr1, self.vr2]
    }

    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> LandmarkSet {
        LandmarkSet {
            vs: f(self.vs),
            vl1: f(self.vl1),
            vl2: f(self.vl2),
            vr1: f(self.vr1),
            vr2: f(self.vr2),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    Pixels,
    Millimeters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthMeasurement {
    pub length: f64,
    pub unit: LengthUnit,
    pub frame_index: u64,
    pub pitch_label: Option<String>,
}

pub fn vocal_cord_length(landmarks: &LandmarkSet) -> Result<LengthMeasurement> {
    if landmarks.points().iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFiniteLandmark { frame: landmarks.frame_index });
    }
    let left = landmarks.vs.distance(landmarks.vl1.midpoint(landmarks.vl2));
    let right = landmarks.vs.distance(landmarks.vr1.midpoint(landmarks.vr2));
    let px = 0.5 * (left + right);
    let (length, unit) = match landmarks.calibration_mm_per_px {
        Some(scale) if scale.is_finite() && scale > 0.0 => (px * scale, LengthUnit::Millimeters),
        Some(scale) => return Err(Error::InvalidParameter(format!("mm_per_px must be positive, got {scale}"))),
        None => (px, LengthUnit::Pixels),
    };
    Ok(LengthMeasurement { length, unit, frame_index: landmarks.frame_index, pitch_label: landmarks.pitch.clone() })
}

/// Annotated frames expected per pitch.
pub const DEFAULT_FRAMES_PER_PITCH: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchLengthStats {
    pub pitch: String,
    pub mean: f64,
    /// Sample standard deviation; absent for a single frame.
    pub sd: Option<f64>,
    pub count: usize,
    /// Fewer annotations than requested frames per pitch.
    pub under_sampled: bool,
}

/// Mean and sample SD of lengths per pitch label, ordered by label.
/// Measurements without a pitch label are grouped under `""`.
pub fn per_pitch_lengths(measurements: &[LengthMeasurement], frames_per_pitch: usize) -> Result<Vec<PitchLengthStats>> {
    if measurements.is_empty() {
        return Err(Error::EmptyInput("length measurements".into()));
    }
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for m in measurements {
        groups.entry(m.pitch_label.clone().unwrap_or_default()).or_default().push(m.length);
    }
    Ok(groups
        .into_iter()
        .map(|(pitch, lengths)| {
            let count = lengths.len();
            let mean = lengths.iter().sum::<f64>() / count as f64;
            let sd = (count > 1).then(|| {
                (lengths.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
            });
            PitchLengthStats { pitch, mean, sd, count, under_sampled: count < frames_per_pitch }
        })
        .collect())
}
