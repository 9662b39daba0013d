//! Newline-delimited JSON landmark annotations, one frame per line:
//! `{"frame":12,"p_vs":[x,y],"p_vl1":[x,y],"p_vl2":[x,y],"p_vr1":[x,y],"p_vr2":[x,y],"pitch":"C4"}`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::DatasetError;
use crate::geometry::{LandmarkSet, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    frame: u64,
    p_vs: [f64; 2],
    p_vl1: [f64; 2],
    p_vl2: [f64; 2],
    p_vr1: [f64; 2],
    p_vr2: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pitch: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mm_per_px: Option<f64>,
}

impl From<Record> for LandmarkSet {
    fn from(r: Record) -> Self {
        LandmarkSet {
            vs: r.p_vs.into(),
            vl1: r.p_vl1.into(),
            vl2: r.p_vl2.into(),
            vr1: r.p_vr1.into(),
            vr2: r.p_vr2.into(),
            frame_index: r.frame,
            pitch: r.pitch,
            calibration_mm_per_px: r.mm_per_px,
        }
    }
}

impl From<&LandmarkSet> for Record {
    fn from(s: &LandmarkSet) -> Self {
        let xy = |p: Point| [p.x, p.y];
        Record {
            frame: s.frame_index,
            p_vs: xy(s.vs),
            p_vl1: xy(s.vl1),
            p_vl2: xy(s.vl2),
            p_vr1: xy(s.vr1),
            p_vr2: xy(s.vr2),
            pitch: s.pitch.clone(),
            mm_per_px: s.calibration_mm_per_px,
        }
    }
}

pub fn read_landmarks(path: &Path) -> Result<Vec<LandmarkSet>, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DatasetError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| DatasetError::MalformedAnnotation {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(record.into());
    }
    Ok(out)
}

pub fn write_landmarks(path: &Path, sets: &[LandmarkSet]) -> Result<(), DatasetError> {
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in sets {
        let line = serde_json::to_string(&Record::from(s)).expect("landmark record serializes");
        writeln!(w, "{line}").map_err(|e| DatasetError::io(path, e))?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.ndjson");
        std::fs::write(
            &path,
            "{\"frame\":3,\"p_vs\":[0,0],\"p_vl1\":[2,4],\"p_vl2\":[4,4],\"p_vr1\":[3,-3],\"p_vr2\":[3,-5],\"pitch\":\"C4\"}\n\n",
        )
        .unwrap();
        let sets = read_landmarks(&path).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].frame_index, 3);
        assert_eq!(sets[0].vl1, Point::new(2.0, 4.0));
        assert_eq!(sets[0].pitch.as_deref(), Some("C4"));

        let out = dir.path().join("copy.ndjson");
        write_landmarks(&out, &sets).unwrap();
        assert_eq!(read_landmarks(&out).unwrap(), sets);
    }

    #[test]
    fn reports_line_of_bad_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lm.ndjson");
        std::fs::write(&path, "{\"frame\":0,\"p_vs\":[0,0]}\n").unwrap();
        assert!(matches!(read_landmarks(&path), Err(DatasetError::MalformedAnnotation { line: 1, .. })));
    }
}
