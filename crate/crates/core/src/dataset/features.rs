//! Long-format feature tables for hand-off to external statistics software.
//!
//! Exported columns, in order:
//! `participant,group,gender,order,pitch,midi,phase,metric,value`.
//! Rows are sorted by participant, pitch (MIDI number), phase (pre before
//! post) and metric.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::pitch::{parse_spn, PitchLabel};
use crate::error::{DatasetError, Error, Result};

pub const FEATURE_COLUMNS: [&str; 9] = ["participant", "group", "gender", "order", "pitch", "midi", "phase", "metric", "value"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Pre,
    Post,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Stability,
    Length,
    Rms,
    Spr,
}

macro_rules! text_enum {
    ($ty:ty { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $(<$ty>::$variant => $text),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok(<$ty>::$variant),)+
                    other => Err(Error::InvalidParameter(format!("unknown {} {other:?}", stringify!($ty)))),
                }
            }
        }
    };
}

text_enum!(Phase { Pre => "pre", Post => "post" });
text_enum!(Metric { Stability => "stability", Length => "length", Rms => "rms", Spr => "spr" });

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureKey {
    pub participant: String,
    pub pitch: PitchLabel,
    pub phase: Phase,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RowMeta {
    pub group: String,
    pub gender: String,
    pub order: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub key: FeatureKey,
    pub meta: RowMeta,
    pub value: f64,
}

/// Key-unique feature rows in deterministic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    rows: BTreeMap<FeatureKey, (RowMeta, f64)>,
}

impl FeatureTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a row; duplicate keys and non-finite values are rejected.
    pub fn insert(&mut self, key: FeatureKey, meta: RowMeta, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite value for {key:?}")));
        }
        if self.rows.contains_key(&key) {
            return Err(Error::DuplicateKey(format!(
                "{}/{}/{}/{}",
                key.participant, key.pitch, key.phase, key.metric
            )));
        }
        self.rows.insert(key, (meta, value));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, key: &FeatureKey) -> Option<f64> {
        self.rows.get(key).map(|(_, v)| *v)
    }

    pub fn rows(&self) -> impl Iterator<Item = FeatureRow> + '_ {
        self.rows.iter().map(|(k, (m, v))| FeatureRow { key: k.clone(), meta: m.clone(), value: *v })
    }

    pub fn participants(&self) -> Vec<String> {
        let mut p: Vec<String> = self.rows.keys().map(|k| k.participant.clone()).collect();
        p.dedup();
        p
    }

    pub fn pitches(&self, metric: Metric) -> Vec<PitchLabel> {
        let mut p: Vec<PitchLabel> = self.rows.keys().filter(|k| k.metric == metric).map(|k| k.pitch.clone()).collect();
        p.sort();
        p.dedup();
        p
    }
}

pub fn export_features(table: &FeatureTable, path: &Path) -> std::result::Result<usize, DatasetError> {
    let io = |e: csv::Error| DatasetError::Io { path: path.to_path_buf(), source: std::io::Error::other(e) };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(FEATURE_COLUMNS).map_err(io)?;
    for row in table.rows() {
        w.write_record([
            row.key.participant.as_str(),
            &row.meta.group,
            &row.meta.gender,
            &row.meta.order,
            row.key.pitch.spn(),
            &row.key.pitch.midi().to_string(),
            row.key.phase.as_str(),
            row.key.metric.as_str(),
            &row.value.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| DatasetError::io(path, e))?;
    Ok(table.len())
}

pub fn import_features(path: &Path) -> std::result::Result<FeatureTable, DatasetError> {
    let malformed = |reason: String| DatasetError::MalformedCsv { path: path.to_path_buf(), reason };
    let mut reader = csv::Reader::from_path(path).map_err(|e| malformed(e.to_string()))?;
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != FEATURE_COLUMNS {
        return Err(malformed(format!("unexpected columns {headers:?}")));
    }
    let mut table = FeatureTable::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let r = record.map_err(|e| malformed(format!("line {line}: {e}")))?;
        let field = |j: usize| r.get(j).unwrap_or_default();
        let bad = |what: &str| malformed(format!("line {line}: bad {what}"));
        let key = FeatureKey {
            participant: field(0).to_string(),
            pitch: parse_spn(field(4)).map_err(|_| bad("pitch"))?,
            phase: field(6).parse().map_err(|_| bad("phase"))?,
            metric: field(7).parse().map_err(|_| bad("metric"))?,
        };
        let meta = RowMeta { group: field(1).into(), gender: field(2).into(), order: field(3).into() };
        let value: f64 = field(8).parse().map_err(|_| bad("value"))?;
        table.insert(key, meta, value)?;
    }
    Ok(table)
}
