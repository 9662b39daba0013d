//! EMG trace files: a `# rate_hz=<int> channels=<int>` header line followed by
//! one comma-separated row per sample, one column per channel.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::DatasetError;
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmgHeader {
    pub rate_hz: u32,
    pub channels: usize,
}

fn malformed(path: &Path, reason: impl Into<String>) -> DatasetError {
    DatasetError::MalformedCsv { path: path.to_path_buf(), reason: reason.into() }
}

pub fn parse_header(line: &str, path: &Path) -> Result<EmgHeader, DatasetError> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| malformed(path, "first line must start with '#'"))?;
    let mut rate = None;
    let mut channels = None;
    for field in body.split_whitespace() {
        let (key, value) = field.split_once('=').ok_or_else(|| malformed(path, format!("bad header field {field:?}")))?;
        match key {
            "rate_hz" => {
                rate = Some(value.parse::<u32>().map_err(|_| malformed(path, format!("bad rate_hz {value:?}")))?)
            }
            "channels" => {
                channels =
                    Some(value.parse::<usize>().map_err(|_| malformed(path, format!("bad channels {value:?}")))?)
            }
            _ => return Err(malformed(path, format!("unknown header key {key:?}"))),
        }
    }
    match (rate, channels) {
        (Some(rate_hz), Some(channels)) if rate_hz > 0 && channels > 0 => Ok(EmgHeader { rate_hz, channels }),
        _ => Err(malformed(path, "header needs positive rate_hz and channels")),
    }
}

pub fn read_header(path: &Path) -> Result<EmgHeader, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut line = String::new();
    BufReader::new(file).read_line(&mut line).map_err(|e| DatasetError::io(path, e))?;
    parse_header(&line, path)
}

pub fn read_emg_csv(path: &Path) -> Result<SampledSignal, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| DatasetError::io(path, e))?;
    let header = parse_header(&first, path)?;

    let mut rows = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut channels = vec![Vec::new(); header.channels];
    for (i, record) in rows.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| malformed(path, format!("line {row}: {e}")))?;
        if record.len() != header.channels {
            return Err(DatasetError::ChannelMismatch {
                path: path.to_path_buf(),
                declared: header.channels,
                found: record.len(),
                row,
            });
        }
        for (dst, field) in channels.iter_mut().zip(record.iter()) {
            let v: f64 = field.parse().map_err(|_| malformed(path, format!("line {row}: bad number {field:?}")))?;
            if !v.is_finite() {
                return Err(malformed(path, format!("line {row}: non-finite value")));
            }
            dst.push(v);
        }
    }
    Ok(SampledSignal::new(channels, header.rate_hz as f64, 0.0)?)
}

/// Write a signal whose rate is a whole number of Hz.
pub fn write_emg_csv(path: &Path, signal: &SampledSignal) -> Result<(), DatasetError> {
    let rate = signal.rate_hz();
    if rate.fract() != 0.0 {
        return Err(malformed(path, format!("rate {rate} Hz is not an integer")));
    }
    let file = File::create(path).map_err(|e| DatasetError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| DatasetError::io(path, e);
    writeln!(w, "# rate_hz={} channels={}", rate as u32, signal.channel_count()).map_err(io)?;
    let mut line = String::new();
    for i in 0..signal.len() {
        line.clear();
        for (c, ch) in signal.channels().iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&ch[i].to_string());
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}
