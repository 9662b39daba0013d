//! EMG RMS against SPR on a common time grid.

use std::path::Path;

use serde::Serialize;
use vocalis_core::dataset::{load_session, PitchLabel};
use vocalis_core::dsp::{audio_spr, normalize_mvc, resample_to_grid, rms_windows, SprConfig};
use vocalis_core::stats::{pearson, CorrelationResult};

use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoteCorrelation {
    pub pitch: PitchLabel,
    pub event_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub bins: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<CorrelationResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelateReport {
    pub participant_id: String,
    pub grid_ms: f64,
    pub window_ms: f64,
    /// Start time of the first aligned bin.
    pub start_s: f64,
    pub overall: CorrelationResult,
    pub notes: Vec<NoteCorrelation>,
    #[serde(skip)]
    pub rms: Vec<f64>,
    #[serde(skip)]
    pub spr: Vec<f64>,
}

pub fn correlate_session(path: &Path, cfg: &Config) -> Result<CorrelateReport, CliError> {
    let inner = || -> Result<CorrelateReport, CliError> {
        let session = load_session(path)?;
        let cal = session.calibration_or_self(&cfg.protocol())?;
        let rms = normalize_mvc(&rms_windows(session.emg()?, cfg.window_ms, cfg.window_ms)?, &cal)?;
        let rms_grid = resample_to_grid(&rms.center_times().into_iter().zip(rms.values.iter().copied()).collect::<Vec<_>>(), cfg.grid_ms)?;
        let spr = audio_spr(session.audio()?, &SprConfig::default())?;
        let spr_grid = resample_to_grid(
            &spr.frame_times_s.iter().copied().zip(spr.values.iter().copied()).collect::<Vec<_>>(),
            cfg.grid_ms,
        )?;
        let (x, y, start_bin) = rms_grid.align(&spr_grid)?;
        let overall = pearson(&x, &y)?;
        let notes = note_windows(&session.manifest().pitch_events, &x, &y, start_bin, cfg.grid_ms);
        Ok(CorrelateReport {
            participant_id: session.participant_id().to_string(),
            grid_ms: cfg.grid_ms,
            window_ms: cfg.window_ms,
            start_s: start_bin as f64 * cfg.grid_ms / 1000.0,
            overall,
            notes,
            rms: x,
            spr: y,
        })
    };
    inner().map_err(|e| e.in_file(path))
}

fn note_windows(
    events: &[vocalis_core::dataset::PitchEvent],
    x: &[f64],
    y: &[f64],
    start_bin: i64,
    grid_ms: f64,
) -> Vec<NoteCorrelation> {
    let grid_s = grid_ms / 1000.0;
    events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let idx: Vec<usize> = (0..x.len())
                .filter(|&k| {
                    let t = (start_bin + k as i64) as f64 * grid_s;
                    t >= e.start_s && t < e.end_s
                })
                .collect();
            let xs: Vec<f64> = idx.iter().map(|&k| x[k]).collect();
            let ys: Vec<f64> = idx.iter().map(|&k| y[k]).collect();
            let (result, reason) = match pearson(&xs, &ys) {
                Ok(r) => (Some(r), None),
                Err(err) => (None, Some(err.to_string())),
            };
            NoteCorrelation { pitch: e.label.clone(), event_index: i, start_s: e.start_s, end_s: e.end_s, bins: idx.len(), result, reason }
        })
        .collect()
}

/// Write `correlation.json` and the aligned series `aligned.csv` into `out`.
pub fn cmd_correlate(path: &Path, out: &Path, cfg: &Config) -> Result<CorrelateReport, CliError> {
    let report = correlate_session(path, cfg)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("correlation.json"), serde_json::to_vec_pretty(&report)?)?;
    let mut w = csv::Writer::from_path(out.join("aligned.csv"))?;
    w.write_record(["participant", "t_s", "rms_norm", "spr_db"])?;
    for (k, (a, b)) in report.rms.iter().zip(&report.spr).enumerate() {
        let t = report.start_s + k as f64 * report.grid_ms / 1000.0;
        w.write_record([report.participant_id.clone(), t.to_string(), a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(report)
}

