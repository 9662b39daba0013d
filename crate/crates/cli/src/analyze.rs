//! Per-pitch metrics of recorded sessions, written as plot-ready tables.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vocalis_core::dataset::manifest::{Modality, SkillLevel};
use vocalis_core::dataset::segment::SkippedEvent;
use vocalis_core::dataset::{load_session, segment_by_pitch, Metric, PitchLabel, Session};
use vocalis_core::dsp::stability::{emg_stability, StabilityConfig};
use vocalis_core::dsp::{audio_spr, normalize_mvc, rms_windows, MvcCalibration, SprConfig};
use vocalis_core::geometry::{per_pitch_lengths, vocal_cord_length, PitchLengthStats};

use crate::config::Config;
use crate::error::{CliError, Diagnostics};

/// Which modalities to evaluate; absent modalities are skipped regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scope {
    pub emg: bool,
    pub audio: bool,
    pub landmarks: bool,
}

impl Scope {
    pub const ALL: Scope = Scope { emg: true, audio: true, landmarks: true };

    pub fn for_metric(metric: Metric) -> Self {
        match metric {
            Metric::Stability | Metric::Rms => Scope { emg: true, audio: false, landmarks: false },
            Metric::Spr => Scope { emg: false, audio: true, landmarks: false },
            Metric::Length => Scope { emg: false, audio: false, landmarks: true },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitchRow {
    pub pitch: PitchLabel,
    pub midi: i32,
    pub event_index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub stability_db: Option<f64>,
    pub envelope_mean: Option<f64>,
    pub rms_norm_mean: Option<f64>,
    pub spr_db: Option<f64>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionAnalysis {
    pub manifest: PathBuf,
    pub participant_id: String,
    pub session_id: Option<String>,
    pub skill_level: SkillLevel,
    pub window_ms: f64,
    pub calibration: Option<MvcCalibration>,
    pub pitches: Vec<PitchRow>,
    pub lengths: Vec<PitchLengthStats>,
    pub skipped: Vec<SkippedEvent>,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub rms_series: Vec<(f64, f64)>,
    #[serde(skip)]
    pub spr_series: Vec<(f64, f64)>,
}

impl SessionAnalysis {
    /// Mean of `metric` per pitch over events with a value.
    pub fn pitch_values(&self, metric: Metric) -> Vec<(PitchLabel, f64)> {
        if metric == Metric::Length {
            return self
                .lengths
                .iter()
                .filter_map(|s| vocalis_core::dataset::parse_spn(&s.pitch).ok().map(|p| (p, s.mean)))
                .collect();
        }
        let mut acc: BTreeMap<PitchLabel, (f64, usize)> = BTreeMap::new();
        for row in &self.pitches {
            let v = match metric {
                Metric::Stability => row.stability_db,
                Metric::Rms => row.rms_norm_mean,
                Metric::Spr => row.spr_db,
                Metric::Length => unreachable!(),
            };
            if let Some(v) = v {
                let e = acc.entry(row.pitch.clone()).or_default();
                e.0 += v;
                e.1 += 1;
            }
        }
        acc.into_iter().map(|(p, (s, n))| (p, s / n as f64)).collect()
    }
}

pub fn analyze_session(path: &Path, cfg: &Config, scope: Scope) -> Result<SessionAnalysis, CliError> {
    let session = load_session(path).map_err(|e| CliError::from(e).in_file(path))?;
    analyze_loaded(&session, cfg, scope).map_err(|e| e.in_file(path))
}

fn analyze_loaded(session: &Session, cfg: &Config, scope: Scope) -> Result<SessionAnalysis, CliError> {
    let manifest = session.manifest();
    let events = &manifest.pitch_events;
    let mut rows: Vec<PitchRow> = events
        .iter()
        .enumerate()
        .map(|(i, e)| PitchRow {
            pitch: e.label.clone(),
            midi: e.label.midi(),
            event_index: i,
            start_s: e.start_s,
            end_s: e.end_s,
            stability_db: None,
            envelope_mean: None,
            rms_norm_mean: None,
            spr_db: None,
            truncated: false,
        })
        .collect();
    let mut out = SessionAnalysis {
        manifest: session.manifest_path().to_path_buf(),
        participant_id: manifest.participant_id.clone(),
        session_id: manifest.session_id.clone(),
        skill_level: manifest.skill_level,
        window_ms: cfg.window_ms,
        calibration: None,
        pitches: Vec::new(),
        lengths: Vec::new(),
        skipped: Vec::new(),
        warnings: session.warnings().to_vec(),
        rms_series: Vec::new(),
        spr_series: Vec::new(),
    };

    if scope.emg && manifest.has(Modality::Emg) {
        let emg = session.emg()?;
        if manifest.calibration.is_none() {
            out.warnings.push("no calibration in manifest; MVC taken from the session itself".into());
        }
        let cal = session.calibration_or_self(&cfg.protocol())?;
        out.calibration = Some(cal);
        let series = normalize_mvc(&rms_windows(emg, cfg.window_ms, cfg.window_ms)?, &cal)?;
        out.rms_series = series.center_times().into_iter().zip(series.values.iter().copied()).collect();

        let seg = segment_by_pitch(emg, events);
        out.skipped.extend(seg.skipped);
        for s in seg.segments {
            let row = &mut rows[s.event_index];
            row.truncated |= s.truncated;
            match emg_stability(&s.signal, &StabilityConfig::default()) {
                Ok(st) => {
                    row.stability_db = Some(st.mean_s);
                    row.envelope_mean = Some(st.envelope_mean);
                }
                Err(e) => out.warnings.push(format!("event {} ({}): stability: {e}", s.event_index, row.pitch)),
            }
            match rms_windows(&s.signal, cfg.window_ms, cfg.window_ms).and_then(|r| normalize_mvc(&r, &cal)) {
                Ok(r) if !r.values.is_empty() => {
                    row.rms_norm_mean = Some(r.values.iter().sum::<f64>() / r.values.len() as f64)
                }
                Ok(_) => out.warnings.push(format!("event {} ({}): shorter than one RMS window", s.event_index, row.pitch)),
                Err(e) => out.warnings.push(format!("event {} ({}): rms: {e}", s.event_index, row.pitch)),
            }
        }
    }

    if scope.audio && manifest.has(Modality::Audio) {
        let audio = session.audio()?;
        let spr_cfg = SprConfig::default();
        let whole = audio_spr(audio, &spr_cfg)?;
        out.spr_series = whole.frame_times_s.iter().copied().zip(whole.values.iter().copied()).collect();
        let seg = segment_by_pitch(audio, events);
        if !(scope.emg && manifest.has(Modality::Emg)) {
            out.skipped.extend(seg.skipped);
        }
        for s in seg.segments {
            let row = &mut rows[s.event_index];
            row.truncated |= s.truncated;
            match audio_spr(&s.signal, &spr_cfg) {
                Ok(v) => row.spr_db = Some(v.segment_db),
                Err(e) => out.warnings.push(format!("event {} ({}): spr: {e}", s.event_index, row.pitch)),
            }
        }
    }

    if scope.landmarks && manifest.has(Modality::Ultrasound) {
        let measurements = session
            .landmarks()?
            .iter()
            .map(vocal_cord_length)
            .collect::<Result<Vec<_>, _>>()?;
        if !measurements.is_empty() {
            out.lengths = per_pitch_lengths(&measurements, cfg.frames_per_pitch)?;
        }
    }

    out.pitches = rows;
    Ok(out)
}

fn fmt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write `per_pitch.csv`, `lengths.csv`, `rms_series.csv`, `spr_series.csv`
/// (those that have content) and `summary.json` into `dir`.
pub fn write_analysis(a: &SessionAnalysis, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("per_pitch.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record([
        "participant", "pitch", "midi", "event_index", "start_s", "end_s", "stability_db", "envelope_mean", "rms_norm_mean",
        "spr_db", "truncated",
    ])?;
    for r in &a.pitches {
        w.write_record([
            a.participant_id.clone(),
            r.pitch.to_string(),
            r.midi.to_string(),
            r.event_index.to_string(),
            r.start_s.to_string(),
            r.end_s.to_string(),
            fmt(r.stability_db),
            fmt(r.envelope_mean),
            fmt(r.rms_norm_mean),
            fmt(r.spr_db),
            r.truncated.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    if !a.lengths.is_empty() {
        let path = dir.join("lengths.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["participant", "pitch", "mean", "sd", "count", "under_sampled"])?;
        for s in &a.lengths {
            w.write_record([
                a.participant_id.clone(),
                s.pitch.clone(),
                s.mean.to_string(),
                fmt(s.sd),
                s.count.to_string(),
                s.under_sampled.to_string(),
            ])?;
        }
        w.flush()?;
        written.push(path);
    }

    for (name, column, series) in [("rms_series.csv", "rms_norm", &a.rms_series), ("spr_series.csv", "spr_db", &a.spr_series)] {
        if series.is_empty() {
            continue;
        }
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["participant", "t_s", column])?;
        for (t, v) in series {
            w.write_record([a.participant_id.clone(), t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        written.push(path);
    }

    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_vec_pretty(a)?)?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeOutcome {
    pub analyzed: Vec<PathBuf>,
    pub failed: Vec<PathBuf>,
}

/// Analyze every session into its own subdirectory of `out`. Failures are
/// reported per file and do not stop the others.
pub fn cmd_analyze(paths: &[PathBuf], out: &Path, cfg: &Config, diag: &mut Diagnostics) -> Result<AnalyzeOutcome, CliError> {
    let mut outcome = AnalyzeOutcome { analyzed: Vec::new(), failed: Vec::new() };
    let mut first_kind: Option<&'static str> = None;
    let mut used = BTreeMap::<String, usize>::new();
    for path in paths {
        let result = analyze_session(path, cfg, Scope::ALL).and_then(|a| {
            let mut name = match &a.session_id {
                Some(s) => format!("{}-{s}", a.participant_id),
                None => a.participant_id.clone(),
            };
            let n = used.entry(name.clone()).or_default();
            *n += 1;
            if *n > 1 {
                name = format!("{name}-{n}");
            }
            for w in &a.warnings {
                diag.warning(Some(path), w);
            }
            write_analysis(&a, &out.join(name))
        });
        match result {
            Ok(_) => outcome.analyzed.push(path.clone()),
            Err(e) => {
                let e = e.in_file(path);
                diag.error(&e);
                outcome.failed.push(path.clone());
                first_kind.get_or_insert(e.kind());
            }
        }
    }
    // each failure was already reported with its file; this only sets the exit code
    let message = format!("{} of {} sessions failed", outcome.failed.len(), paths.len());
    match first_kind {
        Some("compute") => Err(CliError::compute(message)),
        Some(_) => Err(CliError::input(message)),
        None => Ok(outcome),
    }
}
