//! Within-participant pre/post comparison per pitch.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vocalis_core::dataset::{export_features, parse_spn, FeatureKey, FeatureTable, Metric, Phase, PitchLabel, RowMeta};
use vocalis_core::stats::wilcoxon::ZeroPolicy;
use vocalis_core::stats::{pre_post_per_pitch, PitchComparison, PitchStatus};

use crate::analyze::{analyze_session, Scope};
use crate::config::Config;
use crate::error::{CliError, Diagnostics};

/// Session manifests in `dir`: `*/manifest.json` and top-level `*.json`, sorted.
pub fn session_manifests(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::from(e).in_file(dir))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry?.path();
        if path.is_dir() {
            let m = path.join("manifest.json");
            if m.is_file() {
                out.push(m);
            }
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::Input { file: Some(dir.into()), message: "no session manifests found".into() });
    }
    Ok(out)
}

/// Per-pitch values of `metric` for every session of both phases.
pub fn feature_table(pre: &Path, post: &Path, metric: Metric, cfg: &Config, diag: &mut Diagnostics) -> Result<FeatureTable, CliError> {
    let mut table = FeatureTable::new();
    for (dir, phase) in [(pre, Phase::Pre), (post, Phase::Post)] {
        for path in session_manifests(dir)? {
            let a = analyze_session(&path, cfg, Scope::for_metric(metric))?;
            for w in &a.warnings {
                diag.warning(Some(&path), w);
            }
            let manifest = vocalis_core::dataset::SessionManifest::read(&path)?;
            let meta = RowMeta {
                group: manifest.group.clone().unwrap_or_default(),
                gender: manifest.gender.clone().unwrap_or_default(),
                order: manifest.order.clone().unwrap_or_default(),
            };
            for (pitch, value) in a.pitch_values(metric) {
                let key = FeatureKey { participant: a.participant_id.clone(), pitch, phase, metric };
                table.insert(key, meta.clone(), value).map_err(|e| CliError::from(e).in_file(&path))?;
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub metric: Metric,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    pub zero_policy: ZeroPolicy,
    pub participants: Vec<String>,
    /// Participants present in only one phase.
    pub unmatched: Vec<String>,
    pub comparisons: Vec<PitchComparison>,
}

pub fn compare_table(table: &FeatureTable, metric: Metric, pitches: &[PitchLabel], cfg: &Config) -> Result<CompareReport, CliError> {
    let mut pre = BTreeSet::new();
    let mut post = BTreeSet::new();
    for row in table.rows() {
        if row.key.metric == metric {
            match row.key.phase {
                Phase::Pre => pre.insert(row.key.participant.clone()),
                Phase::Post => post.insert(row.key.participant.clone()),
            };
        }
    }
    let comparisons = pre_post_per_pitch(table, metric, pitches, &cfg.paired_test())?;
    Ok(CompareReport {
        metric,
        seed: cfg.seed,
        bootstrap_resamples: cfg.bootstrap_resamples,
        zero_policy: cfg.zero_policy,
        participants: pre.intersection(&post).cloned().collect(),
        unmatched: pre.symmetric_difference(&post).cloned().collect(),
        comparisons,
    })
}

pub fn parse_pitches(list: &[String]) -> Result<Vec<PitchLabel>, CliError> {
    list.iter().map(|p| parse_spn(p.trim()).map_err(|e| CliError::input(e.to_string()))).collect()
}

fn write_report_csv(report: &CompareReport, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "pitch", "n_pairs", "status", "w", "w_plus", "w_minus", "p_raw", "p_fdr", "r_rb", "ci_low", "ci_high", "cohens_d",
        "n_effective", "n_zero", "method",
    ])?;
    for c in &report.comparisons {
        let mut rec = vec![c.pitch.to_string(), c.n_pairs.to_string()];
        match &c.outcome {
            PitchStatus::Tested(t) => {
                let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                rec.extend([
                    "tested".to_string(),
                    t.statistic_w.to_string(),
                    t.w_plus.to_string(),
                    t.w_minus.to_string(),
                    t.p_raw.to_string(),
                    opt(t.p_fdr),
                    t.effect_r_rb.to_string(),
                    t.ci_low.to_string(),
                    t.ci_high.to_string(),
                    opt(t.effect_d),
                    t.n_effective.to_string(),
                    t.n_zero.to_string(),
                    format!("{:?}", t.method),
                ]);
            }
            other => {
                let status = serde_json::to_value(other)?["status"].as_str().unwrap_or_default().to_string();
                rec.push(status);
                rec.extend(std::iter::repeat_n(String::new(), 12));
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Compare sessions in `pre` against `post`, writing `compare.json`,
/// `compare.csv` and the long-format `features.csv` into `out`.
pub fn cmd_compare(
    pre: &Path,
    post: &Path,
    pitches: &[PitchLabel],
    metric: Metric,
    out: &Path,
    cfg: &Config,
    diag: &mut Diagnostics,
) -> Result<CompareReport, CliError> {
    let table = feature_table(pre, post, metric, cfg, diag)?;
    let report = compare_table(&table, metric, pitches, cfg)?;
    for p in &report.unmatched {
        diag.warning(None, &format!("participant {p} has sessions in only one phase and is excluded"));
    }
    std::fs::create_dir_all(out)?;
    export_features(&table, &out.join("features.csv"))?;
    std::fs::write(out.join("compare.json"), serde_json::to_vec_pretty(&report)?)?;
    write_report_csv(&report, &out.join("compare.csv"))?;
    Ok(report)
}
