//! Per-pitch pre/post comparisons with false-discovery-rate control across
//! the pitch family.

use serde::{Deserialize, Serialize};

use crate::dataset::features::{FeatureKey, FeatureTable, Metric, Phase};
use crate::dataset::pitch::PitchLabel;
use crate::error::Result;
use crate::stats::effect::{cohens_d, rank_biserial, BootstrapConfig};
use crate::stats::fdr::bh_fdr;
use crate::stats::wilcoxon::{wilcoxon_signed_rank, PValueMethod, PairedSample, ZeroPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic_w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p_raw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_fdr: Option<f64>,
    pub effect_r_rb: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effect_d: Option<f64>,
    pub n_effective: usize,
    pub n_zero: usize,
    pub method: PValueMethod,
    pub zero_policy: ZeroPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedTestConfig {
    pub zero_policy: ZeroPolicy,
    pub bootstrap: BootstrapConfig,
}

impl Default for PairedTestConfig {
    fn default() -> Self {
        Self { zero_policy: ZeroPolicy::Wilcoxon, bootstrap: BootstrapConfig::default() }
    }
}

/// Signed-rank test, rank-biserial effect with bootstrap CI, and Cohen's d
/// when defined.
pub fn paired_test(sample: &PairedSample, config: &PairedTestConfig) -> Result<TestResult> {
    let test = wilcoxon_signed_rank(sample, config.zero_policy)?;
    let effect = rank_biserial(sample, config.zero_policy, &config.bootstrap)?;
    Ok(TestResult {
        statistic_w: test.statistic.w,
        w_plus: test.statistic.w_plus,
        w_minus: test.statistic.w_minus,
        p_raw: test.p_value,
        p_fdr: None,
        effect_r_rb: effect.estimate,
        ci_low: effect.ci_low,
        ci_high: effect.ci_high,
        effect_d: cohens_d(&sample.pre, &sample.post).ok(),
        n_effective: test.statistic.n_effective,
        n_zero: test.statistic.n_zero,
        method: test.method,
        zero_policy: config.zero_policy,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PitchStatus {
    Tested(TestResult),
    /// Every pre/post difference is zero.
    Degenerate,
    /// Fewer than two complete pairs.
    InsufficientData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchComparison {
    pub pitch: PitchLabel,
    pub n_pairs: usize,
    /// Participants with only one phase at this pitch.
    pub excluded: Vec<String>,
    pub outcome: PitchStatus,
}

/// Paired test per pitch on `metric`, with BH-FDR across all pitches that
/// could be tested. With no pitches given, every pitch present for the metric
/// is used.
pub fn pre_post_per_pitch(
    table: &FeatureTable,
    metric: Metric,
    pitches: &[PitchLabel],
    config: &PairedTestConfig,
) -> Result<Vec<PitchComparison>> {
    let pitches = if pitches.is_empty() { table.pitches(metric) } else { pitches.to_vec() };
    let participants = table.participants();
    let mut out = Vec::with_capacity(pitches.len());
    for pitch in pitches {
        let lookup = |participant: &str, phase| {
            table.get(&FeatureKey { participant: participant.to_string(), pitch: pitch.clone(), phase, metric })
        };
        let mut pre = Vec::new();
        let mut post = Vec::new();
        let mut labels = Vec::new();
        let mut excluded = Vec::new();
        for p in &participants {
            match (lookup(p, Phase::Pre), lookup(p, Phase::Post)) {
                (Some(a), Some(b)) => {
                    pre.push(a);
                    post.push(b);
                    labels.push(p.clone());
                }
                (None, None) => {}
                _ => excluded.push(p.clone()),
            }
        }
        let n_pairs = pre.len();
        let outcome = if n_pairs < 2 {
            PitchStatus::InsufficientData
        } else if pre == post {
            PitchStatus::Degenerate
        } else {
            let sample = PairedSample::new(pre, post, labels)?;
            PitchStatus::Tested(paired_test(&sample, config)?)
        };
        out.push(PitchComparison { pitch, n_pairs, excluded, outcome });
    }

    let raw: Vec<f64> = out
        .iter()
        .filter_map(|c| match &c.outcome {
            PitchStatus::Tested(t) => Some(t.p_raw),
            _ => None,
        })
        .collect();
    let adjusted = bh_fdr(&raw)?;
    let mut it = adjusted.into_iter();
    for c in out.iter_mut() {
        if let PitchStatus::Tested(t) = &mut c.outcome {
            t.p_fdr = it.next();
        }
    }
    Ok(out)
}
