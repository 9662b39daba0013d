//! Effect sizes for paired comparisons.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::mvc::percentile;
use crate::error::{Error, Result};
use crate::stats::wilcoxon::{signed_rank_statistic, PairedSample, ZeroPolicy};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;
/// Seed for bootstrap confidence intervals unless the caller overrides it.
pub const DEFAULT_BOOTSTRAP_SEED: u64 = 20_240_601;

/// Matched-pairs rank-biserial correlation `(W+ − W−) / (n(n+1)/2)`.
pub fn rank_biserial_point(diffs: &[f64], policy: ZeroPolicy) -> Result<f64> {
    let stat = signed_rank_statistic(diffs, policy)?;
    let total = stat.w_plus + stat.w_minus;
    Ok((stat.w_plus - stat.w_minus) / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    pub confidence: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { resamples: DEFAULT_BOOTSTRAP_RESAMPLES, seed: DEFAULT_BOOTSTRAP_SEED, confidence: 0.95 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectWithCi {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Rank-biserial correlation with a percentile bootstrap interval over
/// resampled pairs. Resamples whose differences are all zero count as 0.
pub fn rank_biserial(sample: &PairedSample, policy: ZeroPolicy, boot: &BootstrapConfig) -> Result<EffectWithCi> {
    let diffs = sample.differences();
    let estimate = rank_biserial_point(&diffs, policy)?;
    if boot.resamples == 0 {
        return Ok(EffectWithCi { estimate, ci_low: estimate, ci_high: estimate });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(boot.seed);
    let n = diffs.len();
    let mut draw = vec![0.0; n];
    let mut stats = Vec::with_capacity(boot.resamples);
    for _ in 0..boot.resamples {
        for slot in draw.iter_mut() {
            *slot = diffs[rng.random_range(0..n)];
        }
        stats.push(rank_biserial_point(&draw, policy).unwrap_or(0.0));
    }
    let alpha = (1.0 - boot.confidence) / 2.0;
    Ok(EffectWithCi {
        estimate,
        ci_low: percentile(&stats, 100.0 * alpha),
        ci_high: percentile(&stats, 100.0 * (1.0 - alpha)),
    })
}

/// Paired Cohen's d: mean of `post − pre` over its sample SD.
pub fn cohens_d(pre: &[f64], post: &[f64]) -> Result<f64> {
    if pre.len() != post.len() {
        return Err(Error::InvalidParameter(format!("length mismatch {} vs {}", pre.len(), post.len())));
    }
    if pre.len() < 2 {
        return Err(Error::InvalidParameter("Cohen's d needs at least 2 pairs".into()));
    }
    let diffs: Vec<f64> = pre.iter().zip(post).map(|(a, b)| b - a).collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::ZeroVariance("differences have zero standard deviation".into()));
    }
    Ok(mean / sd)
}
