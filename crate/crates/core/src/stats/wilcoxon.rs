//! Paired Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Paired observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
    pub labels: Vec<String>,
}

impl PairedSample {
    pub fn new(pre: Vec<f64>, post: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if pre.is_empty() || pre.len() != post.len() {
            return Err(Error::InvalidParameter(format!(
                "paired sample needs equal nonzero lengths, got {} and {}",
                pre.len(),
                post.len()
            )));
        }
        if !labels.is_empty() && labels.len() != pre.len() {
            return Err(Error::InvalidParameter("label count differs from pair count".into()));
        }
        if pre.iter().chain(&post).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("paired sample contains non-finite values".into()));
        }
        Ok(Self { pre, post, labels })
    }

    /// Unlabelled sample from differences, as `pre = 0`, `post = d`.
    pub fn from_differences(diffs: &[f64]) -> Result<Self> {
        Self::new(vec![0.0; diffs.len()], diffs.to_vec(), Vec::new())
    }

    /// `post − pre` per pair.
    pub fn differences(&self) -> Vec<f64> {
        self.pre.iter().zip(&self.post).map(|(a, b)| b - a).collect()
    }

    pub fn len(&self) -> usize {
        self.pre.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pre.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// Drop zero differences before ranking.
    Wilcoxon,
    /// Rank zeros with the rest, then drop their ranks.
    Pratt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    NormalApprox,
}

/// Largest effective sample size for which the exact null distribution is used.
pub const EXACT_MAX_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedRankStatistic {
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(W+, W−)`
    pub w: f64,
    pub n_effective: usize,
    pub n_zero: usize,
    pub has_ties: bool,
    /// `Σ (t³ − t)` over tie groups of |differences|.
    pub tie_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedRankTest {
    pub statistic: SignedRankStatistic,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Average ranks (1-based) of `values`, plus the tie term.
pub fn average_ranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    (ranks, tie_term)
}

pub fn signed_rank_statistic(diffs: &[f64], policy: ZeroPolicy) -> Result<SignedRankStatistic> {
    let n_zero = diffs.iter().filter(|&&d| d == 0.0).count();
    if n_zero == diffs.len() {
        return Err(Error::DegenerateSample("all differences are zero".into()));
    }
    let (ranked, zero_mask): (Vec<f64>, Vec<bool>) = match policy {
        ZeroPolicy::Wilcoxon => (diffs.iter().copied().filter(|&d| d != 0.0).collect(), Vec::new()),
        ZeroPolicy::Pratt => (diffs.to_vec(), diffs.iter().map(|&d| d == 0.0).collect()),
    };
    let abs: Vec<f64> = ranked.iter().map(|d| d.abs()).collect();
    let (ranks, _) = average_ranks(&abs);
    let nonzero_abs: Vec<f64> = ranked.iter().filter(|&&d| d != 0.0).map(|d| d.abs()).collect();
    let (_, tie_term) = average_ranks(&nonzero_abs);

    let mut w_plus = 0.0;
    let mut w_minus = 0.0;
    for (i, (&d, &r)) in ranked.iter().zip(&ranks).enumerate() {
        if zero_mask.get(i).copied().unwrap_or(false) {
            continue;
        }
        if d > 0.0 {
            w_plus += r;
        } else {
            w_minus += r;
        }
    }
    Ok(SignedRankStatistic {
        w_plus,
        w_minus,
        w: w_plus.min(w_minus),
        n_effective: diffs.len() - n_zero,
        n_zero,
        has_ties: tie_term > 0.0,
        tie_term,
    })
}

/// Counts of subsets of `{1..n}` with each possible rank sum.
pub fn exact_null_counts(n: usize) -> Vec<u64> {
    let max = n * (n + 1) / 2;
    let mut counts = vec![0u64; max + 1];
    counts[0] = 1;
    for rank in 1..=n {
        for s in (rank..=max).rev() {
            counts[s] += counts[s - rank];
        }
    }
    counts
}

/// Two-sided exact p-value `2·P(T ≤ w)` under the signed-rank null, capped at 1.
pub fn exact_p_value(w: f64, n: usize) -> f64 {
    let counts = exact_null_counts(n);
    let total = 2f64.powi(n as i32);
    let upto = w.floor() as usize;
    let tail: u64 = counts.iter().take(upto + 1).sum();
    (2.0 * tail as f64 / total).min(1.0)
}

/// Normal approximation with tie correction and continuity correction.
pub fn normal_p_value(stat: &SignedRankStatistic) -> f64 {
    let n = stat.n_effective as f64;
    let mean = n * (n + 1.0) / 4.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - stat.tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((stat.w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::standard();
    (2.0 * (1.0 - normal.cdf(z))).min(1.0)
}

/// Two-sided test. Exact when `n_effective ≤ 20` with no ties and the
/// Wilcoxon zero policy; normal approximation otherwise.
pub fn wilcoxon_signed_rank(sample: &PairedSample, policy: ZeroPolicy) -> Result<SignedRankTest> {
    let diffs = sample.differences();
    let statistic = signed_rank_statistic(&diffs, policy)?;
    let exact = statistic.n_effective <= EXACT_MAX_N && !statistic.has_ties && policy == ZeroPolicy::Wilcoxon;
    let (p_value, method) = if exact {
        (exact_p_value(statistic.w, statistic.n_effective), PValueMethod::Exact)
    } else {
        (normal_p_value(&statistic), PValueMethod::NormalApprox)
    };
    Ok(SignedRankTest { statistic, p_value, method })
}
