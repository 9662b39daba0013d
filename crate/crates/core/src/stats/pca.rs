//! Principal component analysis by eigendecomposition of the covariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::eigen::symmetric_eigen;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    /// Unit loading vectors, one per component, in decreasing variance order.
    /// The largest-magnitude entry of each is positive.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Coordinates of each observation in component space.
    pub scores: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    /// Column divisors applied before decomposition (1 without standardization).
    pub scales: Vec<f64>,
    pub standardized: bool,
}

impl PcaResult {
    /// Processed (centered, optionally scaled) data rebuilt from all components.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        self.scores
            .iter()
            .map(|score| {
                (0..self.means.len())
                    .map(|j| score.iter().zip(&self.components).map(|(s, c)| s * c[j]).sum())
                    .collect()
            })
            .collect()
    }
}

/// PCA of an observations × features matrix. With `standardize`, columns are
/// z-scored with the sample SD; the covariance uses an n − 1 denominator.
pub fn pca(matrix: &[Vec<f64>], standardize: bool) -> Result<PcaResult> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("PCA needs at least 2 observations, got {n}")));
    }
    let p = matrix[0].len();
    if p < 2 {
        return Err(Error::InvalidParameter(format!("PCA needs at least 2 features, got {p}")));
    }
    if matrix.iter().any(|row| row.len() != p) {
        return Err(Error::InvalidParameter("ragged observation matrix".into()));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("matrix contains missing or non-finite values".into()));
    }

    let means: Vec<f64> = (0..p).map(|j| matrix.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let scales: Vec<f64> = if standardize {
        (0..p)
            .map(|j| {
                let sd = (matrix.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
                if sd == 0.0 {
                    Err(Error::ZeroVariance(format!("column {j} is constant")))
                } else {
                    Ok(sd)
                }
            })
            .collect::<Result<_>>()?
    } else {
        vec![1.0; p]
    };
    let data: Vec<Vec<f64>> =
        matrix.iter().map(|r| (0..p).map(|j| (r[j] - means[j]) / scales[j]).collect()).collect();

    let cov: Vec<Vec<f64>> = (0..p)
        .map(|a| (0..p).map(|b| data.iter().map(|r| r[a] * r[b]).sum::<f64>() / (n - 1) as f64).collect())
        .collect();

    let (eigenvalues, mut components) = symmetric_eigen(&cov);
    for c in components.iter_mut() {
        let lead = c.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let clamped: Vec<f64> = eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVariance("data has zero total variance".into()));
    }
    let explained_variance_ratio = clamped.iter().map(|l| l / total).collect();
    let scores = data
        .iter()
        .map(|row| components.iter().map(|c| c.iter().zip(row).map(|(a, b)| a * b).sum()).collect())
        .collect();

    Ok(PcaResult { components, eigenvalues, explained_variance_ratio, scores, means, scales, standardized: standardize })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_on_a_line() {
        let m: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let res = pca(&m, false).unwrap();
        assert!((res.explained_variance_ratio[0] - 1.0).abs() < 1e-9);
        assert!(res.explained_variance_ratio[1].abs() < 1e-9);
    }

    #[test]
    fn sign_convention() {
        let m: Vec<Vec<f64>> = (0..6).map(|i| vec![-(i as f64), -2.0 * i as f64]).collect();
        let res = pca(&m, true).unwrap();
        for c in &res.components {
            let lead = c.iter().copied().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn constant_column_rejected_when_standardizing() {
        let m = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        assert!(matches!(pca(&m, true), Err(Error::ZeroVariance(_))));
        assert!(pca(&m, false).is_ok());
    }

    #[test]
    fn shape_errors() {
        assert!(pca(&[vec![1.0, 2.0]], true).is_err());
        assert!(pca(&[vec![1.0], vec![2.0]], true).is_err());
        assert!(pca(&[vec![1.0, 2.0], vec![f64::NAN, 1.0]], true).is_err());
    }
}
