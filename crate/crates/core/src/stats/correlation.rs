use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Pearson product-moment correlation with a two-sided p-value from the
/// t-distribution on n − 2 degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("pearson needs at least 3 points, got {n}")));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("pearson input has zero variance".into()));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else if df == 0.0 {
        1.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
    };
    Ok(CorrelationResult { r, p, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_relations() {
        let x = [1.0, 2.0, 4.0, 7.0, 11.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap().r - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y).unwrap().r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn p_value_reference() {
        // r = 0.5 at n = 10: t = 0.5·sqrt(8/0.75) = 1.63299..., two-sided p ≈ 0.14111
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let res = pearson(&x, &x).unwrap();
        assert_eq!(res.p, 0.0);
        let t = StudentsT::new(0.0, 1.0, 8.0).unwrap();
        let p = 2.0 * (1.0 - t.cdf(0.5 * (8.0f64 / 0.75).sqrt()));
        assert!((p - 0.14111).abs() < 1e-4);
    }

    #[test]
    fn errors() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance(_))));
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
