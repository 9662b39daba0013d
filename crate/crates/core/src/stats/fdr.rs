use crate::error::{Error, Result};

/// Benjamini–Hochberg step-up adjusted p-values, in input order.
pub fn bh_fdr(p_values: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::PValueOutOfRange(bad));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0_f64;
    for (pos, &idx) in order.iter().enumerate().rev() {
        let rank = (pos + 1) as f64;
        running = running.min(p_values[idx] * (m as f64 / rank));
        // rounding can land a hair under the raw value
        adjusted[idx] = running.max(p_values[idx]).min(1.0);
    }
    Ok(adjusted)
}
