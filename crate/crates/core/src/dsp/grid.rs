//! Aggregation of time-stamped values onto a shared fixed grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on consecutive `grid_ms` bins. Bin `k` covers
/// `[k·grid, (k+1)·grid)` on the shared clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSeries {
    pub grid_ms: f64,
    pub start_bin: i64,
    pub values: Vec<f64>,
    /// True where the bin had no samples and carries the previous value.
    pub carried: Vec<bool>,
}

impl GridSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_bin(&self) -> i64 {
        self.start_bin + self.values.len() as i64
    }

    pub fn bin_start_s(&self, index: usize) -> f64 {
        (self.start_bin + index as i64) as f64 * self.grid_ms / 1000.0
    }

    pub fn get_bin(&self, bin: i64) -> Option<f64> {
        let i = bin - self.start_bin;
        (0..self.values.len() as i64).contains(&i).then(|| self.values[i as usize])
    }

    /// Both series restricted to their common bin span.
    pub fn align(&self, other: &GridSeries) -> Result<(Vec<f64>, Vec<f64>, i64)> {
        if self.grid_ms != other.grid_ms {
            return Err(Error::InvalidParameter(format!(
                "grid mismatch: {} ms vs {} ms",
                self.grid_ms, other.grid_ms
            )));
        }
        let start = self.start_bin.max(other.start_bin);
        let end = self.end_bin().min(other.end_bin());
        if end <= start {
            return Ok((Vec::new(), Vec::new(), start));
        }
        let take = |g: &GridSeries| {
            let a = (start - g.start_bin) as usize;
            let b = (end - g.start_bin) as usize;
            g.values[a..b].to_vec()
        };
        Ok((take(self), take(other), start))
    }
}

/// Mean-aggregate `(time_s, value)` pairs into `grid_ms` bins.
pub fn resample_to_grid(series: &[(f64, f64)], grid_ms: f64) -> Result<GridSeries> {
    if series.is_empty() {
        return Err(Error::EmptyInput("series to resample".into()));
    }
    if !(grid_ms.is_finite() && grid_ms > 0.0) {
        return Err(Error::InvalidParameter(format!("grid_ms must be positive, got {grid_ms}")));
    }
    if series.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidParameter("series is not time-ordered".into()));
    }
    let grid_s = grid_ms / 1000.0;
    let bin_of = |t: f64| (t / grid_s).floor() as i64;
    let start_bin = bin_of(series[0].0);
    let end_bin = bin_of(series[series.len() - 1].0) + 1;
    let n = (end_bin - start_bin) as usize;
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for &(t, v) in series {
        let i = (bin_of(t) - start_bin) as usize;
        sums[i] += v;
        counts[i] += 1;
    }
    let mut values = Vec::with_capacity(n);
    let mut carried = Vec::with_capacity(n);
    let mut last = 0.0;
    for (sum, count) in sums.into_iter().zip(counts) {
        if count > 0 {
            last = sum / count as f64;
            carried.push(false);
        } else {
            carried.push(true);
        }
        values.push(last);
    }
    Ok(GridSeries { grid_ms, start_bin, values, carried })
}
