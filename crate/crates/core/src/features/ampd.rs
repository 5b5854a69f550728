//! Automatic multiscale-based peak detection (AMPD).
//!
//! For each scale k the local-maxima scalogram marks samples that exceed
//! both neighbours at distance k. The scale with the most maxima (the
//! minimum row sum of the non-maximum indicator) bounds the search, and a
//! peak is any sample that is a maximum at every scale up to it. Near the
//! edges the window is clipped: only in-range neighbours are compared, and
//! the two end samples are never peaks.

use crate::error::{Error, Result};

/// Strictly increasing sample indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PeakList(pub Vec<usize>);

impl PeakList {
    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Residual of a least-squares line fit.
pub fn detrend(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let t_mean = (n - 1) as f64 / 2.0;
    let y_mean = x.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &y) in x.iter().enumerate() {
        let dt = i as f64 - t_mean;
        sxy += dt * (y - y_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    x.iter()
        .enumerate()
        .map(|(i, &y)| (y - y_mean) - slope * (i as f64 - t_mean))
        .collect()
}

#[inline]
fn is_clipped_max_at(y: &[f64], i: usize, k: usize) -> bool {
    (i < k || y[i] > y[i - k]) && (i + k >= y.len() || y[i] > y[i + k])
}

#[inline]
fn is_max_at(y: &[f64], i: usize, k: usize) -> bool {
    i >= k && i + k < y.len() && y[i] > y[i - k] && y[i] > y[i + k]
}

pub fn ampd_peaks(x: &[f64]) -> Result<PeakList> {
    if x.len() < 8 {
        return Err(Error::InvalidInput(format!("AMPD needs at least 8 samples, got {}", x.len())));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("sample {i} is not finite")));
    }
    let y = detrend(x);
    let n = y.len();
    let max_scale = n.div_ceil(2) - 1;

    let mut best_scale = 0;
    let mut best_count = 0;
    for k in 1..=max_scale {
        let count = (k..n - k).filter(|&i| is_max_at(&y, i, k)).count();
        if count > best_count {
            best_count = count;
            best_scale = k;
        }
    }
    if best_count == 0 {
        return Ok(PeakList::default());
    }
    let peaks = (1..n - 1)
        .filter(|&i| (1..=best_scale).all(|k| is_clipped_max_at(&y, i, k)))
        .collect();
    Ok(PeakList(peaks))
}

/// Mean heart rate in beats per minute from peak spacing.
pub fn heart_rate(peaks: &PeakList, fs: f64) -> Result<f64> {
    let p = peaks.indices();
    if p.len() < 2 {
        return Err(Error::InsufficientPeaks { found: p.len() });
    }
    if !(fs > 0.0) {
        return Err(Error::InvalidInput(format!("sampling rate must be positive, got {fs}")));
    }
    let mean_interval = (p[p.len() - 1] - p[0]) as f64 / (p.len() - 1) as f64;
    Ok(60.0 * fs / mean_interval)
}
