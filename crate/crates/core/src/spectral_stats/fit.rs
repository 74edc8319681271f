use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least squares y ≈ slope·x + intercept; returns
/// (slope, intercept, root-mean-square residual).
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LifshitzFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

/// Fit ln(−ln v) against ln(E − E₀) over `(offset, value)` pairs.
pub fn fit_lifshitz_exponent(data: &[(f64, f64)]) -> Result<LifshitzFit> {
    if data.len() < 2 {
        return Err(Error::Domain(format!("need at least 2 points, got {}", data.len())));
    }
    let mut pts = Vec::with_capacity(data.len());
    for &(x, v) in data {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("energy offset must be positive, got {x}")));
        }
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("value must lie in (0, 1), got {v} at offset {x}")));
        }
        pts.push((x.ln(), (-v.ln()).ln()));
    }
    let (slope, intercept, residual) = least_squares(&pts);
    Ok(LifshitzFit {
        slope,
        intercept,
        residual,
        points: pts.len(),
    })
}
