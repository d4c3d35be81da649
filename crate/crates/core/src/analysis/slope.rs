use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line through `(ln N, ln mse)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the points from the line.
    pub residual: f64,
}

pub fn fit_slope(data: &[(usize, f64)]) -> Result<SlopeFit> {
    if data.len() < 4 {
        return Err(Error::invalid("records", format!("need at least 4 points, got {}", data.len())));
    }
    if let Some((n, v)) = data.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid("mse", format!("non-positive or non-finite value {v} at N={n}")));
    }
    let points: Vec<(f64, f64)> = data.iter().map(|&(n, v)| ((n as f64).ln(), v.ln())).collect();
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("records", "all N are equal"));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(SlopeFit { points, slope, intercept, residual })
}
