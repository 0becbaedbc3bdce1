//! Least-squares lines through (log x, log y) samples.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZrError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Sample points in log space, `(ln x, ln y)`.
    pub points: Vec<(f64, f64)>,
}

impl FitResult {
    pub fn predict(&self, log_x: f64) -> f64 {
        self.intercept + self.slope * log_x
    }
}

/// Ordinary least squares `y = intercept + slope·x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(ZrError::Constraint(format!(
            "a fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(ZrError::NumericalHealth("non-finite fit sample".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ZrError::Constraint("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    // a constant series is fitted exactly
    let r_squared = if syy <= f64::EPSILON * n * my.abs().max(1.0).powi(2) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        points: points.to_vec(),
    })
}

/// Fits `ln y = intercept + slope · ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(ZrError::Constraint("fit series differ in length".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(ZrError::Constraint("log-log fit needs positive samples".into()));
    }
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    linear_fit(&pts)
}
