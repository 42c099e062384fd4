//! Least-squares fits for scaling laws.

use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let slope_stderr = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, slope_stderr, r2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr: f64,
    pub r2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

fn usable(pairs: &[(f64, f64)], need_positive_value: bool) -> Result<Vec<(f64, f64)>, LabError> {
    let kept: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(n, v)| {
            let ok = n > 0.0 && v.is_finite() && (!need_positive_value || v > 0.0);
            if !ok {
                log::warn!("excluding point ({n}, {v}) from fit");
            }
            ok
        })
        .collect();
    let mut ns: Vec<f64> = kept.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 3 {
        return Err(LabError::Config(format!("fit needs at least 3 distinct N, got {}", ns.len())));
    }
    Ok(kept)
}

/// `value ≈ prefactor · N^exponent` by least squares on log-log axes.
/// Nonpositive values are dropped with a warning.
pub fn fit_power_law(pairs: &[(f64, f64)]) -> Result<PowerFit, LabError> {
    let kept = usable(pairs, true)?;
    let x: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let f = linear_fit(&x, &y);
    Ok(PowerFit { exponent: f.slope, prefactor: f.intercept.exp(), stderr: f.slope_stderr, r2: f.r2 })
}

/// Regresses `value²/N` on `ln N`. A positive slope means growth faster
/// than `√N` by a logarithmic factor; `value = √(N ln N)` gives slope 1.
pub fn fit_sqrtlog(pairs: &[(f64, f64)]) -> Result<SqrtLogFit, LabError> {
    let kept = usable(pairs, false)?;
    let x: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.1 * p.1 / p.0).collect();
    let f = linear_fit(&x, &y);
    Ok(SqrtLogFit { slope: f.slope, intercept: f.intercept, r2: f.r2 })
}
