//! Least-squares line fits used for decay rates and tail exponents.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination.
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares `y = slope * x + intercept`; `None` with fewer
/// than two distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let m = points.len();
    if m < 2 {
        return None;
    }
    let mf = m as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / mf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: m,
    })
}

/// Fit of `ln y = p ln(1 + t) + c`; samples with `y <= 0` are skipped.
pub fn power_law_fit(ts: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0)
        .map(|(t, y)| ((1.0 + t).ln(), y.ln()))
        .collect();
    linear_fit(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_line_and_power() {
        let f = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        let ts = [10.0, 100.0, 1000.0];
        let ys: Vec<f64> = ts.iter().map(|t: &f64| 3.0 * (1.0 + t).powf(-1.5)).collect();
        assert!((power_law_fit(&ts, &ys).unwrap().slope + 1.5).abs() < 1e-12);
        assert!(linear_fit(&[(1.0, 2.0)]).is_none());
    }
}
