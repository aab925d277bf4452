use serde::Serialize;

use crate::error::{Error, Result};

/// Log-linear fit `value ≈ c_hat · q_hat^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub q_hat: f64,
    pub c_hat: f64,
    pub r_squared: f64,
    /// First and last `n` of the fitted window, inclusive.
    pub window: (usize, usize),
    pub points: usize,
    /// Set when `ln value` is constant on the window, so `r²` carries no information.
    pub degenerate: bool,
}

pub const MIN_FIT_POINTS: usize = 4;

/// Least squares on `(n, ln value)` over the first contiguous run of points
/// strictly above `noise_floor`.
pub fn fit_exponential(series: &[(usize, f64)], noise_floor: f64) -> Result<RateFit> {
    let start = series.iter().position(|(_, v)| *v > noise_floor && *v > 0.0);
    let window: Vec<(f64, f64)> = match start {
        Some(s) => series[s..]
            .iter()
            .take_while(|(_, v)| *v > noise_floor && *v > 0.0)
            .map(|(n, v)| (*n as f64, v.ln()))
            .collect(),
        None => Vec::new(),
    };
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { available: window.len(), required: MIN_FIT_POINTS });
    }
    let s = start.unwrap();
    let len = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / len;
    let my = window.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = window.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = window.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = window.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let degenerate = syy <= f64::EPSILON * my.abs().max(1.0) * len;
    let r_squared = if degenerate { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    Ok(RateFit {
        q_hat: slope.exp(),
        c_hat: intercept.exp(),
        r_squared,
        window: (series[s].0, series[s + window.len() - 1].0),
        points: window.len(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_geometric_series() {
        let series: Vec<(usize, f64)> = (0..=10).map(|n| (n, 8.0 * 0.5f64.powi(n as i32))).collect();
        let fit = fit_exponential(&series, 0.0).unwrap();
        assert!((fit.q_hat - 0.5).abs() < 1e-9);
        assert!((fit.c_hat - 8.0).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
        assert_eq!(fit.window, (0, 10));
        assert!(!fit.degenerate);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let series: Vec<(usize, f64)> = (0..8).map(|n| (n, 0.3)).collect();
        let fit = fit_exponential(&series, 0.0).unwrap();
        assert!((fit.q_hat - 1.0).abs() < 1e-12);
        assert!(fit.degenerate);
    }

    #[test]
    fn window_stops_at_floor() {
        // 2·0.7^n crosses 0.1 between n = 8 (0.115) and n = 9 (0.081)
        let series: Vec<(usize, f64)> = (0..20).map(|n| (n, 2.0 * 0.7f64.powi(n as i32))).collect();
        let fit = fit_exponential(&series, 0.1).unwrap();
        assert_eq!(fit.window, (0, 8));
        assert_eq!(fit.points, 9);
        assert!((fit.q_hat - 0.7).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let series = [(0, 1.0), (1, 0.5), (2, 0.25), (3, 0.0)];
        assert!(matches!(fit_exponential(&series, 0.0), Err(Error::InsufficientData { available: 3, .. })));
    }
}
