use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 0 by convention when `y` is constant.
    pub r_squared: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<FitResult> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateX);
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateX);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) } else { 0.0 };
    Ok(FitResult { slope, intercept, r_squared, n_points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f = fit_loglog(&[(0.0, 0.0), (1.0, 2.0)]).unwrap();
        assert_eq!((f.slope, f.intercept, f.r_squared), (2.0, 0.0, 1.0));
        let f = fit_loglog(&[(0.0, 1.0), (2.0, -2.0), (4.0, -5.0)]).unwrap();
        assert_eq!(f.slope, -1.5);
        let f = fit_loglog(&[(0.0, 3.0), (1.0, 3.0), (5.0, 3.0)]).unwrap();
        assert_eq!((f.slope, f.r_squared), (0.0, 0.0));
        assert!(matches!(fit_loglog(&[(1.0, 0.0), (1.0, 2.0)]), Err(Error::DegenerateX)));
    }

    #[test]
    fn exact_rate_law() {
        let pts: Vec<(f64, f64)> = (8..16)
            .map(|e| {
                let n = (1u64 << e) as f64;
                let x = (n.ln() / n).ln();
                (x, 2.0 / 3.0 * x)
            })
            .collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope - 2.0 / 3.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    }
}
