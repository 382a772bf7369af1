use serde::Serialize;

use super::summary::mean;
use super::{all_finite, StatsError};

/// Normal quantile for a two-sided 95% interval.
const Z_975: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, found: x.len() });
    }
    all_finite(x)?;
    all_finite(y)?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// 95% interval for a correlation via the Fisher z transform.
pub fn fisher_ci(r: f64, n: usize) -> Result<(f64, f64), StatsError> {
    if n < 4 {
        return Err(StatsError::TooFew { needed: 4, found: n });
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(StatsError::InvalidArgument(format!("correlation {r} outside [-1, 1]")));
    }
    let z = r.atanh();
    let half = Z_975 / ((n - 3) as f64).sqrt();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

pub fn pearson_ci(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() == y.len() && x.len() < 4 {
        return Err(StatsError::TooFew { needed: 4, found: x.len() });
    }
    let r = pearson(x, y)?;
    let (ci_low, ci_high) = fisher_ci(r, x.len())?;
    Ok(CorrelationResult {
        r,
        ci_low,
        ci_high,
        n: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson_ci(&x, &y).unwrap();
        assert_eq!(c.r, 1.0);
        assert_eq!(c.ci_high, 1.0);
    }

    #[test]
    fn zero_correlation_interval() {
        // tanh(1.96 / sqrt(47))
        let (lo, hi) = fisher_ci(0.0, 50).unwrap();
        assert!((hi - 0.278353).abs() < 1e-6, "{hi}");
        assert_eq!(lo, -hi);
    }

    #[test]
    fn errors() {
        assert_eq!(pearson_ci(&[1.0; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]), Err(StatsError::ZeroVariance));
        assert!(matches!(
            pearson_ci(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]),
            Err(StatsError::TooFew { .. })
        ));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(StatsError::LengthMismatch { .. })));
    }
}
