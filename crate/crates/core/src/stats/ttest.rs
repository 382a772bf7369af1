use serde::Serialize;

use super::distributions::t_two_tailed_p;
use super::summary::{mean, sample_sd};
use super::{all_finite, StatsError};

/// How the two samples were paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Element i of one sample with element i of the other.
    ByPosition,
    /// Each patient with the control named in its record.
    MatchedControl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: f64,
    /// Two-tailed.
    pub p: f64,
    pub n: usize,
    pub pairing: Pairing,
}

/// Paired t-test on `x - y`.
pub fn paired_t(x: &[f64], y: &[f64]) -> Result<TTestResult, StatsError> {
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
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    if d.iter().all(|&v| v == d[0]) {
        return Err(StatsError::ZeroVarianceDifferences);
    }
    let n = d.len() as f64;
    let t = mean(&d) / (sample_sd(&d) / n.sqrt());
    let df = n - 1.0;
    let p = t_two_tailed_p(t, df)?.clamp(f64::MIN_POSITIVE, 1.0);
    Ok(TTestResult {
        t,
        df,
        p,
        n: d.len(),
        pairing: Pairing::ByPosition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_degenerate() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(paired_t(&x, &x), Err(StatsError::ZeroVarianceDifferences));
    }

    #[test]
    fn swapping_negates_t() {
        let x = [0.48, 1.23, 0.82, 0.48, 0.64];
        let y = [1.35, 1.12, 1.12, 0.97, 1.38];
        let a = paired_t(&x, &y).unwrap();
        let b = paired_t(&y, &x).unwrap();
        assert_eq!(a.t, -b.t);
        assert_eq!(a.p, b.p);
        assert_eq!(a.df, 4.0);
    }

    #[test]
    fn hand_computed() {
        // d = [1, 2, 3, 4]: mean 2.5, sd sqrt(5/3), t = 2.5 / (sd / 2)
        let r = paired_t(&[2.0, 4.0, 6.0, 8.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r.t - 2.5 / ((5.0f64 / 3.0).sqrt() / 2.0)).abs() < 1e-12);
        assert!(r.p > 0.0 && r.p < 0.05);
    }
}
