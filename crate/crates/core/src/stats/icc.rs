use serde::Serialize;

use super::distributions::f_quantile;
use super::StatsError;

/// Two-way random effects, absolute agreement, single measurement.
pub const ICC_MODEL: &str = "ICC(2,1)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IccResult {
    pub icc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub model: &'static str,
    pub n_subjects: usize,
    pub n_trials: usize,
}

/// ICC(2,1) of a subjects × trials table with a 95% interval from F quantiles.
pub fn icc(table: &[Vec<f64>]) -> Result<IccResult, StatsError> {
    let n = table.len();
    let k = table.first().map_or(0, Vec::len);
    if n < 2 || k < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            found: n.min(k),
        });
    }
    if table.iter().any(|row| row.len() != k || row.iter().any(|v| !v.is_finite())) {
        return Err(StatsError::IncompleteMatrix);
    }
    let first = table[0][0];
    if table.iter().flatten().all(|&v| v == first) {
        return Err(StatsError::DegenerateVariance);
    }
    let result = |icc, ci_low, ci_high| IccResult {
        icc,
        ci_low,
        ci_high,
        model: ICC_MODEL,
        n_subjects: n,
        n_trials: k,
    };
    // No within-subject variation but subjects differ: perfect agreement.
    if table.iter().all(|row| row.iter().all(|&v| v == row[0])) {
        return Ok(result(1.0, 1.0, 1.0));
    }

    let (nf, kf) = (n as f64, k as f64);
    let grand = table.iter().flatten().sum::<f64>() / (nf * kf);
    let row_means: Vec<f64> = table.iter().map(|r| r.iter().sum::<f64>() / kf).collect();
    let col_means: Vec<f64> = (0..k).map(|j| table.iter().map(|r| r[j]).sum::<f64>() / nf).collect();

    let ss_rows = kf * row_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|m| (m - grand).powi(2)).sum::<f64>();
    let mut ss_err = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            ss_err += (x - row_means[i] - col_means[j] + grand).powi(2);
        }
    }
    let msr = ss_rows / (nf - 1.0);
    let msc = ss_cols / (kf - 1.0);
    let mse = ss_err / ((nf - 1.0) * (kf - 1.0));

    let denom = msr + (kf - 1.0) * mse + kf * (msc - mse) / nf;
    if denom <= 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let icc = (msr - mse) / denom;

    // Satterthwaite degrees of freedom for the interval.
    let base = nf * (1.0 + (kf - 1.0) * icc) - kf * icc;
    let v = if mse > 0.0 {
        let fj = msc / mse;
        let vn = (kf - 1.0) * (nf - 1.0) * (kf * icc * fj + base).powi(2);
        let vd = (nf - 1.0) * (kf * icc * fj).powi(2) + base.powi(2);
        vn / vd
    } else {
        kf - 1.0
    };
    let f_upper = f_quantile(0.975, nf - 1.0, v)?;
    let f_lower = f_quantile(0.975, v, nf - 1.0)?;
    let spread = kf * msc + (kf * nf - kf - nf) * mse;
    let ci_low = nf * (msr - f_upper * mse) / (f_upper * spread + nf * msr);
    let ci_high = nf * (f_lower * msr - mse) / (spread + nf * f_lower * msr);
    Ok(result(icc, ci_low, ci_high))
}
