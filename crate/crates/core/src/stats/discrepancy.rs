//! Comparison of recomputed statistics with a reference table.
//!
//! A reference file is CSV with header `statistic,index,value`, e.g.
//! `control_mean,v_n,1.2`. A recomputed value agrees with a reference when it
//! rounds to the reference at the reference's printed precision; references
//! in scientific notation are compared by order of magnitude.

use std::fmt;

use super::tables::{CohortStats, StatKind};
use crate::kinematics::IndexKind;
use crate::report::format_sig;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue {
    pub statistic: StatKind,
    pub index: IndexKind,
    /// As printed, so its precision is known.
    pub text: String,
    pub value: f64,
}

impl ReferenceValue {
    /// Whether `x` is indistinguishable from this value at its printed precision.
    pub fn agrees_with(&self, x: f64) -> bool {
        let text = self.text.trim();
        if text.contains(['e', 'E']) {
            return x > 0.0 && self.value > 0.0 && x.log10().floor() == self.value.log10().floor();
        }
        let decimals = text.split_once('.').map_or(0, |(_, frac)| frac.len());
        let half_unit = 0.5 * 10f64.powi(-(decimals as i32));
        (x - self.value).abs() <= half_unit * (1.0 + 1e-9)
    }
}

pub fn parse_reference(text: &str) -> Result<Vec<ReferenceValue>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("reference table lacks a `{name}` column"))
    };
    let (cs, ci, cv) = (col("statistic")?, col("index")?, col("value")?);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        let at = |i: usize| record.get(i).unwrap_or("");
        let text = at(cv).to_owned();
        let value = text
            .parse::<f64>()
            .map_err(|_| format!("reference row {}: `{text}` is not a number", row + 1))?;
        out.push(ReferenceValue {
            statistic: at(cs).parse().map_err(|e| format!("reference row {}: {e}", row + 1))?,
            index: at(ci).parse().map_err(|e| format!("reference row {}: {e}", row + 1))?,
            text,
            value,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discrepancy {
    pub reference: ReferenceValue,
    /// Recomputed value, or the reason the cell could not be computed.
    pub recomputed: Result<f64, String>,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.reference;
        match &self.recomputed {
            Ok(v) => write!(
                f,
                "{} {}: recomputed {} vs reference {}",
                r.statistic,
                r.index,
                format_sig(*v),
                r.text
            ),
            Err(e) => write!(f, "{} {}: not recomputed ({e}); reference {}", r.statistic, r.index, r.text),
        }
    }
}

/// Reference cells the recomputation disagrees with or could not produce, in
/// reference-file order.
pub fn compare_to_reference(stats: &CohortStats, reference: &[ReferenceValue]) -> Vec<Discrepancy> {
    reference
        .iter()
        .filter_map(|r| {
            let recomputed = stats.get(r.index).value(r.statistic).map_err(|e| e.to_string());
            match recomputed {
                Ok(v) if r.agrees_with(v) => None,
                other => Some(Discrepancy {
                    reference: r.clone(),
                    recomputed: other,
                }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(text: &str) -> ReferenceValue {
        ReferenceValue {
            statistic: StatKind::MsMean,
            index: IndexKind::NormalizedVelocity,
            text: text.into(),
            value: text.parse().unwrap(),
        }
    }

    #[test]
    fn printed_precision() {
        assert!(reference("1.2").agrees_with(1.217));
        assert!(reference("0.14").agrees_with(0.1376));
        assert!(!reference("0.4").agrees_with(0.668));
        assert!(reference("236").agrees_with(235.6));
    }

    #[test]
    fn scientific_by_magnitude() {
        assert!(!reference("1e-6").agrees_with(2.2e-4));
        assert!(reference("1e-4").agrees_with(3.0e-4));
    }

    #[test]
    fn parses_long_format() {
        let refs = parse_reference("statistic,index,value\ncontrol_mean,v_n,1.2\n# note\nt_p_value,d_h,0.0026\n").unwrap();
        assert_eq!(refs.len(), 2);
        assert_eq!(refs[1].statistic, StatKind::TPValue);
        assert_eq!(refs[1].index, IndexKind::HipMeanDtw);
        assert!(parse_reference("statistic,index,value\nbogus,v_n,1\n").is_err());
    }
}
