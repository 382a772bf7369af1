use serde::Serialize;

use super::{all_finite, StatsError};
use crate::kinematics::IndexKind;
use crate::skeletal_io::Group;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: Group,
    pub index: IndexKind,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
    pub n: usize,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation; `values` must hold at least two entries.
pub fn sample_sd(values: &[f64]) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

pub fn group_summary(values: &[f64], group: Group, index: IndexKind) -> Result<GroupSummary, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFew {
            needed: 2,
            found: values.len(),
        });
    }
    all_finite(values)?;
    let first = values[0];
    // Identical inputs get exact zero spread, not rounding residue.
    let (mean, sd) = if values.iter().all(|&v| v == first) {
        (first, 0.0)
    } else {
        (mean(values), sample_sd(values))
    };
    Ok(GroupSummary {
        group,
        index,
        mean,
        sd,
        n: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_velocity_column() {
        let v = [1.35, 1.12, 1.12, 0.97, 1.38, 1.25, 1.19, 1.21, 1.16, 1.42];
        let s = group_summary(&v, Group::Control, IndexKind::NormalizedVelocity).unwrap();
        assert!((s.mean - 1.217).abs() < 1e-12);
        assert!((s.sd - 0.137602).abs() < 1e-6);
    }

    #[test]
    fn constant_values() {
        let s = group_summary(&[7.0; 4], Group::Patient, IndexKind::StanceFraction).unwrap();
        assert_eq!((s.mean, s.sd), (7.0, 0.0));
    }

    #[test]
    fn too_few() {
        assert!(matches!(
            group_summary(&[1.0], Group::Patient, IndexKind::StepWidth),
            Err(StatsError::TooFew { needed: 2, found: 1 })
        ));
    }
}
