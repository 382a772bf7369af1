//! Dynamic time warping with the classic step set and absolute-difference
//! local cost, plus the cohort-level mean DTW distance.
//!
//! Indices are zero-based throughout.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::skeletal_io::Leg;

/// Longest sequence `brute_force_dtw` accepts.
pub const BRUTE_FORCE_MAX_LEN: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum DtwError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence value at {0} is not finite")]
    NonFinite(usize),
    #[error("brute-force DTW is limited to length {BRUTE_FORCE_MAX_LEN}, got {0}")]
    TooLong(usize),
    #[error("no {0} trials to compare")]
    EmptyCohort(&'static str),
    #[error("{subject_id} trial {trial_no} has no {leg} leg series")]
    MissingLeg { subject_id: String, trial_no: u32, leg: Leg },
    #[error("control mean DTW needs at least 2 control subjects, found {0}")]
    CohortTooSmall(usize),
    #[error("subject `{0}` is not among the controls")]
    UnknownSubject(String),
}

/// A nonempty series of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence(Vec<f64>);

impl Sequence {
    pub fn new(values: Vec<f64>) -> Result<Self, DtwError> {
        check(&values)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl AsRef<[f64]> for Sequence {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

fn check(values: &[f64]) -> Result<(), DtwError> {
    if values.is_empty() {
        return Err(DtwError::EmptySequence);
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(DtwError::NonFinite(i));
    }
    Ok(())
}

#[inline]
pub fn local_cost(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

/// Row-major N×M matrix of local costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(a: &[f64], b: &[f64]) -> Self {
        let data = a.iter().flat_map(|&x| b.iter().map(move |&y| local_cost(x, y))).collect();
        Self {
            rows: a.len(),
            cols: b.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.data[n * self.cols + m]
    }
}

/// Alignment from `(0, 0)` to `(N-1, M-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WarpingPath(pub Vec<(usize, usize)>);

impl WarpingPath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// Boundary, monotonicity and unit-step conditions for an N×M alignment.
    pub fn is_valid(&self, n: usize, m: usize) -> bool {
        let p = &self.0;
        if n == 0 || m == 0 || p.first() != Some(&(0, 0)) || p.last() != Some(&(n - 1, m - 1)) {
            return false;
        }
        let steps_ok = p.windows(2).all(|w| {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        });
        steps_ok && p.len() >= n.max(m) && p.len() < n + m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtwResult {
    pub distance: f64,
    pub path: WarpingPath,
}

/// Full DTW with path recovery.
pub fn dtw(a: &[f64], b: &[f64]) -> Result<DtwResult, DtwError> {
    check(a)?;
    check(b)?;
    let cost = CostMatrix::new(a, b);
    let (rows, cols) = (a.len(), b.len());
    let mut acc = vec![0.0; rows * cols];
    let at = |n: usize, m: usize| n * cols + m;
    for n in 0..rows {
        for m in 0..cols {
            let c = cost.get(n, m);
            acc[at(n, m)] = match (n, m) {
                (0, 0) => c,
                (0, _) => acc[at(0, m - 1)] + c,
                (_, 0) => acc[at(n - 1, 0)] + c,
                _ => {
                    let best = acc[at(n - 1, m - 1)].min(acc[at(n - 1, m)]).min(acc[at(n, m - 1)]);
                    best + c
                }
            };
        }
    }

    // Backtrack, preferring diagonal, then vertical, then horizontal.
    let (mut n, mut m) = (rows - 1, cols - 1);
    let mut path = vec![(n, m)];
    while (n, m) != (0, 0) {
        (n, m) = match (n, m) {
            (0, _) => (0, m - 1),
            (_, 0) => (n - 1, 0),
            _ => {
                let diag = acc[at(n - 1, m - 1)];
                let up = acc[at(n - 1, m)];
                let left = acc[at(n, m - 1)];
                if diag <= up && diag <= left {
                    (n - 1, m - 1)
                } else if up <= left {
                    (n - 1, m)
                } else {
                    (n, m - 1)
                }
            }
        };
        path.push((n, m));
    }
    path.reverse();
    Ok(DtwResult {
        distance: acc[at(rows - 1, cols - 1)],
        path: WarpingPath(path),
    })
}

/// DTW distance only, in O(M) memory. Bit-identical to `dtw(a, b).distance`.
pub fn dtw_distance(a: &[f64], b: &[f64]) -> Result<f64, DtwError> {
    check(a)?;
    check(b)?;
    let mut prev = vec![0.0; b.len()];
    let mut cur = vec![0.0; b.len()];
    for (n, &x) in a.iter().enumerate() {
        for (m, &y) in b.iter().enumerate() {
            let c = local_cost(x, y);
            cur[m] = match (n, m) {
                (0, 0) => c,
                (0, _) => cur[m - 1] + c,
                (_, 0) => prev[0] + c,
                _ => prev[m - 1].min(prev[m]).min(cur[m - 1]) + c,
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[b.len() - 1])
}

/// Minimum path cost by exhaustive enumeration of warping paths.
///
/// Costs are accumulated from `(0, 0)` forward, the same order the dynamic
/// program uses, so both give the same bits.
pub fn brute_force_dtw(a: &[f64], b: &[f64]) -> Result<f64, DtwError> {
    check(a)?;
    check(b)?;
    let longest = a.len().max(b.len());
    if longest > BRUTE_FORCE_MAX_LEN {
        return Err(DtwError::TooLong(longest));
    }
    fn walk(a: &[f64], b: &[f64], n: usize, m: usize, sum: f64, best: &mut f64) {
        let sum = sum + local_cost(a[n], b[m]);
        if n + 1 == a.len() && m + 1 == b.len() {
            *best = best.min(sum);
            return;
        }
        if n + 1 < a.len() && m + 1 < b.len() {
            walk(a, b, n + 1, m + 1, sum, best);
        }
        if n + 1 < a.len() {
            walk(a, b, n + 1, m, sum, best);
        }
        if m + 1 < b.len() {
            walk(a, b, n, m + 1, sum, best);
        }
    }
    let mut best = f64::INFINITY;
    // The first cell is added to 0.0, which is exact.
    walk(a, b, 0, 0, 0.0, &mut best);
    Ok(best)
}

/// One trial's angle series for a single joint, both legs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub subject_id: String,
    pub trial_no: u32,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl TrialSeries {
    pub fn leg(&self, leg: Leg) -> &[f64] {
        match leg {
            Leg::Left => &self.left,
            Leg::Right => &self.right,
        }
    }
}

/// One DTW evaluation inside a mean-DTW aggregation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDistance {
    pub leg: Leg,
    pub trial_no: u32,
    pub other_subject: String,
    pub other_trial: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanDtw {
    /// Mean of the left- and right-leg averages.
    pub value: f64,
    pub left: f64,
    pub right: f64,
    /// Same aggregation restricted to each of the subject's trials.
    pub per_trial: Vec<(u32, f64)>,
    pub evaluations: usize,
    /// Ordered by (trial, other subject, other trial), left leg first.
    pub pairs: Vec<PairDistance>,
}

/// Mean DTW of a patient's trials against every control trial.
pub fn mean_dtw_patient(patient: &[TrialSeries], controls: &[TrialSeries]) -> Result<MeanDtw, DtwError> {
    mean_dtw_patient_with(patient, controls, |a, b| dtw_distance(a, b).expect("series validated"))
}

/// `mean_dtw_patient` with a caller-supplied distance, e.g. an instrumented one.
pub fn mean_dtw_patient_with<F>(patient: &[TrialSeries], controls: &[TrialSeries], metric: F) -> Result<MeanDtw, DtwError>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if patient.is_empty() {
        return Err(DtwError::EmptyCohort("patient"));
    }
    if controls.is_empty() {
        return Err(DtwError::EmptyCohort("control"));
    }
    aggregate(patient, controls, &metric)
}

/// Mean DTW of control `subject_id` against all other controls.
pub fn mean_dtw_control(subject_id: &str, controls: &[TrialSeries]) -> Result<MeanDtw, DtwError> {
    mean_dtw_control_with(subject_id, controls, |a, b| dtw_distance(a, b).expect("series validated"))
}

pub fn mean_dtw_control_with<F>(subject_id: &str, controls: &[TrialSeries], metric: F) -> Result<MeanDtw, DtwError>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let subjects: BTreeSet<&str> = controls.iter().map(|t| t.subject_id.as_str()).collect();
    if subjects.len() < 2 {
        return Err(DtwError::CohortTooSmall(subjects.len()));
    }
    let (own, others): (Vec<TrialSeries>, Vec<TrialSeries>) = controls.iter().cloned().partition(|t| t.subject_id == subject_id);
    if own.is_empty() {
        return Err(DtwError::UnknownSubject(subject_id.to_owned()));
    }
    aggregate(&own, &others, &metric)
}

fn aggregate<F>(own: &[TrialSeries], others: &[TrialSeries], metric: &F) -> Result<MeanDtw, DtwError>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    for t in own.iter().chain(others) {
        for leg in Leg::BOTH {
            check(t.leg(leg)).map_err(|_| DtwError::MissingLeg {
                subject_id: t.subject_id.clone(),
                trial_no: t.trial_no,
                leg,
            })?;
        }
    }
    let mut own: Vec<&TrialSeries> = own.iter().collect();
    own.sort_by_key(|t| t.trial_no);
    let mut others: Vec<&TrialSeries> = others.iter().collect();
    others.sort_by(|a, b| (&a.subject_id, a.trial_no).cmp(&(&b.subject_id, b.trial_no)));

    let jobs: Vec<(Leg, &TrialSeries, &TrialSeries)> = Leg::BOTH
        .into_iter()
        .flat_map(|leg| {
            let others = &others;
            own.iter().flat_map(move |q| others.iter().map(move |r| (leg, *q, *r)))
        })
        .collect();
    let distances: Vec<f64> = jobs.par_iter().map(|(leg, q, r)| metric(q.leg(*leg), r.leg(*leg))).collect();

    let pairs: Vec<PairDistance> = jobs
        .iter()
        .zip(&distances)
        .map(|((leg, q, r), &distance)| PairDistance {
            leg: *leg,
            trial_no: q.trial_no,
            other_subject: r.subject_id.clone(),
            other_trial: r.trial_no,
            distance,
        })
        .collect();

    let leg_mean = |leg: Leg, trial: Option<u32>| {
        let mut sum = 0.0;
        let mut count = 0usize;
        for p in pairs.iter().filter(|p| p.leg == leg && trial.is_none_or(|t| p.trial_no == t)) {
            sum += p.distance;
            count += 1;
        }
        sum / count as f64
    };
    let left = leg_mean(Leg::Left, None);
    let right = leg_mean(Leg::Right, None);
    let per_trial = own
        .iter()
        .map(|q| {
            let t = Some(q.trial_no);
            (q.trial_no, (leg_mean(Leg::Left, t) + leg_mean(Leg::Right, t)) / 2.0)
        })
        .collect();
    Ok(MeanDtw {
        value: (left + right) / 2.0,
        left,
        right,
        per_trial,
        evaluations: distances.len(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_cost_examples() {
        assert_eq!(local_cost(5.0, 5.0), 0.0);
        assert_eq!(local_cost(3.0, 7.5), 4.5);
        assert_eq!(local_cost(7.5, 3.0), 4.5);
    }

    #[test]
    fn identical_sequences_take_the_diagonal() {
        let r = dtw(&[10.0, 20.0, 30.0], &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.path.0, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn duplicated_sample_costs_nothing() {
        assert_eq!(dtw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0, 3.0]).unwrap().distance, 0.0);
    }

    #[test]
    fn small_mismatch() {
        let (a, b) = ([1.0, 3.0, 4.0], [1.0, 2.0, 4.0]);
        let r = dtw(&a, &b).unwrap();
        assert_eq!(r.distance, 1.0);
        assert_eq!(r.path.0, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(brute_force_dtw(&a, &b).unwrap(), 1.0);
    }

    #[test]
    fn brute_force_limits() {
        assert_eq!(brute_force_dtw(&[0.0], &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(brute_force_dtw(&[0.0; 11], &[0.0]), Err(DtwError::TooLong(11)));
        assert_eq!(dtw(&[], &[1.0]).unwrap_err(), DtwError::EmptySequence);
        assert!(Sequence::new(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn distance_only_matches_full() {
        let a = [3.0, 9.5, 1.25, 7.0, 7.0];
        let b = [2.0, 8.0, 8.0, 0.5];
        assert_eq!(dtw_distance(&a, &b).unwrap(), dtw(&a, &b).unwrap().distance);
    }

    fn trial(sid: &str, n: u32, v: Vec<f64>) -> TrialSeries {
        TrialSeries {
            subject_id: sid.into(),
            trial_no: n,
            left: v.clone(),
            right: v,
        }
    }

    #[test]
    fn offset_patient_gives_n_delta() {
        let controls = vec![trial("C1", 1, vec![10.0; 4]), trial("C2", 1, vec![10.0; 4])];
        let patient = vec![trial("P1", 1, vec![12.5; 4])];
        let r = mean_dtw_patient(&patient, &controls).unwrap();
        assert_eq!(r.value, 10.0);
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn control_leave_one_out() {
        let n = 5;
        let controls = vec![
            trial("C1", 1, vec![0.0; n]),
            trial("C2", 1, vec![0.0; n]),
            trial("C3", 1, vec![2.0; n]),
        ];
        assert_eq!(mean_dtw_control("C3", &controls).unwrap().value, 10.0);
        assert_eq!(mean_dtw_control("C1", &controls).unwrap().value, 5.0);
        assert_eq!(mean_dtw_control("C1", &controls[..1]).unwrap_err(), DtwError::CohortTooSmall(1));
    }

    #[test]
    fn missing_leg_is_reported() {
        let mut bad = trial("P1", 1, vec![1.0]);
        bad.right.clear();
        let err = mean_dtw_patient(&[bad], &[trial("C1", 1, vec![1.0])]).unwrap_err();
        assert!(matches!(err, DtwError::MissingLeg { leg: Leg::Right, .. }));
    }
}
