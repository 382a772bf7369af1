//! Per-index statistics for a cohort, arranged as one table per index family.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{group_summary, icc, paired_t, pearson_ci, CorrelationResult, GroupSummary, IccResult, Pairing, StatsError, TTestResult};
use crate::kinematics::{GaitIndexSet, IndexKind};
use crate::report::format_sig;
use crate::skeletal_io::{Group, SubjectRecord};

/// Everything the statistics need about a cohort.
#[derive(Debug, Clone, Default)]
pub struct CohortIndexData {
    pub subjects: Vec<SubjectRecord>,
    /// Subject-level (trial mean) indices.
    pub subject_values: BTreeMap<String, GaitIndexSet>,
    /// Trial-level indices by subject, as `(trial_no, indices)`. `None` when
    /// only subject-level values are known.
    pub trial_values: Option<BTreeMap<String, Vec<(u32, GaitIndexSet)>>>,
    /// Trials per subject expected in the reliability matrices.
    pub trials_per_patient: usize,
    pub trials_per_control: usize,
}

impl CohortIndexData {
    fn members(&self, group: Group) -> impl Iterator<Item = &SubjectRecord> {
        self.subjects.iter().filter(move |s| s.group == group)
    }

    fn subject_value(&self, id: &str, index: IndexKind) -> Option<f64> {
        self.subject_values.get(id).and_then(|s| s.get(index))
    }

    fn group_values(&self, group: Group, index: IndexKind) -> Vec<f64> {
        self.members(group)
            .filter_map(|s| self.subject_value(&s.subject_id, index))
            .collect()
    }

    /// Subjects × trials matrix; subjects missing any trial value are left out.
    fn trial_matrix(&self, group: Group, index: IndexKind) -> Result<Vec<Vec<f64>>, StatsError> {
        let trials = self.trial_values.as_ref().ok_or(StatsError::Unavailable("trial-level values"))?;
        let k = match group {
            Group::Patient => self.trials_per_patient,
            Group::Control => self.trials_per_control,
        };
        Ok(self
            .members(group)
            .filter_map(|s| {
                let row: Vec<f64> = trials.get(&s.subject_id)?.iter().filter_map(|(_, t)| t.get(index)).collect();
                (row.len() == k).then_some(row)
            })
            .collect())
    }

    /// Patient trials paired with the subject's clinical score.
    fn trial_score_pairs(&self, index: IndexKind, score: fn(&SubjectRecord) -> Option<f64>) -> Result<(Vec<f64>, Vec<f64>), StatsError> {
        let trials = self.trial_values.as_ref().ok_or(StatsError::Unavailable("trial-level values"))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in self.members(Group::Patient) {
            let (Some(y), Some(rows)) = (score(s), trials.get(&s.subject_id)) else {
                continue;
            };
            for (_, t) in rows {
                if let Some(x) = t.get(index) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        Ok((xs, ys))
    }

    /// Patient values paired with their matched controls; by order when no
    /// patient names a match.
    fn matched_pairs(&self, index: IndexKind) -> (Vec<f64>, Vec<f64>, Pairing) {
        let patients: Vec<&SubjectRecord> = self.members(Group::Patient).collect();
        let controls: Vec<&SubjectRecord> = self.members(Group::Control).collect();
        let by_match = patients.iter().any(|p| p.matched_control.is_some());
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, p) in patients.iter().enumerate() {
            let control = if by_match {
                p.matched_control.as_deref()
            } else {
                controls.get(i).map(|c| c.subject_id.as_str())
            };
            let Some(c) = control else { continue };
            if let (Some(x), Some(y)) = (self.subject_value(&p.subject_id, index), self.subject_value(c, index)) {
                xs.push(x);
                ys.push(y);
            }
        }
        let pairing = if by_match { Pairing::MatchedControl } else { Pairing::ByPosition };
        (xs, ys, pairing)
    }
}

/// Statistics of one index. Each cell fails independently.
#[derive(Debug, Clone)]
pub struct IndexStats {
    pub index: IndexKind,
    pub ms: Result<GroupSummary, StatsError>,
    pub control: Result<GroupSummary, StatsError>,
    pub ms_icc: Result<IccResult, StatsError>,
    pub control_icc: Result<IccResult, StatsError>,
    pub corr_ambulation: Result<CorrelationResult, StatsError>,
    pub corr_msws: Result<CorrelationResult, StatsError>,
    pub t_test: Result<TTestResult, StatsError>,
}

/// One row of the statistics tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatKind {
    MsMean,
    MsSd,
    ControlMean,
    ControlSd,
    MsIcc,
    MsIccLow,
    MsIccHigh,
    ControlIcc,
    ControlIccLow,
    ControlIccHigh,
    CorrAmbulationR,
    CorrAmbulationLow,
    CorrAmbulationHigh,
    CorrMswsR,
    CorrMswsLow,
    CorrMswsHigh,
    TStatistic,
    TDf,
    TPValue,
}

impl StatKind {
    pub const ALL: [StatKind; 19] = [
        StatKind::MsMean,
        StatKind::MsSd,
        StatKind::ControlMean,
        StatKind::ControlSd,
        StatKind::MsIcc,
        StatKind::MsIccLow,
        StatKind::MsIccHigh,
        StatKind::ControlIcc,
        StatKind::ControlIccLow,
        StatKind::ControlIccHigh,
        StatKind::CorrAmbulationR,
        StatKind::CorrAmbulationLow,
        StatKind::CorrAmbulationHigh,
        StatKind::CorrMswsR,
        StatKind::CorrMswsLow,
        StatKind::CorrMswsHigh,
        StatKind::TStatistic,
        StatKind::TDf,
        StatKind::TPValue,
    ];

    pub fn key(self) -> &'static str {
        match self {
            StatKind::MsMean => "ms_mean",
            StatKind::MsSd => "ms_sd",
            StatKind::ControlMean => "control_mean",
            StatKind::ControlSd => "control_sd",
            StatKind::MsIcc => "ms_icc",
            StatKind::MsIccLow => "ms_icc_ci_low",
            StatKind::MsIccHigh => "ms_icc_ci_high",
            StatKind::ControlIcc => "control_icc",
            StatKind::ControlIccLow => "control_icc_ci_low",
            StatKind::ControlIccHigh => "control_icc_ci_high",
            StatKind::CorrAmbulationR => "corr_ambulation_r",
            StatKind::CorrAmbulationLow => "corr_ambulation_ci_low",
            StatKind::CorrAmbulationHigh => "corr_ambulation_ci_high",
            StatKind::CorrMswsR => "corr_msws_r",
            StatKind::CorrMswsLow => "corr_msws_ci_low",
            StatKind::CorrMswsHigh => "corr_msws_ci_high",
            StatKind::TStatistic => "t_statistic",
            StatKind::TDf => "t_df",
            StatKind::TPValue => "t_p_value",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for StatKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| format!("unknown statistic `{s}`"))
    }
}

impl IndexStats {
    pub fn value(&self, stat: StatKind) -> Result<f64, StatsError> {
        fn pick<T: Copy>(cell: &Result<T, StatsError>, f: impl Fn(T) -> f64) -> Result<f64, StatsError> {
            cell.as_ref().map(|&c| f(c)).map_err(Clone::clone)
        }
        match stat {
            StatKind::MsMean => pick(&self.ms, |s| s.mean),
            StatKind::MsSd => pick(&self.ms, |s| s.sd),
            StatKind::ControlMean => pick(&self.control, |s| s.mean),
            StatKind::ControlSd => pick(&self.control, |s| s.sd),
            StatKind::MsIcc => pick(&self.ms_icc, |r| r.icc),
            StatKind::MsIccLow => pick(&self.ms_icc, |r| r.ci_low),
            StatKind::MsIccHigh => pick(&self.ms_icc, |r| r.ci_high),
            StatKind::ControlIcc => pick(&self.control_icc, |r| r.icc),
            StatKind::ControlIccLow => pick(&self.control_icc, |r| r.ci_low),
            StatKind::ControlIccHigh => pick(&self.control_icc, |r| r.ci_high),
            StatKind::CorrAmbulationR => pick(&self.corr_ambulation, |c| c.r),
            StatKind::CorrAmbulationLow => pick(&self.corr_ambulation, |c| c.ci_low),
            StatKind::CorrAmbulationHigh => pick(&self.corr_ambulation, |c| c.ci_high),
            StatKind::CorrMswsR => pick(&self.corr_msws, |c| c.r),
            StatKind::CorrMswsLow => pick(&self.corr_msws, |c| c.ci_low),
            StatKind::CorrMswsHigh => pick(&self.corr_msws, |c| c.ci_high),
            StatKind::TStatistic => pick(&self.t_test, |t| t.t),
            StatKind::TDf => pick(&self.t_test, |t| t.df),
            StatKind::TPValue => pick(&self.t_test, |t| t.p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CohortStats {
    /// In reporting order of `IndexKind::ALL`.
    pub indices: Vec<IndexStats>,
}

impl CohortStats {
    pub fn get(&self, index: IndexKind) -> &IndexStats {
        self.indices
            .iter()
            .find(|s| s.index == index)
            .expect("every index has a stats entry")
    }

    /// CSV with one row per statistic and one column per index. Failed cells
    /// read `ERR:<kind>`.
    pub fn to_csv(&self, columns: &[IndexKind]) -> String {
        let mut out = String::from("statistic");
        for c in columns {
            out.push(',');
            out.push_str(c.key());
        }
        out.push('\n');
        for stat in StatKind::ALL {
            out.push_str(stat.key());
            for &c in columns {
                out.push(',');
                match self.get(c).value(stat) {
                    Ok(v) => out.push_str(&format_sig(v)),
                    Err(e) => {
                        out.push_str("ERR:");
                        out.push_str(e.kind());
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

fn index_stats(data: &CohortIndexData, index: IndexKind) -> IndexStats {
    let score_amb = |s: &SubjectRecord| s.ambulation_score.map(f64::from);
    let score_msws = |s: &SubjectRecord| s.msws;
    let corr = |score: fn(&SubjectRecord) -> Option<f64>| data.trial_score_pairs(index, score).and_then(|(x, y)| pearson_ci(&x, &y));
    let (px, cy, pairing) = data.matched_pairs(index);
    IndexStats {
        index,
        ms: group_summary(&data.group_values(Group::Patient, index), Group::Patient, index),
        control: group_summary(&data.group_values(Group::Control, index), Group::Control, index),
        ms_icc: data.trial_matrix(Group::Patient, index).and_then(|m| icc(&m)),
        control_icc: data.trial_matrix(Group::Control, index).and_then(|m| icc(&m)),
        corr_ambulation: corr(score_amb),
        corr_msws: corr(score_msws),
        t_test: paired_t(&px, &cy).map(|t| TTestResult { pairing, ..t }),
    }
}

/// Group summaries, reliability, score correlations (trial level, patients)
/// and matched-pair t-tests for all eight indices.
pub fn stats_tables(data: &CohortIndexData) -> CohortStats {
    let indices = IndexKind::ALL.par_iter().map(|&k| index_stats(data, k)).collect();
    CohortStats { indices }
}
