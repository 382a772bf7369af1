//! Joint angles and the gait indices derived from a segmented cycle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::gait_cycle::{extract_cycle, DetectionParams, GaitCycle, GaitError};
use crate::geometry::Vec3;
use crate::skeletal_io::{JointId, Leg, RecordingError, SubjectRecord, TrialRecording};

/// Segments shorter than this (meters) give no usable direction.
pub const MIN_SEGMENT_LENGTH: f64 = 0.01;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("{segment} segment shorter than 1 cm at frame {frame}")]
    DegenerateSegment { segment: &'static str, frame: usize },
    #[error("height must be positive, got {0} cm")]
    NonPositiveHeight(f64),
    #[error("no double-support phase inside the cycle")]
    NoDoubleSupport,
    #[error("angle series is empty")]
    EmptySeries,
    #[error(transparent)]
    Gait(#[from] GaitError),
    #[error(transparent)]
    Recording(#[from] RecordingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JointKind {
    Hip,
    Knee,
}

impl JointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            JointKind::Hip => "hip",
            JointKind::Knee => "knee",
        }
    }
}

impl fmt::Display for JointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for JointKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hip" => Ok(JointKind::Hip),
            "knee" => Ok(JointKind::Knee),
            other => Err(format!("unknown joint `{other}`, expected hip or knee")),
        }
    }
}

/// Joint angle over a gait cycle, degrees, one value per frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleSeries {
    pub joint: JointKind,
    pub leg: Leg,
    pub values: Vec<f64>,
    pub t: Vec<f64>,
}

/// Knee flexion: angle between thigh (hip→knee) and shank (knee→ankle).
/// A straight leg reads 0°.
pub fn knee_angle(hip: Vec3, knee: Vec3, ankle: Vec3, frame: usize) -> Result<f64, KinematicsError> {
    let thigh = segment(hip, knee, "thigh", frame)?;
    let shank = segment(knee, ankle, "shank", frame)?;
    Ok(thigh.angle_deg(shank).expect("non-degenerate segments"))
}

/// Hip angle: thigh (hip→knee) against the downward vertical. Upright reads 0°.
pub fn hip_angle(hip: Vec3, knee: Vec3, frame: usize) -> Result<f64, KinematicsError> {
    let thigh = segment(hip, knee, "thigh", frame)?;
    Ok(thigh.angle_deg(Vec3::DOWN).expect("non-degenerate segment"))
}

fn segment(from: Vec3, to: Vec3, name: &'static str, frame: usize) -> Result<Vec3, KinematicsError> {
    let d = to - from;
    if d.norm() < MIN_SEGMENT_LENGTH {
        return Err(KinematicsError::DegenerateSegment { segment: name, frame });
    }
    Ok(d)
}

pub fn knee_angle_series(cycle: &GaitCycle, leg: Leg) -> Result<AngleSeries, KinematicsError> {
    let rec = &cycle.frames;
    let (hip, knee, ankle) = (rec.track(leg.hip())?, rec.track(leg.knee())?, rec.track(leg.ankle())?);
    let values = (0..rec.len())
        .map(|i| knee_angle(hip[i], knee[i], ankle[i], i))
        .collect::<Result<_, _>>()?;
    Ok(AngleSeries {
        joint: JointKind::Knee,
        leg,
        values,
        t: rec.times(),
    })
}

pub fn hip_angle_series(cycle: &GaitCycle, leg: Leg) -> Result<AngleSeries, KinematicsError> {
    let rec = &cycle.frames;
    let (hip, knee) = (rec.track(leg.hip())?, rec.track(leg.knee())?);
    let values = (0..rec.len()).map(|i| hip_angle(hip[i], knee[i], i)).collect::<Result<_, _>>()?;
    Ok(AngleSeries {
        joint: JointKind::Hip,
        leg,
        values,
        t: rec.times(),
    })
}

/// Max minus min of the series, degrees.
pub fn range_of_motion(series: &AngleSeries) -> Result<f64, KinematicsError> {
    let (min, max) = series
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if series.values.is_empty() {
        return Err(KinematicsError::EmptySeries);
    }
    Ok(max - min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeDistance {
    /// Stride velocity over height, 1/s.
    pub v_n: f64,
    /// Stride length over height.
    pub l_n: f64,
    /// Stance fraction.
    pub s: f64,
    /// Lateral ankle separation in double support, m. Absent without a
    /// double-support phase.
    pub w: Option<f64>,
    /// Stride length, m.
    pub stride_length: f64,
}

/// Time-distance indices of the cycle's reference leg.
pub fn time_distance_indices(cycle: &GaitCycle, height_cm: f64) -> Result<TimeDistance, KinematicsError> {
    if !(height_cm > 0.0 && height_cm.is_finite()) {
        return Err(KinematicsError::NonPositiveHeight(height_cm));
    }
    let height_m = height_cm / 100.0;
    let ankle = cycle.frames.track(cycle.reference_leg.ankle())?;
    let stride_length = (*ankle.last().expect("cycle has frames") - ankle[0]).norm();
    let w = match &cycle.double_support {
        Some(span) => {
            let left = cycle.frames.track(JointId::AnkleLeft)?;
            let right = cycle.frames.track(JointId::AnkleRight)?;
            let sum: f64 = span.clone().map(|i| (left[i].x - right[i].x).abs()).sum();
            Some(sum / span.len() as f64)
        }
        None => None,
    };
    Ok(TimeDistance {
        v_n: stride_length / cycle.cycle_time() / height_m,
        l_n: stride_length / height_m,
        s: cycle.events.stance_fraction(),
        w,
        stride_length,
    })
}

/// The eight gait indices, in reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum IndexKind {
    #[serde(rename = "v_n")]
    NormalizedVelocity,
    #[serde(rename = "l_n")]
    NormalizedStrideLength,
    #[serde(rename = "s")]
    StanceFraction,
    #[serde(rename = "w")]
    StepWidth,
    #[serde(rename = "alpha_h")]
    HipRom,
    #[serde(rename = "alpha_k")]
    KneeRom,
    #[serde(rename = "d_k")]
    KneeMeanDtw,
    #[serde(rename = "d_h")]
    HipMeanDtw,
}

impl IndexKind {
    pub const ALL: [IndexKind; 8] = [
        IndexKind::NormalizedVelocity,
        IndexKind::NormalizedStrideLength,
        IndexKind::StanceFraction,
        IndexKind::StepWidth,
        IndexKind::HipRom,
        IndexKind::KneeRom,
        IndexKind::KneeMeanDtw,
        IndexKind::HipMeanDtw,
    ];

    /// Column order of the per-subject index tables.
    pub const TABLE_COLUMNS: [IndexKind; 8] = [
        IndexKind::NormalizedVelocity,
        IndexKind::NormalizedStrideLength,
        IndexKind::StanceFraction,
        IndexKind::StepWidth,
        IndexKind::KneeRom,
        IndexKind::HipRom,
        IndexKind::KneeMeanDtw,
        IndexKind::HipMeanDtw,
    ];

    pub const TIME_DISTANCE: [IndexKind; 4] = [
        IndexKind::NormalizedVelocity,
        IndexKind::NormalizedStrideLength,
        IndexKind::StanceFraction,
        IndexKind::StepWidth,
    ];

    pub const ANGLE: [IndexKind; 4] = [IndexKind::KneeRom, IndexKind::HipRom, IndexKind::KneeMeanDtw, IndexKind::HipMeanDtw];

    pub fn key(self) -> &'static str {
        match self {
            IndexKind::NormalizedVelocity => "v_n",
            IndexKind::NormalizedStrideLength => "l_n",
            IndexKind::StanceFraction => "s",
            IndexKind::StepWidth => "w",
            IndexKind::HipRom => "alpha_h",
            IndexKind::KneeRom => "alpha_k",
            IndexKind::KneeMeanDtw => "d_k",
            IndexKind::HipMeanDtw => "d_h",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IndexKind::NormalizedVelocity => "Normalized velocity",
            IndexKind::NormalizedStrideLength => "Normalized stride length",
            IndexKind::StanceFraction => "Stance fraction",
            IndexKind::StepWidth => "Step width",
            IndexKind::HipRom => "Hip range of motion",
            IndexKind::KneeRom => "Knee range of motion",
            IndexKind::KneeMeanDtw => "Knee mean DTW distance",
            IndexKind::HipMeanDtw => "Hip mean DTW distance",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            IndexKind::NormalizedVelocity => "1/s",
            IndexKind::NormalizedStrideLength | IndexKind::StanceFraction => "",
            IndexKind::StepWidth => "m",
            _ => "deg",
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for IndexKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.key() == s)
            .ok_or_else(|| format!("unknown index `{s}`"))
    }
}

/// The eight indices for one trial or one subject.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GaitIndexSet {
    pub v_n: f64,
    pub l_n: f64,
    pub s: f64,
    pub w: Option<f64>,
    pub rom_hip: f64,
    pub rom_knee: f64,
    pub d_k: Option<f64>,
    pub d_h: Option<f64>,
}

impl GaitIndexSet {
    pub fn get(&self, kind: IndexKind) -> Option<f64> {
        match kind {
            IndexKind::NormalizedVelocity => Some(self.v_n),
            IndexKind::NormalizedStrideLength => Some(self.l_n),
            IndexKind::StanceFraction => Some(self.s),
            IndexKind::StepWidth => self.w,
            IndexKind::HipRom => Some(self.rom_hip),
            IndexKind::KneeRom => Some(self.rom_knee),
            IndexKind::KneeMeanDtw => self.d_k,
            IndexKind::HipMeanDtw => self.d_h,
        }
    }

    /// Element-wise mean. Optional indices average over the sets that carry them.
    pub fn mean_of(sets: &[GaitIndexSet]) -> Option<GaitIndexSet> {
        if sets.is_empty() {
            return None;
        }
        let n = sets.len() as f64;
        let mean = |f: fn(&GaitIndexSet) -> f64| sets.iter().map(f).sum::<f64>() / n;
        let mean_opt = |f: fn(&GaitIndexSet) -> Option<f64>| {
            let present: Vec<f64> = sets.iter().filter_map(f).collect();
            (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
        };
        Some(GaitIndexSet {
            v_n: mean(|s| s.v_n),
            l_n: mean(|s| s.l_n),
            s: mean(|s| s.s),
            w: mean_opt(|s| s.w),
            rom_hip: mean(|s| s.rom_hip),
            rom_knee: mean(|s| s.rom_knee),
            d_k: mean_opt(|s| s.d_k),
            d_h: mean_opt(|s| s.d_h),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisOptions {
    pub detection: DetectionParams,
    /// Leg whose cycle supplies the time-distance indices.
    pub reference_leg: Leg,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            detection: DetectionParams::default(),
            reference_leg: Leg::Left,
        }
    }
}

/// Which computation a trial failed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexStage {
    Segmentation(Leg),
    TimeDistance,
    HipAngle(Leg),
    KneeAngle(Leg),
}

impl fmt::Display for IndexStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexStage::Segmentation(l) => write!(f, "segmentation ({l})"),
            IndexStage::TimeDistance => f.write_str("time-distance indices"),
            IndexStage::HipAngle(l) => write!(f, "hip angle ({l})"),
            IndexStage::KneeAngle(l) => write!(f, "knee angle ({l})"),
        }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {source}")]
pub struct IndexFailure {
    pub stage: IndexStage,
    #[source]
    pub source: KinematicsError,
}

fn tag<E: Into<KinematicsError>>(stage: IndexStage) -> impl FnOnce(E) -> IndexFailure {
    move |e| IndexFailure { stage, source: e.into() }
}

/// Everything computed from one trial.
#[derive(Debug, Clone)]
pub struct TrialAnalysis {
    pub subject_id: String,
    pub trial_no: u32,
    /// Each leg's own cycle.
    pub cycles: BTreeMap<Leg, GaitCycle>,
    pub hip: BTreeMap<Leg, AngleSeries>,
    pub knee: BTreeMap<Leg, AngleSeries>,
    /// Local indices; `d_k`/`d_h` stay empty until the cohort DTW pass.
    pub indices: GaitIndexSet,
    pub time_distance: TimeDistance,
}

impl TrialAnalysis {
    pub fn angles(&self, joint: JointKind) -> &BTreeMap<Leg, AngleSeries> {
        match joint {
            JointKind::Hip => &self.hip,
            JointKind::Knee => &self.knee,
        }
    }
}

/// Segments both legs and computes the six local indices. Ranges of motion
/// are averaged over the legs, each measured over its own cycle.
pub fn analyze_trial(rec: &TrialRecording, height_cm: f64, opts: &AnalysisOptions) -> Result<TrialAnalysis, IndexFailure> {
    let mut cycles = BTreeMap::new();
    for leg in Leg::BOTH {
        let cycle = extract_cycle(rec, leg, &opts.detection).map_err(tag(IndexStage::Segmentation(leg)))?;
        cycles.insert(leg, cycle);
    }
    let td = time_distance_indices(&cycles[&opts.reference_leg], height_cm).map_err(tag(IndexStage::TimeDistance))?;
    let mut hip = BTreeMap::new();
    let mut knee = BTreeMap::new();
    for leg in Leg::BOTH {
        let h = hip_angle_series(&cycles[&leg], leg).map_err(tag(IndexStage::HipAngle(leg)))?;
        let k = knee_angle_series(&cycles[&leg], leg).map_err(tag(IndexStage::KneeAngle(leg)))?;
        hip.insert(leg, h);
        knee.insert(leg, k);
    }
    let rom = |series: &BTreeMap<Leg, AngleSeries>, stage: fn(Leg) -> IndexStage| -> Result<f64, IndexFailure> {
        let mut total = 0.0;
        for leg in Leg::BOTH {
            total += range_of_motion(&series[&leg]).map_err(tag(stage(leg)))?;
        }
        Ok(total / 2.0)
    };
    let indices = GaitIndexSet {
        v_n: td.v_n,
        l_n: td.l_n,
        s: td.s,
        w: td.w,
        rom_hip: rom(&hip, IndexStage::HipAngle)?,
        rom_knee: rom(&knee, IndexStage::KneeAngle)?,
        d_k: None,
        d_h: None,
    };
    Ok(TrialAnalysis {
        subject_id: rec.subject_id().to_owned(),
        trial_no: rec.trial_no(),
        cycles,
        hip,
        knee,
        indices,
        time_distance: td,
    })
}

/// Per-subject indices: trial means, with failed trials excluded.
#[derive(Debug)]
pub struct SubjectIndices {
    pub subject_id: String,
    pub indices: Option<GaitIndexSet>,
    pub trials: Vec<TrialAnalysis>,
    pub excluded: Vec<(u32, IndexFailure)>,
}

pub fn index_set<'a>(
    subject: &SubjectRecord,
    trials: impl IntoIterator<Item = &'a TrialRecording>,
    opts: &AnalysisOptions,
) -> SubjectIndices {
    let mut analyses = Vec::new();
    let mut excluded = Vec::new();
    for rec in trials {
        match analyze_trial(rec, subject.height, opts) {
            Ok(a) => analyses.push(a),
            Err(e) => {
                log::warn!("{} trial {} excluded: {e}", subject.subject_id, rec.trial_no());
                excluded.push((rec.trial_no(), e));
            }
        }
    }
    analyses.sort_by_key(|a| a.trial_no);
    let sets: Vec<GaitIndexSet> = analyses.iter().map(|a| a.indices).collect();
    SubjectIndices {
        subject_id: subject.subject_id.clone(),
        indices: GaitIndexSet::mean_of(&sets),
        trials: analyses,
        excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_leg_is_zero() {
        let a = knee_angle(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.0, 0.0, 0.0), 0).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn bent_knee_hand_computed() {
        // thigh (0,0,-0.5), shank (0,0.3,-0.4): cos = 0.2 / (0.5 * 0.5) = 0.8
        let a = knee_angle(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.0, 0.3, 0.1), 0).unwrap();
        assert!((a - 0.8_f64.acos().to_degrees()).abs() < 1e-12);
        assert!((a - 36.8699).abs() < 1e-4);
    }

    #[test]
    fn coincident_knee_and_hip() {
        let p = Vec3::new(0.0, 0.0, 1.0);
        assert!(matches!(
            knee_angle(p, p, Vec3::default(), 3),
            Err(KinematicsError::DegenerateSegment {
                segment: "thigh",
                frame: 3
            })
        ));
        assert!(hip_angle(p, p + Vec3::new(0.0, 0.005, 0.0), 0).is_err());
    }

    #[test]
    fn hip_angle_cases() {
        let hip = Vec3::new(0.0, 0.0, 1.0);
        assert_eq!(hip_angle(hip, hip + Vec3::new(0.0, 0.0, -1.0), 0).unwrap(), 0.0);
        let a = hip_angle(hip, hip + Vec3::new(0.0, 0.5, -0.866), 0).unwrap();
        assert!((a - 30.0).abs() < 1e-3);
        assert!((hip_angle(hip, hip + Vec3::new(0.0, 1.0, 0.0), 0).unwrap() - 90.0).abs() < 1e-12);
    }

    fn series(values: Vec<f64>) -> AngleSeries {
        let t = (0..values.len()).map(|i| i as f64).collect();
        AngleSeries {
            joint: JointKind::Hip,
            leg: Leg::Left,
            values,
            t,
        }
    }

    #[test]
    fn rom_cases() {
        assert_eq!(range_of_motion(&series(vec![20.0; 5])).unwrap(), 0.0);
        assert!((range_of_motion(&series(vec![10.0, 25.0, 43.7, 12.0])).unwrap() - 33.7).abs() < 1e-12);
        assert!(range_of_motion(&series(vec![])).is_err());
    }

    #[test]
    fn mean_of_identical_sets_is_exact() {
        let s = GaitIndexSet {
            v_n: 0.87,
            l_n: 0.63,
            s: 0.59,
            w: Some(0.42),
            rom_hip: 25.7,
            rom_knee: 43.7,
            d_k: None,
            d_h: None,
        };
        let m = GaitIndexSet::mean_of(&[s; 5]).unwrap();
        assert!((m.v_n - s.v_n).abs() < 1e-15 && (m.rom_knee - s.rom_knee).abs() < 1e-12);
        assert_eq!((m.d_k, m.d_h), (None, None));
        assert!((m.w.unwrap() - 0.42).abs() < 1e-15);
    }

    #[test]
    fn index_kind_keys_round_trip() {
        for k in IndexKind::ALL {
            assert_eq!(k.key().parse::<IndexKind>().unwrap(), k);
        }
    }
}
