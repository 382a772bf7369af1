//! Synthetic gait generator.
//!
//! Produces walking recordings whose events, time-distance indices and joint
//! angles are known exactly, so the analysis pipeline can be checked against
//! ground truth. The ankle trajectory is prescribed (planted during stance,
//! smooth swing), the hip and knee angles follow periodic profiles, and
//! the knee and hip positions are placed by walking the shank and thigh
//! segments up from the ankle.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::{CohortDataset, CohortManifest, Group, Leg, ManifestSubject, RecordingError, SkeletalFrame, SubjectRecord, TrialRecording};
use crate::geometry::Vec3;

/// Shape of a periodic joint-angle profile over one gait cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProfileShape {
    /// Single raised cosine peaking at heel strike: hip flexion.
    Hip,
    /// Small loading-response bump plus a large swing-phase bump: knee flexion.
    Knee,
}

/// Angle in degrees as a function of cycle phase.
///
/// Values span `[offset, offset + amplitude]`; the profile minimum and
/// maximum are both attained, so the continuous range of motion equals
/// `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleProfile {
    pub shape: ProfileShape,
    pub offset_deg: f64,
    pub amplitude_deg: f64,
    /// Shift of the pattern along the cycle, as a phase fraction.
    pub phase_shift: f64,
}

impl AngleProfile {
    pub fn hip(offset_deg: f64, amplitude_deg: f64) -> Self {
        Self {
            shape: ProfileShape::Hip,
            offset_deg,
            amplitude_deg,
            phase_shift: 0.0,
        }
    }

    pub fn knee(offset_deg: f64, amplitude_deg: f64) -> Self {
        Self {
            shape: ProfileShape::Knee,
            offset_deg,
            amplitude_deg,
            phase_shift: 0.0,
        }
    }

    pub fn value(&self, phase: f64) -> f64 {
        let p = (phase - self.phase_shift).rem_euclid(1.0);
        let unit = match self.shape {
            ProfileShape::Hip => 0.5 * (1.0 + (2.0 * PI * p).cos()),
            ProfileShape::Knee => 0.2 * bump(p, 0.15, 0.3) + bump(p, 0.72, 0.5),
        };
        self.offset_deg + self.amplitude_deg * unit
    }
}

/// Raised-cosine bump of unit height centred at `center`, zero outside `width`.
fn bump(p: f64, center: f64, width: f64) -> f64 {
    let d = p - center;
    if d.abs() >= 0.5 * width {
        0.0
    } else {
        0.5 * (1.0 + (2.0 * PI * d / width).cos())
    }
}

const MIN_JERK_WEIGHT: f64 = 0.65;

/// Swing progress from 0 to 1 with zero end velocity: a blend of a
/// minimum-jerk and a raised-cosine profile. The cosine part gives the foot
/// a definite acceleration at toe-off and heel strike.
fn swing_progress(u: f64) -> f64 {
    let min_jerk = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    let cosine = 0.5 - 0.5 * (std::f64::consts::PI * u).cos();
    MIN_JERK_WEIGHT * min_jerk + (1.0 - MIN_JERK_WEIGHT) * cosine
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthParams {
    /// Ankle displacement per gait cycle, m.
    pub stride_length: f64,
    /// Heel strike to heel strike, s.
    pub cycle_time: f64,
    /// Stance time over cycle time, in (0, 1).
    pub stance_fraction: f64,
    /// Lateral distance between the ankles, m.
    pub step_width: f64,
    pub hip: AngleProfile,
    pub knee: AngleProfile,
    pub fps: f64,
    /// Recording length in gait cycles.
    pub n_cycles: f64,
    /// Gaussian noise added to every coordinate, m.
    pub noise_sd: f64,
    /// Left-leg cycle phase at the first frame.
    pub start_phase: f64,
    /// Subject height, cm; sets segment lengths.
    pub height_cm: f64,
    /// Peak ankle clearance during swing, m.
    pub swing_lift: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            stride_length: 1.2,
            cycle_time: 1.5,
            stance_fraction: 0.6,
            step_width: 0.15,
            hip: AngleProfile::hip(8.0, 32.0),
            knee: AngleProfile::knee(4.0, 36.0),
            fps: 30.0,
            n_cycles: 2.2,
            noise_sd: 0.0,
            start_phase: 0.7,
            height_cm: 170.0,
            swing_lift: 0.05,
            seed: 0,
        }
    }
}

impl SynthParams {
    fn validate(&self) -> Result<(), RecordingError> {
        let positive = [
            ("stride_length", self.stride_length),
            ("cycle_time", self.cycle_time),
            ("step_width", self.step_width),
            ("fps", self.fps),
            ("n_cycles", self.n_cycles),
            ("height_cm", self.height_cm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(RecordingError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.stance_fraction > 0.0 && self.stance_fraction < 1.0) {
            return Err(RecordingError::InvalidParams("stance_fraction must lie in (0, 1)".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) || self.swing_lift < 0.0 {
            return Err(RecordingError::InvalidParams("noise_sd and swing_lift must be non-negative".into()));
        }
        for p in [self.hip, self.knee] {
            if p.offset_deg < 0.0 || p.amplitude_deg < 0.0 || p.offset_deg + p.amplitude_deg > 180.0 {
                return Err(RecordingError::InvalidParams(
                    "angle profiles must stay within [0, 180] degrees".into(),
                ));
            }
        }
        if (self.n_cycles * self.cycle_time * self.fps) < 2.0 {
            return Err(RecordingError::InvalidParams("recording would have fewer than 2 frames".into()));
        }
        Ok(())
    }

    fn thigh_length(&self) -> f64 {
        0.245 * self.height_cm / 100.0
    }

    fn shank_length(&self) -> f64 {
        0.246 * self.height_cm / 100.0
    }

    fn leg_phase_offset(leg: Leg) -> f64 {
        match leg {
            Leg::Left => 0.0,
            Leg::Right => 0.5,
        }
    }

    /// Continuous cycle count of `leg` at time `t`.
    fn global_phase(&self, leg: Leg, t: f64) -> f64 {
        t / self.cycle_time + self.start_phase + Self::leg_phase_offset(leg)
    }

    fn ankle(&self, leg: Leg, t: f64) -> Vec3 {
        let g = self.global_phase(leg, t);
        let k = g.floor();
        let phase = g - k;
        let s = self.stance_fraction;
        let (progress, lift) = if phase < s {
            (0.0, 0.0)
        } else {
            let u = (phase - s) / (1.0 - s);
            (swing_progress(u), 64.0 * (u * (1.0 - u)).powi(3))
        };
        let (x, y0) = match leg {
            Leg::Left => (0.5 * self.step_width, 0.0),
            Leg::Right => (-0.5 * self.step_width, -0.5 * self.stride_length),
        };
        Vec3::new(x, y0 + self.stride_length * (k + progress), 0.08 + self.swing_lift * lift)
    }

    fn angles(&self, leg: Leg, t: f64) -> (f64, f64) {
        let phase = self.global_phase(leg, t).rem_euclid(1.0);
        (self.hip.value(phase), self.knee.value(phase))
    }
}

/// Event times a correct detector should report for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventTimes {
    pub t_hs: f64,
    pub t_to: f64,
    pub t_ts: f64,
}

/// Ground truth attached to a synthesized trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthTruth {
    pub left: Option<EventTimes>,
    pub right: Option<EventTimes>,
    pub stride_length: f64,
    pub cycle_time: f64,
    pub stance_fraction: f64,
    pub step_width: f64,
    /// Continuous ranges of motion of the injected profiles, degrees.
    pub hip_rom: f64,
    pub knee_rom: f64,
    /// Injected angle at every frame, degrees.
    pub hip_angles: BTreeMap<Leg, Vec<f64>>,
    pub knee_angles: BTreeMap<Leg, Vec<f64>>,
}

impl SynthTruth {
    pub fn events(&self, leg: Leg) -> Option<EventTimes> {
        match leg {
            Leg::Left => self.left,
            Leg::Right => self.right,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthTrial {
    pub recording: TrialRecording,
    pub truth: SynthTruth,
}

/// Generates one walking trial and its ground truth.
pub fn synthesize_trial(params: &SynthParams, subject_id: &str, trial_no: u32) -> Result<SynthTrial, RecordingError> {
    params.validate()?;
    let duration = params.n_cycles * params.cycle_time;
    let n_frames = (duration * params.fps + 1e-9).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = (params.noise_sd > 0.0).then(|| Normal::new(0.0, params.noise_sd).expect("valid sd"));

    let mut frames = Vec::with_capacity(n_frames);
    let mut hip_angles: BTreeMap<Leg, Vec<f64>> = BTreeMap::new();
    let mut knee_angles: BTreeMap<Leg, Vec<f64>> = BTreeMap::new();
    for i in 0..n_frames {
        let t = i as f64 / params.fps;
        let mut pos = BTreeMap::new();
        for leg in Leg::BOTH {
            let ankle = params.ankle(leg, t);
            let (hip_deg, knee_deg) = params.angles(leg, t);
            let (th, tk) = (hip_deg.to_radians(), knee_deg.to_radians());
            // Thigh points hip -> knee, shank points knee -> ankle, both in the sagittal plane.
            let thigh = Vec3::new(0.0, th.sin(), -th.cos());
            let shank = Vec3::new(0.0, (th - tk).sin(), -(th - tk).cos());
            let knee = ankle - shank * params.shank_length();
            let hip = knee - thigh * params.thigh_length();
            pos.insert(leg.ankle(), Some(ankle));
            pos.insert(leg.knee(), Some(knee));
            pos.insert(leg.hip(), Some(hip));
            hip_angles.entry(leg).or_default().push(hip_deg);
            knee_angles.entry(leg).or_default().push(knee_deg);
        }
        if let Some(dist) = &noise {
            for p in pos.values_mut().flatten() {
                *p = *p + Vec3::new(dist.sample(&mut rng), dist.sample(&mut rng), dist.sample(&mut rng));
            }
        }
        frames.push(SkeletalFrame { t, pos });
    }
    let recording = TrialRecording::new(subject_id, trial_no, frames)?;
    let last_t = recording.frames().last().map(|f| f.t).unwrap_or(0.0);
    let truth = SynthTruth {
        left: expected_events(params, Leg::Left, last_t),
        right: expected_events(params, Leg::Right, last_t),
        stride_length: params.stride_length,
        cycle_time: params.cycle_time,
        stance_fraction: params.stance_fraction,
        step_width: params.step_width,
        hip_rom: params.hip.amplitude_deg,
        knee_rom: params.knee.amplitude_deg,
        hip_angles,
        knee_angles,
    };
    Ok(SynthTrial { recording, truth })
}

/// Applies the detector's cycle-selection rule to the analytic stance
/// schedule: the first stance interval whose start is observed (after the
/// first frame) and which is followed by another stance interval inside the
/// recording; failing that, the stance interval cut by the recording start.
fn expected_events(params: &SynthParams, leg: Leg, last_t: f64) -> Option<EventTimes> {
    let t_cycle = params.cycle_time;
    let g0 = params.global_phase(leg, 0.0);
    // Stance k spans global phase [k, k + s).
    let mut intervals = Vec::new();
    let mut k = g0.floor();
    loop {
        let start = (k - g0) * t_cycle;
        if start > last_t {
            break;
        }
        let end = start + params.stance_fraction * t_cycle;
        if end > 0.0 {
            intervals.push((start.max(0.0), end, start > 0.0));
        }
        k += 1.0;
    }
    let usable = |i: usize| -> bool { intervals[i].1 < last_t && i + 1 < intervals.len() };
    let pick = (0..intervals.len())
        .find(|&i| intervals[i].2 && usable(i))
        .or_else(|| (0..intervals.len()).find(|&i| usable(i)))?;
    Some(EventTimes {
        t_hs: intervals[pick].0,
        t_to: intervals[pick].1,
        t_ts: intervals[pick + 1].0,
    })
}

/// Parameters for a whole synthetic cohort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSynthParams {
    pub n_patients: usize,
    pub n_controls: usize,
    pub trials_per_subject: usize,
    pub noise_sd: f64,
    pub fps: f64,
    pub seed: u64,
}

impl Default for CohortSynthParams {
    fn default() -> Self {
        Self {
            n_patients: 10,
            n_controls: 10,
            trials_per_subject: 5,
            noise_sd: 0.0,
            fps: 30.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCohort {
    pub dataset: CohortDataset,
    /// Ground truth keyed by (subject_id, trial_no).
    pub truth: BTreeMap<(String, u32), SynthTruth>,
    /// Per-subject generator parameters before trial-level jitter.
    pub subject_params: BTreeMap<String, SynthParams>,
}

/// Generates a patient/control cohort.
///
/// Each patient gets a severity in [0.2, 1] that shortens the stride, slows
/// the cycle, lengthens stance, widens the base, shrinks and shifts the joint
/// angle patterns, and drives the clinical scores. Patient `Pi` is matched
/// with control `Ci`.
pub fn synthesize_cohort(p: &CohortSynthParams) -> Result<SynthCohort, RecordingError> {
    if p.trials_per_subject == 0 || p.n_patients + p.n_controls == 0 {
        return Err(RecordingError::InvalidParams("cohort needs subjects and trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut subjects = Vec::new();
    let mut trials = Vec::new();
    let mut truth = BTreeMap::new();
    let mut subject_params = BTreeMap::new();

    let mut specs: Vec<(SubjectRecord, SynthParams)> = Vec::new();
    for i in 0..p.n_controls {
        let height: f64 = rng.gen_range(155.0..185.0);
        let params = SynthParams {
            stride_length: height / 100.0 * rng.gen_range(0.58..0.63),
            cycle_time: rng.gen_range(1.30..1.40),
            stance_fraction: rng.gen_range(0.57..0.60),
            step_width: rng.gen_range(0.10..0.16),
            hip: AngleProfile::hip(rng.gen_range(8.0..12.0), rng.gen_range(38.0..44.0)),
            knee: AngleProfile::knee(rng.gen_range(3.0..6.0), rng.gen_range(56.0..62.0)),
            fps: p.fps,
            noise_sd: p.noise_sd,
            height_cm: height,
            ..SynthParams::default()
        };
        let record = SubjectRecord {
            subject_id: format!("C{}", i + 1),
            group: Group::Control,
            sex: if rng.gen_bool(0.8) { "F".into() } else { "M".into() },
            age: rng.gen_range(35.0..80.0_f64).round(),
            height,
            weight: rng.gen_range(50.0..95.0_f64).round(),
            ambulation_score: None,
            msws: None,
            matched_control: None,
        };
        specs.push((record, params));
    }
    for i in 0..p.n_patients {
        let severity: f64 = rng.gen_range(0.2..1.0);
        let height: f64 = rng.gen_range(150.0..180.0);
        let mut hip = AngleProfile::hip(10.0 + 6.0 * severity, 40.0 - 12.0 * severity);
        hip.phase_shift = 0.04 * severity;
        let mut knee = AngleProfile::knee(5.0 + 10.0 * severity, 58.0 - 18.0 * severity);
        knee.phase_shift = 0.05 * severity;
        let params = SynthParams {
            stride_length: height / 100.0 * (0.58 - 0.20 * severity),
            cycle_time: 1.35 + 0.35 * severity,
            stance_fraction: 0.61 + 0.06 * severity,
            step_width: 0.16 + 0.08 * severity,
            hip,
            knee,
            fps: p.fps,
            noise_sd: p.noise_sd,
            height_cm: height,
            ..SynthParams::default()
        };
        let matched = (i < p.n_controls).then(|| format!("C{}", i + 1));
        let record = SubjectRecord {
            subject_id: format!("P{}", i + 1),
            group: Group::Patient,
            sex: if rng.gen_bool(0.8) { "F".into() } else { "M".into() },
            age: rng.gen_range(35.0..80.0_f64).round(),
            height,
            weight: rng.gen_range(50.0..95.0_f64).round(),
            ambulation_score: Some((severity * 9.0).round() as u8),
            msws: Some(((20.0 + 75.0 * severity + rng.gen_range(-5.0..5.0)).clamp(0.0, 100.0) * 10.0).round() / 10.0),
            matched_control: matched,
        };
        specs.push((record, params));
    }

    for (record, base) in specs {
        for trial_no in 1..=p.trials_per_subject as u32 {
            let jitter = |rng: &mut ChaCha8Rng, sd: f64| -> f64 { Normal::new(0.0, sd).expect("sd").sample(rng) };
            let mut tp = base.clone();
            tp.stride_length *= 1.0 + jitter(&mut rng, 0.015);
            tp.cycle_time *= 1.0 + jitter(&mut rng, 0.01);
            tp.stance_fraction += jitter(&mut rng, 0.004);
            tp.step_width += jitter(&mut rng, 0.004);
            tp.hip.amplitude_deg += jitter(&mut rng, 0.5);
            tp.knee.amplitude_deg += jitter(&mut rng, 0.5);
            tp.start_phase = rng.gen_range(0.6..0.8);
            tp.seed = rng.gen();
            let trial = synthesize_trial(&tp, &record.subject_id, trial_no)?;
            truth.insert((record.subject_id.clone(), trial_no), trial.truth);
            trials.push(trial.recording);
        }
        subject_params.insert(record.subject_id.clone(), base);
        subjects.push(record);
    }
    // Manifest order: patients first, then controls.
    subjects.sort_by_key(|s| (s.group, natural_key(&s.subject_id)));
    let dataset = CohortDataset::new(subjects, trials, p.trials_per_subject, p.trials_per_subject)?;
    Ok(SynthCohort {
        dataset,
        truth,
        subject_params,
    })
}

fn natural_key(id: &str) -> (String, u64) {
    let digits: String = id.chars().filter(char::is_ascii_digit).collect();
    let prefix: String = id.chars().filter(|c| !c.is_ascii_digit()).collect();
    (prefix, digits.parse().unwrap_or(0))
}

/// Writes every trial as CSV under `dir/<subject>/trial_<n>.csv` plus a
/// `manifest.json`, returning the manifest path.
pub fn write_cohort(dataset: &CohortDataset, dir: &Path) -> Result<PathBuf, RecordingError> {
    let io = |path: &Path, e: std::io::Error| RecordingError::Io {
        path: path.to_owned(),
        source: e,
    };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut subjects = Vec::new();
    for record in &dataset.subjects {
        let sub_dir = dir.join(&record.subject_id);
        std::fs::create_dir_all(&sub_dir).map_err(|e| io(&sub_dir, e))?;
        let mut files = Vec::new();
        let mut own: Vec<&TrialRecording> = dataset.trials_of(&record.subject_id).collect();
        own.sort_by_key(|t| t.trial_no());
        for trial in own {
            let rel = PathBuf::from(&record.subject_id).join(format!("trial_{}.csv", trial.trial_no()));
            let path = dir.join(&rel);
            std::fs::write(&path, trial.to_csv()).map_err(|e| io(&path, e))?;
            files.push(rel);
        }
        subjects.push(ManifestSubject {
            record: record.clone(),
            trials: files,
        });
    }
    let manifest = CohortManifest {
        trials_per_patient: dataset.trials_per_patient,
        trials_per_control: dataset.trials_per_control,
        subjects,
        base_dir: dir.to_owned(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json_pretty()).map_err(|e| io(&path, e))?;
    Ok(path)
}
