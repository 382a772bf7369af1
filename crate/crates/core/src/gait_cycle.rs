//! Gait-cycle segmentation from ankle position.
//!
//! The ankle is planted between heel strike and toe-off and moves during
//! swing. Frames are classified stationary when the smoothed ankle speed is
//! at most a fraction of the trial's peak speed; the cycle runs from the
//! start of one stationary run to the start of the next.

use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::Vec3;
use crate::skeletal_io::{Leg, RecordingError, TrialRecording};

/// Shortest cycle, in frames, that still resolves the angle patterns.
pub const MIN_CYCLE_FRAMES: usize = 10;

/// A motion segment counts as swing only if its speed reaches this fraction
/// of the peak; weaker segments are marker noise and stay stationary.
pub const SWING_PEAK_FRACTION: f64 = 0.5;

#[derive(Debug, Error)]
pub enum GaitError {
    #[error("{leg} leg: no complete gait cycle (need two stationary runs separated by motion)")]
    NoCycleFound { leg: Leg },
    #[error("speed series has {0} samples, need at least 3")]
    SeriesTooShort(usize),
    #[error("speed series and timestamps differ in length ({speed} vs {times})")]
    LengthMismatch { speed: usize, times: usize },
    #[error("{leg} leg: gait cycle spans {frames} frames, need at least {MIN_CYCLE_FRAMES}")]
    TooFewFrames { leg: Leg, frames: usize },
    #[error("threshold fraction must lie in (0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Recording(#[from] RecordingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionParams {
    /// Stationary when speed <= threshold * max(speed).
    pub threshold: f64,
    /// Centered moving-average width applied to the raw speed.
    pub smoothing_window: usize,
}

impl Default for DetectionParams {
    fn default() -> Self {
        Self {
            threshold: 0.15,
            smoothing_window: 5,
        }
    }
}

impl DetectionParams {
    pub fn with_threshold(threshold: f64) -> Self {
        Self {
            threshold,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), GaitError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(GaitError::InvalidThreshold(self.threshold));
        }
        Ok(())
    }
}

/// Heel strike, toe-off and terminal swing of one leg, with the frame
/// indices (into the analysed recording) they were read from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaitEvents {
    pub leg: Leg,
    pub t_hs: f64,
    pub t_to: f64,
    pub t_ts: f64,
    #[serde(skip)]
    pub hs_frame: usize,
    #[serde(skip)]
    pub to_frame: usize,
    #[serde(skip)]
    pub ts_frame: usize,
}

impl GaitEvents {
    pub fn cycle_time(&self) -> f64 {
        self.t_ts - self.t_hs
    }

    pub fn stance_fraction(&self) -> f64 {
        (self.t_to - self.t_hs) / (self.t_ts - self.t_hs)
    }
}

/// Speed magnitude by central differences (one-sided at the ends).
pub fn differentiate(positions: &[Vec3], times: &[f64]) -> Vec<f64> {
    let n = positions.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                _ if n < 2 => return 0.0,
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (positions[b] - positions[a]).norm() / (times[b] - times[a])
        })
        .collect()
}

/// Centered moving average; the window shrinks to the available samples at the ends.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            values[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Smoothed ankle speed of `leg`, m/s per frame.
pub fn ankle_speed(rec: &TrialRecording, leg: Leg, smoothing_window: usize) -> Result<Vec<f64>, GaitError> {
    let track = rec.track(leg.ankle())?;
    let raw = differentiate(&track, &rec.times());
    Ok(moving_average(&raw, smoothing_window.max(1)))
}

/// Stationary flag per frame: `speed <= threshold * max(speed)`.
pub fn stationary_mask(speed: &[f64], threshold: f64) -> Vec<bool> {
    let peak = speed.iter().copied().fold(0.0, f64::max);
    let limit = threshold * peak;
    speed.iter().map(|&s| s <= limit).collect()
}

/// Maximal runs of `true`, as half-open frame ranges.
pub fn runs(mask: &[bool]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < mask.len() {
        if mask[i] {
            let start = i;
            while i < mask.len() && mask[i] {
                i += 1;
            }
            out.push(start..i);
        } else {
            i += 1;
        }
    }
    out
}

/// Stationary mask with motion segments that never reach
/// `SWING_PEAK_FRACTION` of the peak speed marked stationary. Noise near the recording edges would otherwise
/// split a stance that is cut by the start into a spurious heel strike.
pub fn stance_mask(speed: &[f64], threshold: f64) -> Vec<bool> {
    let mut mask = stationary_mask(speed, threshold);
    let peak = speed.iter().copied().fold(0.0, f64::max);
    let moving: Vec<bool> = mask.iter().map(|m| !m).collect();
    for seg in runs(&moving) {
        if speed[seg.clone()].iter().all(|&s| s < SWING_PEAK_FRACTION * peak) {
            mask[seg].fill(true);
        }
    }
    mask
}

/// Finds one gait cycle in a speed series.
///
/// A cycle starts at a stationary run that is followed by motion and then a
/// second stationary run. The first such run whose start is preceded by
/// motion (an observed heel strike) is preferred; when there is none, the run
/// cut by the start of the recording is used.
pub fn detect_gait_events(speed: &[f64], times: &[f64], threshold: f64, leg: Leg) -> Result<GaitEvents, GaitError> {
    if speed.len() != times.len() {
        return Err(GaitError::LengthMismatch {
            speed: speed.len(),
            times: times.len(),
        });
    }
    if speed.len() < 3 {
        return Err(GaitError::SeriesTooShort(speed.len()));
    }
    DetectionParams::with_threshold(threshold).validate()?;
    let stationary = runs(&stance_mask(speed, threshold));
    let candidates = 0..stationary.len().saturating_sub(1);
    let pick = candidates
        .clone()
        .find(|&i| stationary[i].start > 0)
        .or_else(|| candidates.clone().next())
        .ok_or(GaitError::NoCycleFound { leg })?;
    let (run, next) = (&stationary[pick], &stationary[pick + 1]);
    let (hs, to, ts) = (run.start, run.end - 1, next.start);
    Ok(GaitEvents {
        leg,
        t_hs: times[hs],
        t_to: times[to],
        t_ts: times[ts],
        hs_frame: hs,
        to_frame: to,
        ts_frame: ts,
    })
}

/// One segmented gait cycle.
#[derive(Debug, Clone)]
pub struct GaitCycle {
    pub reference_leg: Leg,
    pub events: GaitEvents,
    /// Events of the other leg, when a complete cycle was found for it too.
    pub contralateral: Option<GaitEvents>,
    /// Frames from heel strike to terminal swing of the reference leg, inclusive.
    pub frames: TrialRecording,
    /// First span (indices into `frames`) where both ankles are stationary.
    pub double_support: Option<Range<usize>>,
}

impl GaitCycle {
    pub fn cycle_time(&self) -> f64 {
        self.events.cycle_time()
    }

    pub fn events_for(&self, leg: Leg) -> Option<&GaitEvents> {
        if leg == self.reference_leg {
            Some(&self.events)
        } else {
            self.contralateral.as_ref()
        }
    }
}

/// Segments the first complete cycle of `leg` and locates the first
/// double-support span inside it.
pub fn extract_cycle(rec: &TrialRecording, leg: Leg, params: &DetectionParams) -> Result<GaitCycle, GaitError> {
    params.validate()?;
    let speed = ankle_speed(rec, leg, params.smoothing_window)?;
    let events = detect_gait_events(&speed, &rec.times(), params.threshold, leg)?;
    cycle_from_events(rec, events, params)
}

/// Builds the cycle delimited by already known events of `events.leg`, for
/// example hand-annotated ones. The other leg and double support are still
/// detected from ankle speed.
pub fn cycle_from_events(rec: &TrialRecording, events: GaitEvents, params: &DetectionParams) -> Result<GaitCycle, GaitError> {
    params.validate()?;
    let leg = events.leg;
    if !(events.hs_frame <= events.to_frame && events.to_frame <= events.ts_frame && events.ts_frame < rec.len()) {
        return Err(GaitError::NoCycleFound { leg });
    }
    let frames = events.ts_frame - events.hs_frame + 1;
    if frames < MIN_CYCLE_FRAMES {
        return Err(GaitError::TooFewFrames { leg, frames });
    }
    let times = rec.times();
    let speed = ankle_speed(rec, leg, params.smoothing_window)?;
    let other_speed = ankle_speed(rec, leg.other(), params.smoothing_window)?;
    let contralateral = detect_gait_events(&other_speed, &times, params.threshold, leg.other()).ok();
    let double_support = contralateral.and_then(|_| {
        let own = stance_mask(&speed, params.threshold);
        let other = stance_mask(&other_speed, params.threshold);
        let both: Vec<bool> = (events.hs_frame..=events.ts_frame).map(|i| own[i] && other[i]).collect();
        runs(&both).into_iter().next()
    });

    Ok(GaitCycle {
        reference_leg: leg,
        events,
        contralateral,
        frames: rec.slice(events.hs_frame..events.ts_frame + 1)?,
        double_support,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_profile() {
        let speed = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let t: Vec<f64> = (0..speed.len()).map(|i| i as f64 / 30.0).collect();
        let ev = detect_gait_events(&speed, &t, 0.15, Leg::Left).unwrap();
        assert_eq!(ev.t_hs, 0.0);
        assert_eq!(ev.t_to, 2.0 / 30.0);
        assert_eq!(ev.t_ts, 6.0 / 30.0);
    }

    #[test]
    fn all_zero_has_no_cycle() {
        let speed = [0.0; 12];
        let t: Vec<f64> = (0..12).map(|i| i as f64).collect();
        assert!(matches!(
            detect_gait_events(&speed, &t, 0.15, Leg::Right),
            Err(GaitError::NoCycleFound { leg: Leg::Right })
        ));
    }

    #[test]
    fn observed_heel_strike_preferred() {
        // Cut stance, swing, full stance, swing, stance.
        let speed = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0];
        let t: Vec<f64> = (0..speed.len()).map(|i| i as f64).collect();
        let ev = detect_gait_events(&speed, &t, 0.15, Leg::Left).unwrap();
        assert_eq!((ev.hs_frame, ev.to_frame, ev.ts_frame), (4, 6, 9));
    }

    #[test]
    fn threshold_tie_counts_as_stationary() {
        let speed = [0.15, 0.15, 1.0, 1.0, 0.15, 0.15, 1.0, 1.0, 0.15, 0.15];
        assert_eq!(stationary_mask(&speed, 0.15), speed.map(|s| s < 0.5).to_vec());
    }

    #[test]
    fn stationary_ankle_zero_speed() {
        let p = vec![Vec3::new(0.1, 0.2, 0.3); 8];
        let t: Vec<f64> = (0..8).map(|i| i as f64 / 30.0).collect();
        assert!(differentiate(&p, &t).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn constant_velocity_exact_interior() {
        let t: Vec<f64> = (0..20).map(|i| i as f64 / 30.0).collect();
        let p: Vec<Vec3> = t.iter().map(|&t| Vec3::new(0.0, t, 0.0)).collect();
        let raw = differentiate(&p, &t);
        for s in &raw[1..19] {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let smooth = moving_average(&raw, 5);
        assert!(smooth.iter().all(|s| (s - 1.0).abs() < 1e-9));
    }

    #[test]
    fn rejects_bad_threshold() {
        let speed = [0.0; 12];
        let t: Vec<f64> = (0..12).map(|i| i as f64).collect();
        assert!(matches!(
            detect_gait_events(&speed, &t, 1.5, Leg::Left),
            Err(GaitError::InvalidThreshold(_))
        ));
    }
}
