use std::collections::BTreeMap;

use serde::Serialize;

use super::{JointId, TrialRecording};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArtifactThresholds {
    /// Largest plausible lower-extremity joint speed, m/s.
    pub max_speed: f64,
    /// Flagged-frame fraction above which a trial should be dropped.
    pub max_severity: f64,
}

impl Default for ArtifactThresholds {
    fn default() -> Self {
        Self {
            max_speed: 4.0,
            max_severity: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Recommendation {
    Keep,
    Exclude,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArtifactReport {
    /// Frame indices whose arrival speed exceeded the bound, per joint.
    pub flagged: BTreeMap<JointId, Vec<usize>>,
    /// Fraction of frames with at least one flagged joint.
    pub severity: f64,
    pub recommendation: Recommendation,
}

impl ArtifactReport {
    pub fn flagged_frames(&self) -> usize {
        let mut all: Vec<usize> = self.flagged.values().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

/// Flags lower-extremity samples whose displacement from the previous frame
/// implies a speed above `thresholds.max_speed`.
///
/// Untracked samples are skipped; the speed is measured against the last
/// tracked sample of the same joint.
pub fn detect_artifacts(rec: &TrialRecording, thresholds: ArtifactThresholds) -> ArtifactReport {
    let frames = rec.frames();
    let mut flagged: BTreeMap<JointId, Vec<usize>> = BTreeMap::new();
    for &joint in rec.joints().iter().filter(|j| j.is_lower_extremity()) {
        let mut last: Option<(f64, crate::geometry::Vec3)> = None;
        for (i, frame) in frames.iter().enumerate() {
            let Some(p) = frame.position(joint) else { continue };
            if let Some((t0, p0)) = last {
                let speed = (p - p0).norm() / (frame.t - t0);
                if speed > thresholds.max_speed {
                    flagged.entry(joint).or_default().push(i);
                }
            }
            last = Some((frame.t, p));
        }
    }
    let mut report = ArtifactReport {
        flagged,
        severity: 0.0,
        recommendation: Recommendation::Keep,
    };
    report.severity = report.flagged_frames() as f64 / frames.len() as f64;
    if report.severity > thresholds.max_severity {
        report.recommendation = Recommendation::Exclude;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::skeletal_io::SkeletalFrame;

    fn still(n: usize) -> Vec<SkeletalFrame> {
        (0..n)
            .map(|i| SkeletalFrame {
                t: i as f64 / 30.0,
                pos: JointId::MANDATORY.iter().map(|&j| (j, Some(Vec3::new(0.0, 0.0, 0.5)))).collect(),
            })
            .collect()
    }

    #[test]
    fn clean_trial_kept() {
        let rec = TrialRecording::new("S", 1, still(30)).unwrap();
        let report = detect_artifacts(&rec, ArtifactThresholds::default());
        assert_eq!(report.flagged_frames(), 0);
        assert_eq!(report.recommendation, Recommendation::Keep);
    }

    #[test]
    fn teleported_knee_flagged() {
        let mut frames = still(30);
        frames[10].pos.insert(JointId::KneeLeft, Some(Vec3::new(0.0, 1.0, 0.5)));
        let rec = TrialRecording::new("S", 1, frames).unwrap();
        let report = detect_artifacts(&rec, ArtifactThresholds::default());
        // Jump in at frame 10 and back out at frame 11.
        assert_eq!(report.flagged[&JointId::KneeLeft], vec![10, 11]);
        assert_eq!(report.recommendation, Recommendation::Keep);
    }
}
