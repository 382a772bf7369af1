use super::{RecordingError, SkeletalFrame, TrialRecording};

/// Fills runs of untracked samples by per-joint linear interpolation in time
/// between the bracketing tracked frames.
///
/// Runs longer than `max_gap` frames, or runs touching either end of the
/// recording, are rejected. Timestamps are never altered.
pub fn interpolate_gaps(rec: &TrialRecording, max_gap: usize) -> Result<TrialRecording, RecordingError> {
    let mut frames: Vec<SkeletalFrame> = rec.frames().to_vec();
    let n = frames.len();
    for &joint in rec.joints() {
        let mut i = 0;
        while i < n {
            if frames[i].position(joint).is_some() {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && frames[i].position(joint).is_none() {
                i += 1;
            }
            let len = i - start;
            if start == 0 || i == n {
                return Err(RecordingError::GapAtBoundary { joint, frame: start });
            }
            if len > max_gap {
                return Err(RecordingError::GapTooLong {
                    joint,
                    start,
                    len,
                    max_gap,
                });
            }
            let (t0, p0) = (frames[start - 1].t, frames[start - 1].position(joint).expect("tracked"));
            let (t1, p1) = (frames[i].t, frames[i].position(joint).expect("tracked"));
            for frame in &mut frames[start..i] {
                let frac = (frame.t - t0) / (t1 - t0);
                frame.pos.insert(joint, Some(p0.lerp(p1, frac)));
            }
        }
    }
    rec.with_frames(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::skeletal_io::JointId;
    use std::collections::BTreeMap;

    fn recording(ankle: &[Option<Vec3>]) -> TrialRecording {
        let frames = ankle
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut pos = BTreeMap::new();
                for j in JointId::MANDATORY {
                    pos.insert(j, Some(Vec3::new(0.0, 0.0, 0.5)));
                }
                pos.insert(JointId::AnkleLeft, *a);
                SkeletalFrame { t: i as f64 / 30.0, pos }
            })
            .collect();
        TrialRecording::new("S", 1, frames).unwrap()
    }

    #[test]
    fn no_gaps_is_identity() {
        let rec = recording(&[Some(Vec3::default()); 4]);
        assert_eq!(interpolate_gaps(&rec, 3).unwrap(), rec);
    }

    #[test]
    fn single_gap_midpoint() {
        let rec = recording(&[Some(Vec3::new(0.0, 0.0, 0.0)), None, Some(Vec3::new(0.0, 0.2, 0.0))]);
        let filled = interpolate_gaps(&rec, 3).unwrap();
        let mid = filled.frames()[1].position(JointId::AnkleLeft).unwrap();
        assert!((mid.y - 0.1).abs() < 1e-15);
        assert_eq!(filled.times(), rec.times());
    }

    #[test]
    fn gap_too_long() {
        let mut a = vec![Some(Vec3::default())];
        a.extend([None; 4]);
        a.push(Some(Vec3::default()));
        let err = interpolate_gaps(&recording(&a), 3).unwrap_err();
        assert!(matches!(err, RecordingError::GapTooLong { len: 4, max_gap: 3, .. }));
    }

    #[test]
    fn gap_at_boundary() {
        let rec = recording(&[None, Some(Vec3::default()), Some(Vec3::default())]);
        assert!(matches!(
            interpolate_gaps(&rec, 3),
            Err(RecordingError::GapAtBoundary { frame: 0, .. })
        ));
        let rec = recording(&[Some(Vec3::default()), Some(Vec3::default()), None]);
        assert!(matches!(
            interpolate_gaps(&rec, 3),
            Err(RecordingError::GapAtBoundary { frame: 2, .. })
        ));
    }

    #[test]
    fn idempotent() {
        let rec = recording(&[Some(Vec3::new(1.0, 2.0, 3.0)), None, None, Some(Vec3::new(2.0, 2.0, 0.0))]);
        let once = interpolate_gaps(&rec, 3).unwrap();
        assert_eq!(interpolate_gaps(&once, 3).unwrap(), once);
    }
}
