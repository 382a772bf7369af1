//! Skeletal trial recordings: parsing, gap filling, artifact screening,
//! cohort manifests and a synthetic gait generator for fixtures.

mod artifacts;
mod cohort;
mod gaps;
mod joints;
mod recording;
pub mod synth;

use std::path::PathBuf;

use thiserror::Error;

pub use artifacts::{detect_artifacts, ArtifactReport, ArtifactThresholds, Recommendation};
pub use cohort::{load_trial_file, CohortDataset, CohortManifest, Group, ManifestSubject, SubjectRecord, TrialLoadFailure};
pub use gaps::interpolate_gaps;
pub use joints::{JointId, Leg, UnknownJoint};
pub use recording::{parse_trial, parse_trial_json, SkeletalFrame, TrialRecording};
pub use synth::{synthesize_trial, SynthParams, SynthTrial};

#[derive(Debug, Error)]
pub enum RecordingError {
    #[error("mandatory joint {0} is missing")]
    MissingJoint(JointId),
    #[error("timestamps are not strictly increasing at row {row}")]
    NonMonotoneTime { row: usize },
    #[error("row {row}, column `{column}`: cannot read `{value}` as a finite number")]
    MalformedRow { row: usize, column: String, value: String },
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("recording has {0} frame(s), need at least 2")]
    TooShort(usize),
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
    #[error("row {row} carries a different joint set than row 0")]
    InconsistentJoints { row: usize },
    #[error("{joint} is untracked at frame {frame}")]
    Untracked { joint: JointId, frame: usize },
    #[error("{joint}: gap of {len} frames at frame {start} exceeds the limit of {max_gap}")]
    GapTooLong {
        joint: JointId,
        start: usize,
        len: usize,
        max_gap: usize,
    },
    #[error("{joint}: gap at frame {frame} has no bracketing tracked frame")]
    GapAtBoundary { joint: JointId, frame: usize },
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error("subject {subject_id}: {reason}")]
    InvalidSubject { subject_id: String, reason: String },
    #[error("subject {subject_id} has {found} trial(s), the manifest declares {expected}")]
    TrialCountMismatch { subject_id: String, expected: usize, found: usize },
    #[error("trial refers to unknown subject `{0}`")]
    UnknownSubject(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
