//! Gait analysis from skeletal joint recordings.
//!
//! The pipeline runs trial recordings through gait-cycle segmentation,
//! kinematic index computation and dynamic-time-warping comparison against a
//! control cohort, then summarises the cohort with reliability, correlation
//! and paired-difference statistics.

pub mod dtw;
pub mod gait_cycle;
pub mod geometry;
pub mod kinematics;
pub mod report;
pub mod skeletal_io;
pub mod stats;

pub use dtw::{dtw, DtwResult, Sequence};
pub use gait_cycle::{cycle_from_events, detect_gait_events, extract_cycle, DetectionParams, GaitCycle, GaitEvents};
pub use geometry::Vec3;
pub use kinematics::{GaitIndexSet, IndexKind};
pub use skeletal_io::{parse_trial, JointId, Leg, TrialRecording};
