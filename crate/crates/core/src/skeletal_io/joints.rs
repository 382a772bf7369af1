use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The 20 skeleton joints tracked by a first-generation Kinect sensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JointId {
    HipCenter,
    Spine,
    ShoulderCenter,
    Head,
    ShoulderLeft,
    ElbowLeft,
    WristLeft,
    HandLeft,
    ShoulderRight,
    ElbowRight,
    WristRight,
    HandRight,
    HipLeft,
    KneeLeft,
    AnkleLeft,
    FootLeft,
    HipRight,
    KneeRight,
    AnkleRight,
    FootRight,
}

impl JointId {
    pub const ALL: [JointId; 20] = [
        JointId::HipCenter,
        JointId::Spine,
        JointId::ShoulderCenter,
        JointId::Head,
        JointId::ShoulderLeft,
        JointId::ElbowLeft,
        JointId::WristLeft,
        JointId::HandLeft,
        JointId::ShoulderRight,
        JointId::ElbowRight,
        JointId::WristRight,
        JointId::HandRight,
        JointId::HipLeft,
        JointId::KneeLeft,
        JointId::AnkleLeft,
        JointId::FootLeft,
        JointId::HipRight,
        JointId::KneeRight,
        JointId::AnkleRight,
        JointId::FootRight,
    ];

    /// Joints every recording must carry.
    pub const MANDATORY: [JointId; 6] = [
        JointId::HipLeft,
        JointId::KneeLeft,
        JointId::AnkleLeft,
        JointId::HipRight,
        JointId::KneeRight,
        JointId::AnkleRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JointId::HipCenter => "HIP_CENTER",
            JointId::Spine => "SPINE",
            JointId::ShoulderCenter => "SHOULDER_CENTER",
            JointId::Head => "HEAD",
            JointId::ShoulderLeft => "SHOULDER_LEFT",
            JointId::ElbowLeft => "ELBOW_LEFT",
            JointId::WristLeft => "WRIST_LEFT",
            JointId::HandLeft => "HAND_LEFT",
            JointId::ShoulderRight => "SHOULDER_RIGHT",
            JointId::ElbowRight => "ELBOW_RIGHT",
            JointId::WristRight => "WRIST_RIGHT",
            JointId::HandRight => "HAND_RIGHT",
            JointId::HipLeft => "HIP_LEFT",
            JointId::KneeLeft => "KNEE_LEFT",
            JointId::AnkleLeft => "ANKLE_LEFT",
            JointId::FootLeft => "FOOT_LEFT",
            JointId::HipRight => "HIP_RIGHT",
            JointId::KneeRight => "KNEE_RIGHT",
            JointId::AnkleRight => "ANKLE_RIGHT",
            JointId::FootRight => "FOOT_RIGHT",
        }
    }

    pub fn is_mandatory(self) -> bool {
        Self::MANDATORY.contains(&self)
    }

    /// Lower-extremity joints, subject to the artifact speed bound.
    pub fn is_lower_extremity(self) -> bool {
        matches!(
            self,
            JointId::HipLeft
                | JointId::KneeLeft
                | JointId::AnkleLeft
                | JointId::FootLeft
                | JointId::HipRight
                | JointId::KneeRight
                | JointId::AnkleRight
                | JointId::FootRight
        )
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownJoint(pub String);

impl fmt::Display for UnknownJoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown joint name `{}`", self.0)
    }
}

impl std::error::Error for UnknownJoint {}

impl FromStr for JointId {
    type Err = UnknownJoint;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JointId::ALL
            .iter()
            .copied()
            .find(|j| j.name() == s)
            .ok_or_else(|| UnknownJoint(s.to_owned()))
    }
}

/// Body side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub const BOTH: [Leg; 2] = [Leg::Left, Leg::Right];

    pub fn other(self) -> Leg {
        match self {
            Leg::Left => Leg::Right,
            Leg::Right => Leg::Left,
        }
    }

    pub fn hip(self) -> JointId {
        match self {
            Leg::Left => JointId::HipLeft,
            Leg::Right => JointId::HipRight,
        }
    }

    pub fn knee(self) -> JointId {
        match self {
            Leg::Left => JointId::KneeLeft,
            Leg::Right => JointId::KneeRight,
        }
    }

    pub fn ankle(self) -> JointId {
        match self {
            Leg::Left => JointId::AnkleLeft,
            Leg::Right => JointId::AnkleRight,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Leg::Left => "left",
            Leg::Right => "right",
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Leg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" | "l" => Ok(Leg::Left),
            "right" | "r" => Ok(Leg::Right),
            other => Err(format!("unknown leg `{other}`")),
        }
    }
}
