use std::collections::BTreeMap;

use serde_json::{Map, Value};

use super::{JointId, RecordingError};
use crate::geometry::Vec3;

/// One captured skeleton sample.
///
/// A joint maps to `None` when the sensor lost track of it in this frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletalFrame {
    pub t: f64,
    pub pos: BTreeMap<JointId, Option<Vec3>>,
}

impl SkeletalFrame {
    pub fn position(&self, joint: JointId) -> Option<Vec3> {
        self.pos.get(&joint).copied().flatten()
    }
}

/// One walking capture of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording {
    subject_id: String,
    trial_no: u32,
    frames: Vec<SkeletalFrame>,
    joints: Vec<JointId>,
    nominal_fps: f64,
}

impl TrialRecording {
    /// Validates the frames and infers the nominal frame rate.
    ///
    /// Every frame must carry the same joint set, which must include the six
    /// mandatory lower-extremity joints.
    pub fn new(subject_id: impl Into<String>, trial_no: u32, frames: Vec<SkeletalFrame>) -> Result<Self, RecordingError> {
        if frames.len() < 2 {
            return Err(RecordingError::TooShort(frames.len()));
        }
        let joints: Vec<JointId> = frames[0].pos.keys().copied().collect();
        if let Some(&missing) = JointId::MANDATORY.iter().find(|j| !joints.contains(j)) {
            return Err(RecordingError::MissingJoint(missing));
        }
        for (row, frame) in frames.iter().enumerate() {
            if !frame.t.is_finite() {
                return Err(RecordingError::NonFinite { row });
            }
            if frame.pos.len() != joints.len() || !joints.iter().all(|j| frame.pos.contains_key(j)) {
                return Err(RecordingError::InconsistentJoints { row });
            }
            if frame.pos.values().flatten().any(|p| !p.is_finite()) {
                return Err(RecordingError::NonFinite { row });
            }
        }
        if let Some(row) = frames.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(RecordingError::NonMonotoneTime { row: row + 1 });
        }
        let nominal_fps = 1.0 / median_step(&frames);
        Ok(Self {
            subject_id: subject_id.into(),
            trial_no,
            frames,
            joints,
            nominal_fps,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn trial_no(&self) -> u32 {
        self.trial_no
    }

    pub fn frames(&self) -> &[SkeletalFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Joints carried by this recording, in canonical order.
    pub fn joints(&self) -> &[JointId] {
        &self.joints
    }

    pub fn nominal_fps(&self) -> f64 {
        self.nominal_fps
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    /// Full position track of one joint. Fails on the first untracked frame.
    pub fn track(&self, joint: JointId) -> Result<Vec<Vec3>, RecordingError> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| f.position(joint).ok_or(RecordingError::Untracked { joint, frame: i }))
            .collect()
    }

    /// Sub-recording of frames `range`, keeping identity metadata.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self, RecordingError> {
        Self::new(self.subject_id.clone(), self.trial_no, self.frames[range].to_vec())
    }

    /// Same recording with frames replaced, skipping revalidation of identity.
    pub(crate) fn with_frames(&self, frames: Vec<SkeletalFrame>) -> Result<Self, RecordingError> {
        Self::new(self.subject_id.clone(), self.trial_no, frames)
    }

    /// Applies `f` to every tracked position. Used for isometry tests and unit changes.
    pub fn map_positions(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self, RecordingError> {
        let frames = self
            .frames
            .iter()
            .map(|fr| SkeletalFrame {
                t: fr.t,
                pos: fr.pos.iter().map(|(&j, p)| (j, p.map(&f))).collect(),
            })
            .collect();
        self.with_frames(frames)
    }

    /// The recording as it reads back from its own CSV text: every value
    /// rounded to 6 fractional digits.
    pub fn quantized(&self) -> Self {
        let q = |v: f64| -> f64 { format!("{v:.6}").parse().expect("formatted float parses") };
        let frames = self
            .frames
            .iter()
            .map(|fr| SkeletalFrame {
                t: q(fr.t),
                pos: fr
                    .pos
                    .iter()
                    .map(|(&j, p)| (j, p.map(|v| Vec3::new(q(v.x), q(v.y), q(v.z)))))
                    .collect(),
            })
            .collect();
        Self { frames, ..self.clone() }.revalidated()
    }

    fn revalidated(self) -> Self {
        let nominal_fps = 1.0 / median_step(&self.frames);
        Self { nominal_fps, ..self }
    }

    /// CSV header for this recording's joint set.
    pub fn csv_header(&self) -> Vec<String> {
        let mut header = vec!["t".to_owned()];
        for j in &self.joints {
            for axis in ["x", "y", "z"] {
                header.push(format!("{}_{axis}", j.name()));
            }
        }
        header
    }

    /// Canonical CSV text, 6 fractional digits, empty cells for untracked joints.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header().join(",");
        out.push('\n');
        for frame in &self.frames {
            out.push_str(&format!("{:.6}", frame.t));
            for j in &self.joints {
                match frame.position(*j) {
                    Some(p) => out.push_str(&format!(",{:.6},{:.6},{:.6}", p.x, p.y, p.z)),
                    None => out.push_str(",,,"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON container using the same field names as the CSV columns.
    pub fn to_json(&self) -> Value {
        let frames: Vec<Value> = self
            .frames
            .iter()
            .map(|frame| {
                let mut row = Map::new();
                row.insert("t".into(), round6(frame.t));
                for j in &self.joints {
                    let p = frame.position(*j);
                    for (axis, v) in [("x", p.map(|p| p.x)), ("y", p.map(|p| p.y)), ("z", p.map(|p| p.z))] {
                        row.insert(format!("{}_{axis}", j.name()), v.map_or(Value::Null, round6));
                    }
                }
                Value::Object(row)
            })
            .collect();
        serde_json::json!({
            "subject_id": self.subject_id,
            "trial_no": self.trial_no,
            "frames": frames,
        })
    }
}

fn round6(v: f64) -> Value {
    let q: f64 = format!("{v:.6}").parse().expect("formatted float parses");
    serde_json::Number::from_f64(q).map_or(Value::Null, Value::Number)
}

fn median_step(frames: &[SkeletalFrame]) -> f64 {
    let mut steps: Vec<f64> = frames.windows(2).map(|w| w[1].t - w[0].t).collect();
    steps.sort_by(f64::total_cmp);
    let n = steps.len();
    if n % 2 == 1 {
        steps[n / 2]
    } else {
        0.5 * (steps[n / 2 - 1] + steps[n / 2])
    }
}

/// Maps CSV/JSON column names onto (joint, axis) slots.
struct ColumnLayout {
    t: usize,
    joints: Vec<(JointId, [usize; 3])>,
}

impl ColumnLayout {
    fn from_header<S: AsRef<str>>(header: &[S]) -> Result<Self, RecordingError> {
        let mut t = None;
        let mut slots: BTreeMap<JointId, [Option<usize>; 3]> = BTreeMap::new();
        for (idx, name) in header.iter().enumerate() {
            let name = name.as_ref().trim();
            if name == "t" {
                t = Some(idx);
                continue;
            }
            let (joint, axis) = name
                .rsplit_once('_')
                .ok_or_else(|| RecordingError::MalformedHeader(name.to_owned()))?;
            let joint: JointId = joint.parse().map_err(|_| RecordingError::MalformedHeader(name.to_owned()))?;
            let axis = match axis {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => return Err(RecordingError::MalformedHeader(name.to_owned())),
            };
            slots.entry(joint).or_default()[axis] = Some(idx);
        }
        let t = t.ok_or_else(|| RecordingError::MalformedHeader("missing `t` column".into()))?;
        for j in JointId::MANDATORY {
            match slots.get(&j) {
                Some([Some(_), Some(_), Some(_)]) => {}
                _ => return Err(RecordingError::MissingJoint(j)),
            }
        }
        let mut joints = Vec::with_capacity(slots.len());
        for (j, s) in slots {
            match s {
                [Some(x), Some(y), Some(z)] => joints.push((j, [x, y, z])),
                _ => return Err(RecordingError::MalformedHeader(format!("incomplete coordinate triple for {j}"))),
            }
        }
        Ok(Self { t, joints })
    }

    fn frame(&self, row: usize, cell: impl Fn(usize) -> Result<Option<f64>, RecordingError>) -> Result<SkeletalFrame, RecordingError> {
        let t = cell(self.t)?.ok_or(RecordingError::MalformedRow {
            row,
            column: "t".into(),
            value: String::new(),
        })?;
        let mut pos = BTreeMap::new();
        for (j, [x, y, z]) in &self.joints {
            let p = match (cell(*x)?, cell(*y)?, cell(*z)?) {
                (Some(x), Some(y), Some(z)) => Some(Vec3::new(x, y, z)),
                _ => None,
            };
            pos.insert(*j, p);
        }
        Ok(SkeletalFrame { t, pos })
    }
}

fn parse_cell(row: usize, column: &str, text: &str) -> Result<Option<f64>, RecordingError> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(RecordingError::MalformedRow {
            row,
            column: column.to_owned(),
            value: text.to_owned(),
        }),
    }
}

/// Parses a trial CSV document. Rows may appear in any order as long as
/// their timestamps are distinct; frames come back sorted by `t`.
pub fn parse_trial(text: &str, subject_id: &str, trial_no: u32) -> Result<TrialRecording, RecordingError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let layout = ColumnLayout::from_header(&header)?;
    let mut frames = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let frame = layout.frame(row, |idx| parse_cell(row, &header[idx], record.get(idx).unwrap_or("")))?;
        frames.push(frame);
    }
    sort_and_build(subject_id, trial_no, frames)
}

/// Parses the JSON container form, `{subject_id, trial_no, frames: [{t, HIP_LEFT_x, ...}]}`.
///
/// `subject_id`/`trial_no` arguments override the document's own values when given.
pub fn parse_trial_json(text: &str, subject_id: Option<&str>, trial_no: Option<u32>) -> Result<TrialRecording, RecordingError> {
    let doc: Value = serde_json::from_str(text)?;
    let sid = subject_id
        .map(str::to_owned)
        .or_else(|| doc.get("subject_id").and_then(Value::as_str).map(str::to_owned))
        .ok_or_else(|| RecordingError::MalformedHeader("missing subject_id".into()))?;
    let trial = trial_no
        .or_else(|| doc.get("trial_no").and_then(Value::as_u64).map(|v| v as u32))
        .ok_or_else(|| RecordingError::MalformedHeader("missing trial_no".into()))?;
    let rows = doc
        .get("frames")
        .and_then(Value::as_array)
        .ok_or_else(|| RecordingError::MalformedHeader("missing frames array".into()))?;
    let first = rows.first().and_then(Value::as_object).ok_or(RecordingError::TooShort(0))?;
    let header: Vec<String> = first.keys().cloned().collect();
    let layout = ColumnLayout::from_header(&header)?;
    let mut frames = Vec::with_capacity(rows.len());
    for (row, value) in rows.iter().enumerate() {
        let obj = value.as_object().ok_or_else(|| RecordingError::MalformedRow {
            row,
            column: String::new(),
            value: value.to_string(),
        })?;
        let frame = layout.frame(row, |idx| match obj.get(&header[idx]) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::Number(n)) => Ok(n.as_f64()),
            Some(other) => Err(RecordingError::MalformedRow {
                row,
                column: header[idx].clone(),
                value: other.to_string(),
            }),
        })?;
        frames.push(frame);
    }
    sort_and_build(&sid, trial, frames)
}

fn sort_and_build(subject_id: &str, trial_no: u32, mut frames: Vec<SkeletalFrame>) -> Result<TrialRecording, RecordingError> {
    if frames.len() < 2 {
        return Err(RecordingError::TooShort(frames.len()));
    }
    frames.sort_by(|a, b| a.t.total_cmp(&b.t));
    TrialRecording::new(subject_id, trial_no, frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> String {
        let mut h = vec!["t".to_string()];
        for j in JointId::MANDATORY {
            for a in ["x", "y", "z"] {
                h.push(format!("{}_{a}", j.name()));
            }
        }
        h.join(",")
    }

    fn row(t: f64) -> String {
        let mut cells = vec![format!("{t:.3}")];
        for (k, _) in JointId::MANDATORY.iter().enumerate() {
            cells.push(format!("{}", 0.1 * k as f64));
            cells.push("0.5".into());
            cells.push("0.9".into());
        }
        cells.join(",")
    }

    #[test]
    fn two_row_trial() {
        let text = format!("{}\n{}\n{}\n", header(), row(0.0), row(0.033));
        let rec = parse_trial(&text, "S1", 1).unwrap();
        assert_eq!(rec.len(), 2);
        assert!((rec.nominal_fps() - 30.0).abs() < 0.5);
        assert_eq!(rec.subject_id(), "S1");
    }

    #[test]
    fn missing_ankle_z_column() {
        let h = header();
        let drop = h.split(',').position(|c| c == "ANKLE_LEFT_z").unwrap();
        let without = |line: String| -> String {
            line.split(',')
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, c)| c)
                .collect::<Vec<_>>()
                .join(",")
        };
        let text = format!("{}\n{}\n{}\n", without(h.clone()), without(row(0.0)), without(row(0.033)));
        assert!(matches!(
            parse_trial(&text, "S1", 1),
            Err(RecordingError::MissingJoint(JointId::AnkleLeft))
        ));
    }

    #[test]
    fn non_monotone_time() {
        let text = format!("{}\n{}\n{}\n{}\n", header(), row(0.0), row(0.033), row(0.033));
        assert!(matches!(parse_trial(&text, "S1", 1), Err(RecordingError::NonMonotoneTime { .. })));
    }

    #[test]
    fn malformed_cell() {
        let text = format!("{}\n{}\n{}\n", header(), row(0.0), row(0.033).replacen("0.5", "abc", 1));
        assert!(matches!(
            parse_trial(&text, "S1", 1),
            Err(RecordingError::MalformedRow { row: 1, .. })
        ));
    }

    #[test]
    fn too_short() {
        let text = format!("{}\n{}\n", header(), row(0.0));
        assert!(matches!(parse_trial(&text, "S1", 1), Err(RecordingError::TooShort(1))));
    }

    #[test]
    fn empty_cells_mark_untracked() {
        let mut r = row(0.033);
        r = r.replacen(",0.5,", ",,", 1);
        let text = format!("{}\n{}\n{}\n", header(), row(0.0), r);
        let rec = parse_trial(&text, "S1", 1).unwrap();
        assert_eq!(rec.frames()[1].position(JointId::HipLeft), None);
        assert!(rec.track(JointId::HipLeft).is_err());
        assert!(rec.track(JointId::KneeLeft).is_ok());
    }

    #[test]
    fn json_matches_csv() {
        let text = format!("{}\n{}\n{}\n", header(), row(0.0), row(0.033));
        let rec = parse_trial(&text, "S1", 2).unwrap();
        let json = rec.to_json().to_string();
        let back = parse_trial_json(&json, None, None).unwrap();
        assert_eq!(back, rec.quantized());
    }
}
