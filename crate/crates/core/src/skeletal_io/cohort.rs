use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_trial, parse_trial_json, RecordingError, TrialRecording};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Patient,
    Control,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Patient => "patient",
            Group::Control => "control",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-subject metadata. Height in centimeters, weight in kilograms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRecord {
    pub subject_id: String,
    pub group: Group,
    #[serde(default)]
    pub sex: String,
    #[serde(default)]
    pub age: f64,
    pub height: f64,
    #[serde(default)]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambulation_score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msws: Option<f64>,
    /// Control subject this patient is paired with for paired comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched_control: Option<String>,
}

impl SubjectRecord {
    pub fn validate(&self) -> Result<(), RecordingError> {
        let bad = |why: &str| RecordingError::InvalidSubject {
            subject_id: self.subject_id.clone(),
            reason: why.to_owned(),
        };
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(bad("height must be positive"));
        }
        match self.group {
            Group::Patient => {
                match self.ambulation_score {
                    Some(s) if s <= 9 => {}
                    Some(_) => return Err(bad("ambulation score must lie in 0..=9")),
                    None => return Err(bad("patients need an ambulation score")),
                }
                match self.msws {
                    Some(m) if (0.0..=100.0).contains(&m) => {}
                    Some(_) => return Err(bad("msws must lie in 0..=100")),
                    None => return Err(bad("patients need an msws value")),
                }
            }
            Group::Control => {
                if self.ambulation_score.is_some() || self.msws.is_some() {
                    return Err(bad("controls carry no clinical scores"));
                }
            }
        }
        Ok(())
    }

    pub fn height_m(&self) -> f64 {
        self.height / 100.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestSubject {
    #[serde(flatten)]
    pub record: SubjectRecord,
    /// Trial files relative to the manifest; trial numbers follow list order.
    pub trials: Vec<PathBuf>,
}

/// Cohort manifest: subjects, their trial files and the declared trial counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortManifest {
    pub trials_per_patient: usize,
    pub trials_per_control: usize,
    pub subjects: Vec<ManifestSubject>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl CohortManifest {
    pub fn from_json(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, RecordingError> {
        let mut manifest: CohortManifest = serde_json::from_str(text)?;
        manifest.base_dir = base_dir.into();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn load(path: &Path) -> Result<Self, RecordingError> {
        let text = std::fs::read_to_string(path).map_err(|e| RecordingError::Io {
            path: path.to_owned(),
            source: e,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, base)
    }

    pub fn validate(&self) -> Result<(), RecordingError> {
        let mut seen = BTreeSet::new();
        for s in &self.subjects {
            s.record.validate()?;
            if !seen.insert(s.record.subject_id.as_str()) {
                return Err(RecordingError::InvalidSubject {
                    subject_id: s.record.subject_id.clone(),
                    reason: "duplicate subject id".into(),
                });
            }
            let expected = self.trials_per(s.record.group);
            if s.trials.len() != expected {
                return Err(RecordingError::TrialCountMismatch {
                    subject_id: s.record.subject_id.clone(),
                    expected,
                    found: s.trials.len(),
                });
            }
        }
        for s in &self.subjects {
            if let Some(c) = &s.record.matched_control {
                let ok = self
                    .subjects
                    .iter()
                    .any(|o| &o.record.subject_id == c && o.record.group == Group::Control);
                if !ok {
                    return Err(RecordingError::InvalidSubject {
                        subject_id: s.record.subject_id.clone(),
                        reason: format!("matched control `{c}` is not a control subject"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn trials_per(&self, group: Group) -> usize {
        match group {
            Group::Patient => self.trials_per_patient,
            Group::Control => self.trials_per_control,
        }
    }

    pub fn subject(&self, id: &str) -> Option<&ManifestSubject> {
        self.subjects.iter().find(|s| s.record.subject_id == id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// A trial file that could not be turned into a recording.
#[derive(Debug)]
pub struct TrialLoadFailure {
    pub subject_id: String,
    pub trial_no: u32,
    pub path: PathBuf,
    pub error: RecordingError,
}

/// Loaded cohort: subject metadata plus every trial that parsed.
#[derive(Debug, Clone)]
pub struct CohortDataset {
    pub subjects: Vec<SubjectRecord>,
    pub trials: Vec<TrialRecording>,
    pub trials_per_patient: usize,
    pub trials_per_control: usize,
}

impl CohortDataset {
    /// Builds a dataset from in-memory parts, checking that each trial
    /// resolves to a subject and that trial counts match the declaration.
    pub fn new(
        subjects: Vec<SubjectRecord>,
        trials: Vec<TrialRecording>,
        trials_per_patient: usize,
        trials_per_control: usize,
    ) -> Result<Self, RecordingError> {
        for s in &subjects {
            s.validate()?;
        }
        for t in &trials {
            if !subjects.iter().any(|s| s.subject_id == t.subject_id()) {
                return Err(RecordingError::UnknownSubject(t.subject_id().to_owned()));
            }
        }
        let ds = Self {
            subjects,
            trials,
            trials_per_patient,
            trials_per_control,
        };
        for s in &ds.subjects {
            let found = ds.trials_of(&s.subject_id).count();
            let expected = ds.trials_per(s.group);
            if found != expected {
                return Err(RecordingError::TrialCountMismatch {
                    subject_id: s.subject_id.clone(),
                    expected,
                    found,
                });
            }
        }
        Ok(ds)
    }

    /// Loads every trial listed in `manifest`. Unreadable trials are returned
    /// as failures instead of aborting the load.
    pub fn load(manifest: &CohortManifest) -> (Self, Vec<TrialLoadFailure>) {
        let mut trials = Vec::new();
        let mut failures = Vec::new();
        for s in &manifest.subjects {
            for (k, rel) in s.trials.iter().enumerate() {
                let trial_no = k as u32 + 1;
                let path = manifest.base_dir.join(rel);
                match load_trial_file(&path, &s.record.subject_id, trial_no) {
                    Ok(rec) => trials.push(rec),
                    Err(error) => failures.push(TrialLoadFailure {
                        subject_id: s.record.subject_id.clone(),
                        trial_no,
                        path,
                        error,
                    }),
                }
            }
        }
        let ds = Self {
            subjects: manifest.subjects.iter().map(|s| s.record.clone()).collect(),
            trials,
            trials_per_patient: manifest.trials_per_patient,
            trials_per_control: manifest.trials_per_control,
        };
        (ds, failures)
    }

    pub fn trials_per(&self, group: Group) -> usize {
        match group {
            Group::Patient => self.trials_per_patient,
            Group::Control => self.trials_per_control,
        }
    }

    pub fn n_patients(&self) -> usize {
        self.subjects.iter().filter(|s| s.group == Group::Patient).count()
    }

    pub fn n_controls(&self) -> usize {
        self.subjects.iter().filter(|s| s.group == Group::Control).count()
    }

    pub fn subject(&self, id: &str) -> Option<&SubjectRecord> {
        self.subjects.iter().find(|s| s.subject_id == id)
    }

    pub fn trials_of<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a TrialRecording> + 'a {
        self.trials.iter().filter(move |t| t.subject_id() == id)
    }
}

/// Reads a trial file, choosing the JSON container for `.json` files and CSV otherwise.
pub fn load_trial_file(path: &Path, subject_id: &str, trial_no: u32) -> Result<TrialRecording, RecordingError> {
    let text = std::fs::read_to_string(path).map_err(|e| RecordingError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        parse_trial_json(&text, Some(subject_id), Some(trial_no))
    } else {
        parse_trial(&text, subject_id, trial_no)
    }
}
