//! End-to-end cohort run: trials → cycles → indices → mean DTW → statistics
//! → files under the output directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use super::{emit_boxplot, format_sig, write_index_table, write_subject_table, SubjectRow, QUANTILE_METHOD};
use crate::dtw::{mean_dtw_control, mean_dtw_patient, MeanDtw, TrialSeries};
use crate::kinematics::{analyze_trial, AnalysisOptions, GaitIndexSet, IndexKind, JointKind, TrialAnalysis};
use crate::skeletal_io::{
    detect_artifacts, interpolate_gaps, ArtifactReport, ArtifactThresholds, CohortDataset, CohortManifest, Group, Leg, Recommendation,
    RecordingError, SubjectRecord, TrialRecording,
};
use crate::stats::{
    compare_to_reference, parse_reference, stats_tables, CohortIndexData, CohortStats, Discrepancy, ReferenceValue, ICC_MODEL,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("manifest: {0}")]
    Manifest(#[from] RecordingError),
    #[error("reference table: {0}")]
    Reference(String),
    #[error("no trial produced usable indices")]
    NoUsableCohort,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub analysis: AnalysisOptions,
    pub artifacts: ArtifactThresholds,
    /// Drop trials whose artifact screen recommends exclusion.
    pub exclude_artifacts: bool,
    /// Longest run of untracked frames filled by interpolation.
    pub max_gap: usize,
    pub reference: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(manifest: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            manifest: manifest.into(),
            out_dir: out_dir.into(),
            analysis: AnalysisOptions::default(),
            artifacts: ArtifactThresholds::default(),
            exclude_artifacts: true,
            max_gap: 3,
            reference: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if !self.manifest.is_file() {
            return bad(format!("manifest {} does not exist", self.manifest.display()));
        }
        if let Some(r) = &self.reference {
            if !r.is_file() {
                return bad(format!("reference table {} does not exist", r.display()));
            }
        }
        let t = self.analysis.detection.threshold;
        if !(t > 0.0 && t < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {t}"));
        }
        if self.analysis.detection.smoothing_window == 0 {
            return bad("smoothing window must be at least 1".into());
        }
        if self.artifacts.max_speed.is_nan() || self.artifacts.max_speed <= 0.0 {
            return bad("artifact speed bound must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.artifacts.max_severity) {
            return bad("artifact severity bound must lie in [0, 1]".into());
        }
        Ok(())
    }
}

/// Why a trial contributed nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub subject_id: String,
    pub trial_no: u32,
    pub artifacts: Option<ArtifactReport>,
    pub result: Result<TrialAnalysis, TrialFailure>,
}

/// In-memory result of analysing a cohort.
#[derive(Debug, Clone)]
pub struct CohortAnalysis {
    pub subjects: Vec<SubjectRecord>,
    /// In manifest subject order, then trial number.
    pub trials: Vec<TrialOutcome>,
    pub trial_indices: BTreeMap<String, Vec<(u32, GaitIndexSet)>>,
    pub subject_indices: BTreeMap<String, GaitIndexSet>,
    pub dtw: BTreeMap<(String, JointKind), MeanDtw>,
    /// One line per failure, in a fixed order.
    pub errors: Vec<String>,
    pub trials_per_patient: usize,
    pub trials_per_control: usize,
}

impl CohortAnalysis {
    pub fn index_data(&self) -> CohortIndexData {
        CohortIndexData {
            subjects: self.subjects.clone(),
            subject_values: self.subject_indices.clone(),
            trial_values: Some(self.trial_indices.clone()),
            trials_per_patient: self.trials_per_patient,
            trials_per_control: self.trials_per_control,
        }
    }

    pub fn failed_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.result.is_err()).count()
    }
}

fn process_trial(rec: &TrialRecording, subject: &SubjectRecord, cfg: &PipelineConfig) -> TrialOutcome {
    let fail = |stage: &str, message: String, artifacts: Option<ArtifactReport>| TrialOutcome {
        subject_id: rec.subject_id().to_owned(),
        trial_no: rec.trial_no(),
        artifacts,
        result: Err(TrialFailure {
            stage: stage.to_owned(),
            message,
        }),
    };
    let filled = match interpolate_gaps(rec, cfg.max_gap) {
        Ok(r) => r,
        Err(e) => return fail("gap filling", e.to_string(), None),
    };
    let report = detect_artifacts(&filled, cfg.artifacts);
    if cfg.exclude_artifacts && report.recommendation == Recommendation::Exclude {
        let msg = format!("{} of {} frames flagged", report.flagged_frames(), filled.len());
        return fail("artifact screen", msg, Some(report));
    }
    match analyze_trial(&filled, subject.height, &cfg.analysis) {
        Ok(a) => TrialOutcome {
            subject_id: rec.subject_id().to_owned(),
            trial_no: rec.trial_no(),
            artifacts: Some(report),
            result: Ok(a),
        },
        Err(e) => fail(&e.stage.to_string(), e.source.to_string(), Some(report)),
    }
}

fn series(trial: &TrialAnalysis, joint: JointKind) -> TrialSeries {
    let angles = trial.angles(joint);
    TrialSeries {
        subject_id: trial.subject_id.clone(),
        trial_no: trial.trial_no,
        left: angles[&Leg::Left].values.clone(),
        right: angles[&Leg::Right].values.clone(),
    }
}

/// Runs every per-trial stage, the mean-DTW comparison and the index
/// aggregation. `load_failures` are trials that never parsed.
pub fn analyze_cohort(
    dataset: &CohortDataset,
    load_failures: &[(String, u32, String)],
    cfg: &PipelineConfig,
) -> Result<CohortAnalysis, PipelineError> {
    let order: BTreeMap<&str, usize> = dataset
        .subjects
        .iter()
        .enumerate()
        .map(|(i, s)| (s.subject_id.as_str(), i))
        .collect();
    let mut trials: Vec<TrialOutcome> = dataset
        .trials
        .par_iter()
        .map(|rec| {
            let subject = dataset.subject(rec.subject_id()).expect("dataset trials resolve to subjects");
            process_trial(rec, subject, cfg)
        })
        .collect();
    for (sid, trial_no, message) in load_failures {
        trials.push(TrialOutcome {
            subject_id: sid.clone(),
            trial_no: *trial_no,
            artifacts: None,
            result: Err(TrialFailure {
                stage: "load".into(),
                message: message.clone(),
            }),
        });
    }
    trials.sort_by_key(|t| (order.get(t.subject_id.as_str()).copied().unwrap_or(usize::MAX), t.trial_no));

    let mut errors: Vec<String> = trials
        .iter()
        .filter_map(|t| {
            let f = t.result.as_ref().err()?;
            Some(format!("{} trial {}: {}: {}", t.subject_id, t.trial_no, f.stage, f.message))
        })
        .collect();
    let ok: Vec<&TrialAnalysis> = trials.iter().filter_map(|t| t.result.as_ref().ok()).collect();
    if ok.is_empty() {
        return Err(PipelineError::NoUsableCohort);
    }
    let group_of = |sid: &str| dataset.subject(sid).map(|s| s.group);

    let mut dtw = BTreeMap::new();
    for joint in [JointKind::Knee, JointKind::Hip] {
        let controls: Vec<TrialSeries> = ok
            .iter()
            .filter(|t| group_of(&t.subject_id) == Some(Group::Control))
            .map(|t| series(t, joint))
            .collect();
        let results: Vec<(String, Result<MeanDtw, String>)> = dataset
            .subjects
            .par_iter()
            .filter_map(|s| {
                let own: Vec<TrialSeries> = ok
                    .iter()
                    .filter(|t| t.subject_id == s.subject_id)
                    .map(|t| series(t, joint))
                    .collect();
                if own.is_empty() {
                    return None;
                }
                let r = match s.group {
                    Group::Patient => mean_dtw_patient(&own, &controls),
                    Group::Control => mean_dtw_control(&s.subject_id, &controls),
                };
                Some((s.subject_id.clone(), r.map_err(|e| e.to_string())))
            })
            .collect();
        for (sid, r) in results {
            match r {
                Ok(m) => {
                    dtw.insert((sid, joint), m);
                }
                Err(e) => errors.push(format!("{sid}: {joint} mean DTW: {e}")),
            }
        }
    }

    let mut trial_indices: BTreeMap<String, Vec<(u32, GaitIndexSet)>> = BTreeMap::new();
    for t in &ok {
        let mut set = t.indices;
        let per_trial = |joint| {
            dtw.get(&(t.subject_id.clone(), joint))
                .and_then(|m: &MeanDtw| m.per_trial.iter().find(|(n, _)| *n == t.trial_no).map(|&(_, d)| d))
        };
        set.d_k = per_trial(JointKind::Knee);
        set.d_h = per_trial(JointKind::Hip);
        trial_indices.entry(t.subject_id.clone()).or_default().push((t.trial_no, set));
    }
    let subject_indices = trial_indices
        .iter()
        .filter_map(|(sid, rows)| {
            let sets: Vec<GaitIndexSet> = rows.iter().map(|(_, s)| *s).collect();
            let mut mean = GaitIndexSet::mean_of(&sets)?;
            mean.d_k = dtw.get(&(sid.clone(), JointKind::Knee)).map(|m| m.value);
            mean.d_h = dtw.get(&(sid.clone(), JointKind::Hip)).map(|m| m.value);
            Some((sid.clone(), mean))
        })
        .collect();

    Ok(CohortAnalysis {
        subjects: dataset.subjects.clone(),
        trials,
        trial_indices,
        subject_indices,
        dtw,
        errors,
        trials_per_patient: dataset.trials_per_patient,
        trials_per_control: dataset.trials_per_control,
    })
}

/// Files written and statistics computed by a run.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub analysis: CohortAnalysis,
    pub stats: CohortStats,
    pub discrepancies: Vec<Discrepancy>,
    pub files: Vec<PathBuf>,
}

impl PipelineReport {
    /// 0 when every stage succeeded everywhere, 1 when something was excluded.
    pub fn exit_code(&self) -> i32 {
        if self.analysis.errors.is_empty() {
            0
        } else {
            1
        }
    }
}

pub(crate) struct OutDir {
    root: PathBuf,
    pub(crate) files: Vec<PathBuf>,
}

impl OutDir {
    pub(crate) fn create(root: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(root.join("boxplots")).map_err(|e| PipelineError::Io {
            path: root.to_owned(),
            source: e,
        })?;
        Ok(Self {
            root: root.to_owned(),
            files: Vec::new(),
        })
    }

    pub(crate) fn write(&mut self, rel: &str, contents: &str) -> Result<(), PipelineError> {
        let path = self.root.join(rel);
        std::fs::write(&path, contents).map_err(|e| PipelineError::Io {
            path: path.clone(),
            source: e,
        })?;
        self.files.push(path);
        Ok(())
    }
}

fn load_reference(path: Option<&Path>) -> Result<Option<Vec<ReferenceValue>>, PipelineError> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    parse_reference(&text).map(Some).map_err(PipelineError::Reference)
}

fn discrepancy_text(discrepancies: &[Discrepancy]) -> String {
    let mut out = String::new();
    for d in discrepancies {
        let _ = writeln!(out, "{d}");
    }
    out
}

/// Statistics tables, discrepancy report, box plots and run metadata.
/// Box-plot failures are appended to `errors`.
pub fn write_stats_outputs(
    out_dir: &Path,
    data: &CohortIndexData,
    reference: Option<&Path>,
    extra_metadata: serde_json::Value,
    errors: &mut Vec<String>,
) -> Result<(CohortStats, Vec<Discrepancy>, Vec<PathBuf>), PipelineError> {
    let reference = load_reference(reference)?;
    let mut out = OutDir::create(out_dir)?;
    let stats = stats_tables(data);
    out.write("stats_time_distance.csv", &stats.to_csv(&IndexKind::TIME_DISTANCE))?;
    out.write("stats_angle.csv", &stats.to_csv(&IndexKind::ANGLE))?;
    let discrepancies = reference.as_deref().map_or_else(Vec::new, |r| compare_to_reference(&stats, r));
    out.write("discrepancies.txt", &discrepancy_text(&discrepancies))?;

    for index in IndexKind::ALL {
        let values = |group: Group| -> Vec<f64> {
            data.subjects
                .iter()
                .filter(|s| s.group == group)
                .filter_map(|s| data.subject_values.get(&s.subject_id)?.get(index))
                .collect()
        };
        let (ms, control) = (values(Group::Patient), values(Group::Control));
        match emit_boxplot(&[("patient", &ms), ("control", &control)], index.label()) {
            Ok(plot) => {
                out.write(&format!("boxplots/{}.svg", index.key()), &plot.svg)?;
                out.write(&format!("boxplots/{}.csv", index.key()), &plot.csv)?;
            }
            Err(e) => errors.push(format!("box plot {}: {e}", index.key())),
        }
    }

    let mut metadata = json!({
        "icc_model": ICC_MODEL,
        "icc_interval": "95%, F-distribution (two-way random effects, absolute agreement)",
        "correlation_interval": "95%, Fisher z with z = 1.96",
        "correlation_level": "trial (patients only, each trial paired with its subject's score)",
        "t_test": "paired, two-tailed, patient vs matched control subject means",
        "quantile_method": QUANTILE_METHOD,
        "box_plot_whiskers": "1.5 IQR",
        "float_format": "6 significant digits",
        "sd": "sample (n - 1)",
    });
    if let (Some(m), serde_json::Value::Object(extra)) = (metadata.as_object_mut(), extra_metadata) {
        m.extend(extra);
    }
    out.write(
        "metadata.json",
        &(serde_json::to_string_pretty(&metadata).expect("metadata serializes") + "\n"),
    )?;
    Ok((stats, discrepancies, out.files))
}

fn segments_csv(analysis: &CohortAnalysis) -> String {
    let mut out = String::from("subject_id,trial_no,leg,t_hs,t_to,t_ts,cycle_time,stance_fraction,cycle_frames\n");
    for t in &analysis.trials {
        let Ok(a) = &t.result else { continue };
        for (leg, cycle) in &a.cycles {
            let e = &cycle.events;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                t.subject_id,
                t.trial_no,
                leg,
                format_sig(e.t_hs),
                format_sig(e.t_to),
                format_sig(e.t_ts),
                format_sig(e.cycle_time()),
                format_sig(e.stance_fraction()),
                cycle.frames.len()
            );
        }
    }
    out
}

fn trial_indices_csv(analysis: &CohortAnalysis) -> String {
    let mut out = String::from("subject_id,trial_no");
    for k in IndexKind::TABLE_COLUMNS {
        out.push(',');
        out.push_str(k.key());
    }
    out.push('\n');
    for s in &analysis.subjects {
        for (trial_no, set) in analysis.trial_indices.get(&s.subject_id).into_iter().flatten() {
            let _ = write!(out, "{},{trial_no}", s.subject_id);
            for k in IndexKind::TABLE_COLUMNS {
                out.push(',');
                out.push_str(&set.get(k).map(format_sig).unwrap_or_default());
            }
            out.push('\n');
        }
    }
    out
}

/// Loads the manifest, analyses the cohort and writes every artifact under
/// `cfg.out_dir`. Per-trial failures are logged and skipped; only an
/// unusable configuration or an empty cohort is fatal.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, PipelineError> {
    cfg.validate()?;
    let manifest = CohortManifest::load(&cfg.manifest)?;
    let (dataset, failures) = CohortDataset::load(&manifest);
    let failures: Vec<(String, u32, String)> = failures
        .into_iter()
        .map(|f| (f.subject_id, f.trial_no, f.error.to_string()))
        .collect();
    let mut analysis = analyze_cohort(&dataset, &failures, cfg)?;

    let mut out = OutDir::create(&cfg.out_dir)?;
    out.write("segments.csv", &segments_csv(&analysis))?;
    for (group, name) in [(Group::Patient, "indices_patients.csv"), (Group::Control, "indices_controls.csv")] {
        let rows = analysis
            .subjects
            .iter()
            .filter(|s| s.group == group)
            .filter_map(|s| Some((s.subject_id.as_str(), analysis.subject_indices.get(&s.subject_id)?)));
        out.write(name, &write_index_table(rows))?;
    }
    let rows: Vec<SubjectRow> = analysis
        .subjects
        .iter()
        .filter_map(|s| {
            Some(SubjectRow {
                record: s.clone(),
                indices: *analysis.subject_indices.get(&s.subject_id)?,
            })
        })
        .collect();
    out.write("subjects.csv", &write_subject_table(&rows))?;
    out.write("trial_indices.csv", &trial_indices_csv(&analysis))?;

    let extra = json!({
        "segmentation_threshold": cfg.analysis.detection.threshold,
        "smoothing_window": cfg.analysis.detection.smoothing_window,
        "reference_leg": cfg.analysis.reference_leg.as_str(),
        "max_gap_frames": cfg.max_gap,
        "artifact_max_speed": cfg.artifacts.max_speed,
        "artifact_max_severity": cfg.artifacts.max_severity,
        "exclude_artifacts": cfg.exclude_artifacts,
        "dtw_local_cost": "absolute difference, steps (1,0) (0,1) (1,1)",
        "trials_analysed": analysis.trials.len() - analysis.failed_trials(),
        "trials_failed": analysis.failed_trials(),
    });
    let (stats, discrepancies, files) = write_stats_outputs(
        &cfg.out_dir,
        &analysis.index_data(),
        cfg.reference.as_deref(),
        extra,
        &mut analysis.errors,
    )?;
    out.files.extend(files);
    let mut log = analysis.errors.join("\n");
    if !log.is_empty() {
        log.push('\n');
    }
    out.write("errors.log", &log)?;
    Ok(PipelineReport {
        analysis,
        stats,
        discrepancies,
        files: out.files,
    })
}
