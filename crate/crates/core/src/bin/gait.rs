use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gait_core::dtw::{mean_dtw_control, mean_dtw_patient, TrialSeries};
use gait_core::gait_cycle::extract_cycle;
use gait_core::kinematics::{analyze_trial, AnalysisOptions, JointKind};
use gait_core::report::{
    analyze_cohort, format_sig, read_subject_table, run_pipeline, write_index_table, write_stats_outputs, PipelineConfig,
};
use gait_core::skeletal_io::synth::{synthesize_cohort, write_cohort, CohortSynthParams};
use gait_core::skeletal_io::{interpolate_gaps, load_trial_file, CohortDataset, CohortManifest, Group, Leg};
use gait_core::stats::CohortIndexData;
use gait_core::DetectionParams;

#[derive(Parser)]
#[command(
    name = "gait",
    version,
    about = "Gait indices, DTW distances and cohort statistics from skeletal recordings"
)]
struct Cli {
    /// Cohort manifest (JSON).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Stationary-ankle threshold as a fraction of peak ankle speed.
    #[arg(long, global = true, default_value_t = 0.15)]
    threshold: f64,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect gait events in one trial and print them as JSON.
    Segment {
        /// Trial file (CSV or JSON).
        trial: PathBuf,
        /// Leg to segment; both when omitted.
        #[arg(long)]
        leg: Option<Leg>,
    },
    /// Compute gait indices for one trial or a whole cohort.
    Indices {
        /// Trial file (CSV or JSON).
        trial: Option<PathBuf>,
        /// Subject id in the manifest, used for height.
        #[arg(long)]
        subject: Option<String>,
        /// Cohort manifest; prints one CSV row per subject.
        #[arg(long)]
        cohort: Option<PathBuf>,
        #[command(flatten)]
        trial_opts: TrialOpts,
    },
    /// Mean DTW distance of one subject against the control cohort.
    Dtw {
        /// Subject id in the manifest (patient or control).
        #[arg(long)]
        patient: String,
        /// Joint angle series to compare: knee or hip.
        #[arg(long, default_value = "knee")]
        joint: JointKind,
        /// Write every pairwise distance as CSV.
        #[arg(long)]
        dump_matrix: Option<PathBuf>,
        #[command(flatten)]
        trial_opts: TrialOpts,
    },
    /// Full pipeline: per-trial indices, statistics, box plots, discrepancy report.
    Cohort {
        /// Cohort manifest; falls back to --manifest.
        manifest_path: Option<PathBuf>,
        /// Reference statistics as `statistic,index,value` CSV.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        trial_opts: TrialOpts,
    },
    /// Statistics from a subject-level index table (no trial-level cells).
    Report {
        /// Subject table with metadata and index columns.
        #[arg(long)]
        indices: PathBuf,
        /// Reference statistics as `statistic,index,value` CSV.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Write a synthetic cohort (trial CSVs plus manifest.json).
    Synth {
        /// Number of patients.
        #[arg(long, default_value_t = 10)]
        patients: usize,
        /// Number of controls.
        #[arg(long, default_value_t = 10)]
        controls: usize,
        /// Trials per subject.
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Ankle/joint position noise SD in meters.
        #[arg(long, default_value_t = 0.0)]
        noise_sd: f64,
        /// Frame rate, Hz.
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
    },
}

#[derive(Args, Clone)]
struct TrialOpts {
    /// Leg whose cycle gives the time-distance indices.
    #[arg(long, default_value = "left")]
    reference_leg: Leg,
    /// Longest untracked run filled by interpolation, frames.
    #[arg(long, default_value_t = 3)]
    max_gap: usize,
    /// Keep trials the artifact screen would drop.
    #[arg(long)]
    keep_artifacts: bool,
}

type Fallible<T> = Result<T, String>;

fn config(cli: &Cli, manifest: PathBuf, out: PathBuf, opts: &TrialOpts) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(manifest, out);
    cfg.analysis = AnalysisOptions {
        detection: DetectionParams::with_threshold(cli.threshold),
        reference_leg: opts.reference_leg,
    };
    cfg.max_gap = opts.max_gap;
    cfg.exclude_artifacts = !opts.keep_artifacts;
    cfg
}

fn require_manifest(cli: &Cli, explicit: Option<&PathBuf>) -> Fallible<PathBuf> {
    explicit
        .or(cli.manifest.as_ref())
        .cloned()
        .ok_or_else(|| "a cohort manifest is required (--manifest)".to_owned())
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("gait_out"))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn segment(cli: &Cli, trial: &Path, leg: Option<Leg>) -> Fallible<u8> {
    let rec = load_trial_file(trial, "trial", 1).map_err(|e| e.to_string())?;
    let rec = interpolate_gaps(&rec, 3).map_err(|e| e.to_string())?;
    let params = DetectionParams::with_threshold(cli.threshold);
    let legs = leg.map_or(Leg::BOTH.to_vec(), |l| vec![l]);
    let mut out = serde_json::Map::new();
    let mut failed = false;
    for leg in legs {
        let value = match extract_cycle(&rec, leg, &params) {
            Ok(c) => json!({
                "t_hs": c.events.t_hs,
                "t_to": c.events.t_to,
                "t_ts": c.events.t_ts,
                "cycle_time": c.cycle_time(),
                "stance_fraction": c.events.stance_fraction(),
                "frames": c.frames.len(),
            }),
            Err(e) => {
                failed = true;
                json!({ "error": e.to_string() })
            }
        };
        out.insert(leg.as_str().into(), value);
    }
    println!("{}", to_json(&out));
    Ok(u8::from(failed))
}

fn indices(cli: &Cli, trial: Option<&Path>, subject: Option<&str>, cohort: Option<&PathBuf>, opts: &TrialOpts) -> Fallible<u8> {
    if let Some(manifest_path) = cohort {
        let manifest = CohortManifest::load(manifest_path).map_err(|e| e.to_string())?;
        let (dataset, failures) = CohortDataset::load(&manifest);
        let failures: Vec<_> = failures
            .into_iter()
            .map(|f| (f.subject_id, f.trial_no, f.error.to_string()))
            .collect();
        let cfg = config(cli, manifest_path.clone(), out_dir(cli), opts);
        let analysis = analyze_cohort(&dataset, &failures, &cfg).map_err(|e| e.to_string())?;
        for e in &analysis.errors {
            eprintln!("{e}");
        }
        let rows = analysis
            .subjects
            .iter()
            .filter_map(|s| Some((s.subject_id.as_str(), analysis.subject_indices.get(&s.subject_id)?)));
        print!("{}", write_index_table(rows));
        return Ok(u8::from(!analysis.errors.is_empty()));
    }
    let trial = trial.ok_or("give a trial file or --cohort")?;
    let subject_id = subject.ok_or("--subject is required with a trial file")?;
    let manifest = CohortManifest::load(&require_manifest(cli, None)?).map_err(|e| e.to_string())?;
    let subject = manifest
        .subject(subject_id)
        .ok_or_else(|| format!("subject `{subject_id}` not in manifest"))?;
    let rec = load_trial_file(trial, subject_id, 1).map_err(|e| e.to_string())?;
    let rec = interpolate_gaps(&rec, opts.max_gap).map_err(|e| e.to_string())?;
    let opts = AnalysisOptions {
        detection: DetectionParams::with_threshold(cli.threshold),
        reference_leg: opts.reference_leg,
    };
    let analysis = analyze_trial(&rec, subject.record.height, &opts).map_err(|e| e.to_string())?;
    println!("{}", to_json(&analysis.indices));
    Ok(0)
}

fn dtw(cli: &Cli, patient: &str, joint: JointKind, dump: Option<&Path>, opts: &TrialOpts) -> Fallible<u8> {
    let manifest_path = require_manifest(cli, None)?;
    let manifest = CohortManifest::load(&manifest_path).map_err(|e| e.to_string())?;
    let (dataset, failures) = CohortDataset::load(&manifest);
    let failures: Vec<_> = failures
        .into_iter()
        .map(|f| (f.subject_id, f.trial_no, f.error.to_string()))
        .collect();
    let cfg = config(cli, manifest_path, out_dir(cli), opts);
    let analysis = analyze_cohort(&dataset, &failures, &cfg).map_err(|e| e.to_string())?;
    let subject = dataset
        .subject(patient)
        .ok_or_else(|| format!("subject `{patient}` not in manifest"))?;
    let series = |group: Option<Group>, id: Option<&str>| -> Vec<TrialSeries> {
        analysis
            .trials
            .iter()
            .filter_map(|t| t.result.as_ref().ok())
            .filter(|t| id.is_none_or(|id| t.subject_id == id))
            .filter(|t| group.is_none_or(|g| dataset.subject(&t.subject_id).map(|s| s.group) == Some(g)))
            .map(|t| {
                let a = t.angles(joint);
                TrialSeries {
                    subject_id: t.subject_id.clone(),
                    trial_no: t.trial_no,
                    left: a[&Leg::Left].values.clone(),
                    right: a[&Leg::Right].values.clone(),
                }
            })
            .collect()
    };
    let controls = series(Some(Group::Control), None);
    let result = match subject.group {
        Group::Patient => mean_dtw_patient(&series(None, Some(patient)), &controls),
        Group::Control => mean_dtw_control(patient, &controls),
    }
    .map_err(|e| e.to_string())?;
    println!("{}", format_sig(result.value));
    if let Some(path) = dump {
        let mut csv = String::from("leg,trial_no,other_subject,other_trial,distance\n");
        for p in &result.pairs {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                p.leg,
                p.trial_no,
                p.other_subject,
                p.other_trial,
                format_sig(p.distance)
            ));
        }
        std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(0)
}

fn cohort(cli: &Cli, manifest: Option<&PathBuf>, reference: Option<&PathBuf>, opts: &TrialOpts) -> Fallible<u8> {
    let mut cfg = config(cli, require_manifest(cli, manifest)?, out_dir(cli), opts);
    cfg.reference = reference.cloned();
    let report = run_pipeline(&cfg).map_err(|e| e.to_string())?;
    for e in &report.analysis.errors {
        eprintln!("{e}");
    }
    eprintln!(
        "wrote {} files to {}; {} discrepancies",
        report.files.len(),
        cfg.out_dir.display(),
        report.discrepancies.len()
    );
    Ok(report.exit_code() as u8)
}

fn report(cli: &Cli, indices: &Path, reference: Option<&PathBuf>) -> Fallible<u8> {
    let text = std::fs::read_to_string(indices).map_err(|e| format!("{}: {e}", indices.display()))?;
    let rows = read_subject_table(&text)?;
    let data = CohortIndexData {
        subjects: rows.iter().map(|r| r.record.clone()).collect(),
        subject_values: rows.iter().map(|r| (r.record.subject_id.clone(), r.indices)).collect(),
        trial_values: None,
        trials_per_patient: 0,
        trials_per_control: 0,
    };
    let mut errors = Vec::new();
    let extra = json!({ "source": "subject-level table; trial-level cells not computed" });
    let out = out_dir(cli);
    let (_, discrepancies, _) =
        write_stats_outputs(&out, &data, reference.map(PathBuf::as_path), extra, &mut errors).map_err(|e| e.to_string())?;
    for e in &errors {
        eprintln!("{e}");
    }
    for d in &discrepancies {
        println!("{d}");
    }
    Ok(u8::from(!errors.is_empty()))
}

fn synth(cli: &Cli, patients: usize, controls: usize, trials: usize, noise_sd: f64, fps: f64) -> Fallible<u8> {
    let params = CohortSynthParams {
        n_patients: patients,
        n_controls: controls,
        trials_per_subject: trials,
        noise_sd,
        fps,
        seed: cli.seed,
    };
    let cohort = synthesize_cohort(&params).map_err(|e| e.to_string())?;
    let path = write_cohort(&cohort.dataset, &out_dir(cli)).map_err(|e| e.to_string())?;
    println!("{}", path.display());
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Segment { trial, leg } => segment(&cli, trial, *leg),
        Command::Indices {
            trial,
            subject,
            cohort,
            trial_opts,
        } => indices(&cli, trial.as_deref(), subject.as_deref(), cohort.as_ref(), trial_opts),
        Command::Dtw {
            patient,
            joint,
            dump_matrix,
            trial_opts,
        } => dtw(&cli, patient, *joint, dump_matrix.as_deref(), trial_opts),
        Command::Cohort {
            manifest_path,
            reference,
            trial_opts,
        } => cohort(&cli, manifest_path.as_ref(), reference.as_ref(), trial_opts),
        Command::Report { indices, reference } => report(&cli, indices, reference.as_ref()),
        Command::Synth {
            patients,
            controls,
            trials,
            noise_sd,
            fps,
        } => synth(&cli, *patients, *controls, *trials, *noise_sd, *fps),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
