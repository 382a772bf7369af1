//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gait_core::dtw::{brute_force_dtw, dtw, mean_dtw_control_with, mean_dtw_patient_with, TrialSeries};
use gait_core::kinematics::{hip_angle_series, knee_angle_series, range_of_motion, time_distance_indices, IndexKind};
use gait_core::report::{read_subject_table, run_pipeline, PipelineConfig};
use gait_core::skeletal_io::synth::{synthesize_cohort, write_cohort, CohortSynthParams};
use gait_core::skeletal_io::{synthesize_trial, Group, SynthParams};
use gait_core::stats::{
    compare_to_reference, f_cdf, f_quantile, group_summary, icc, parse_reference, pearson_ci, stats_tables, t_cdf, CohortIndexData,
    StatKind,
};
use gait_core::{cycle_from_events, extract_cycle, DetectionParams, GaitEvents, Leg};

type Outcome = Result<String, String>;

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {:.2} s, limit {limit_s} s", elapsed.as_secs_f64()))
    }
}

fn data_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn random_seq(rng: &mut ChaCha8Rng, max_len: usize) -> Vec<f64> {
    let n = rng.gen_range(1..=max_len);
    (0..n).map(|_| rng.gen_range(0.0..50.0)).collect()
}

fn dtw_matches_exhaustive() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..500 {
        let (a, b) = (random_seq(&mut rng, 6), random_seq(&mut rng, 6));
        let fast = dtw(&a, &b).map_err(|e| e.to_string())?.distance;
        let slow = brute_force_dtw(&a, &b).map_err(|e| e.to_string())?;
        if fast.to_bits() != slow.to_bits() {
            return Err(format!("case {case}: dp {fast} vs exhaustive {slow}"));
        }
    }
    within(start.elapsed(), 5.0)?;
    Ok("500 pairs bit-identical".into())
}

fn dtw_properties() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..1000 {
        let a = random_seq(&mut rng, 12);
        let b = random_seq(&mut rng, 12);
        let d = |x: &[f64], y: &[f64]| dtw(x, y).map_err(|e| e.to_string());

        if d(&a, &a)?.distance != 0.0 {
            return Err(format!("case {case}: DTW(A, A) != 0"));
        }
        let (ab, ba) = (d(&a, &b)?, d(&b, &a)?);
        if ab.distance != ba.distance {
            return Err(format!("case {case}: asymmetric {} vs {}", ab.distance, ba.distance));
        }
        let mut stutter = a.clone();
        let i = rng.gen_range(0..a.len());
        stutter.insert(i, a[i]);
        if d(&a, &stutter)?.distance != 0.0 {
            return Err(format!("case {case}: duplicating an element changed DTW"));
        }
        if !ab.path.is_valid(a.len(), b.len()) {
            return Err(format!("case {case}: invalid warping path"));
        }
        let along: f64 = ab.path.pairs().iter().fold(0.0, |acc, &(i, j)| acc + (a[i] - b[j]).abs());
        if along != ab.distance {
            return Err(format!("case {case}: path cost {along} vs distance {}", ab.distance));
        }
    }
    within(start.elapsed(), 10.0)?;
    Ok("identity, symmetry, duplication, path validity, path cost on 1000 cases each".into())
}

fn fisher_interval_anchor() -> Outcome {
    // Any sample with r = -0.69 works; the interval depends on r and n only.
    let n = 50;
    let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + i as f64 / 50.0).collect();
    let noise: Vec<f64> = (0..n).map(|i| (i as f64 * 1.91).cos()).collect();
    let mix = |w: f64| -> Vec<f64> { x.iter().zip(&noise).map(|(a, e)| -a + w * e).collect() };
    // Bisect the noise weight so that the sample correlation is -0.69.
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = pearson_ci(&x, &mix(mid)).map_err(|e| e.to_string())?.r;
        if r < -0.69 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = pearson_ci(&x, &mix(0.5 * (lo + hi))).map_err(|e| e.to_string())?;
    if (c.r + 0.69).abs() > 1e-9 {
        return Err(format!("could not construct r = -0.69 (got {})", c.r));
    }
    let trunc2 = |v: f64| (v * 100.0).trunc() / 100.0;
    let computed = (c.ci_low, c.ci_high);
    if (computed.0 + 0.813).abs() > 1e-3 || (computed.1 + 0.509).abs() > 1e-3 {
        return Err(format!(
            "interval ({:.5}, {:.5}), expected (-0.813, -0.509)",
            computed.0, computed.1
        ));
    }
    if (trunc2(computed.0), trunc2(computed.1)) != (-0.81, -0.50) {
        return Err(format!(
            "interval ({:.5}, {:.5}) does not print as (-0.81, -0.50)",
            computed.0, computed.1
        ));
    }
    Ok(format!(
        "r = -0.69, n = 50 -> ({:.3}, {:.3}); two decimals toward zero ({:.2}, {:.2}); half-up ({:.2}, {:.2})",
        computed.0,
        computed.1,
        trunc2(computed.0),
        trunc2(computed.1),
        computed.0,
        computed.1
    ))
}

fn group_summary_anchor() -> Outcome {
    let text = std::fs::read_to_string(data_path("reference_cohort.csv")).map_err(|e| e.to_string())?;
    let rows = read_subject_table(&text)?;
    let values = |g: Group| -> Vec<f64> { rows.iter().filter(|r| r.record.group == g).map(|r| r.indices.v_n).collect() };
    let control = group_summary(&values(Group::Control), Group::Control, IndexKind::NormalizedVelocity).map_err(|e| e.to_string())?;
    let ms = group_summary(&values(Group::Patient), Group::Patient, IndexKind::NormalizedVelocity).map_err(|e| e.to_string())?;
    if format!("{:.1} ({:.2})", control.mean, control.sd) != "1.2 (0.14)" {
        return Err(format!(
            "control v_n {:.4} ({:.4}) does not print as 1.2 (0.14)",
            control.mean, control.sd
        ));
    }

    let data = CohortIndexData {
        subjects: rows.iter().map(|r| r.record.clone()).collect(),
        subject_values: rows.iter().map(|r| (r.record.subject_id.clone(), r.indices)).collect(),
        trial_values: None,
        trials_per_patient: 0,
        trials_per_control: 0,
    };
    let reference = parse_reference(&std::fs::read_to_string(data_path("reference_stats.csv")).map_err(|e| e.to_string())?)?;
    let stats = stats_tables(&data);
    let discrepancies = compare_to_reference(&stats, &reference);
    let listed = |stat: StatKind| {
        discrepancies
            .iter()
            .any(|d| d.reference.statistic == stat && d.reference.index == IndexKind::NormalizedVelocity)
    };
    if !(listed(StatKind::MsMean) && listed(StatKind::MsSd)) {
        return Err("patient v_n mean/SD mismatch missing from the discrepancy report".into());
    }
    if listed(StatKind::ControlMean) || listed(StatKind::ControlSd) {
        return Err("control v_n mean/SD wrongly reported as discrepant".into());
    }
    Ok(format!(
        "control v_n {:.3} ({:.3}) -> 1.2 (0.14); patient {:.2} ({:.2}) reported against 0.4 (0.14); {} discrepancies listed",
        control.mean,
        control.sd,
        ms.mean,
        ms.sd,
        discrepancies.len()
    ))
}

fn segmentation_accuracy() -> Outcome {
    let start = Instant::now();
    let fps = 30.0;
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let params = SynthParams {
            noise_sd: 0.005,
            fps,
            start_phase: 0.6 + 0.2 * seed as f64 / 100.0,
            seed,
            ..SynthParams::default()
        };
        let trial = synthesize_trial(&params, "S", 1).map_err(|e| e.to_string())?;
        let truth = trial.truth.left.ok_or("generator produced no complete cycle")?;
        let Ok(cycle) = extract_cycle(&trial.recording, Leg::Left, &DetectionParams::default()) else {
            continue;
        };
        let e = cycle.events;
        let off = [e.t_hs - truth.t_hs, e.t_to - truth.t_to, e.t_ts - truth.t_ts]
            .iter()
            .map(|d| (d * fps).abs())
            .fold(0.0, f64::max);
        worst = worst.max(off);
        if off <= 1.0 + 1e-9 {
            hits += 1;
        }
    }
    within(start.elapsed(), 5.0)?;

    // Same check across a whole noisy cohort with varied gait parameters, for information.
    let cohort = synthesize_cohort(&CohortSynthParams {
        noise_sd: 0.005,
        ..CohortSynthParams::default()
    })
    .map_err(|e| e.to_string())?;
    let cohort_hits = cohort
        .dataset
        .trials
        .iter()
        .filter(|rec| {
            let truth = cohort.truth[&(rec.subject_id().to_owned(), rec.trial_no())].left;
            match (truth, extract_cycle(rec, Leg::Left, &DetectionParams::default())) {
                (Some(t), Ok(c)) => [c.events.t_hs - t.t_hs, c.events.t_to - t.t_to, c.events.t_ts - t.t_ts]
                    .iter()
                    .all(|d| (d * fps).abs() <= 1.0 + 1e-9),
                _ => false,
            }
        })
        .count();

    let detail = format!(
        "{hits}/100 trials within 1 frame (worst {worst:.2} frames); varied cohort {cohort_hits}/{}",
        cohort.dataset.trials.len()
    );
    if hits >= 95 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn index_closed_form() -> Outcome {
    let start = Instant::now();
    let fps = 30.0;
    // (cycle frames, stance frames, stride m, height cm): events land on frames.
    let cases = [
        (45, 27, 1.2, 170.0),
        (40, 26, 0.9, 158.0),
        (51, 30, 1.45, 183.0),
        (36, 22, 1.05, 165.0),
    ];
    let mut worst_rom: f64 = 0.0;
    for (cycle_frames, stance_frames, stride, height) in cases {
        let params = SynthParams {
            stride_length: stride,
            cycle_time: cycle_frames as f64 / fps,
            stance_fraction: stance_frames as f64 / cycle_frames as f64,
            start_phase: 1.0 - 12.0 / cycle_frames as f64,
            height_cm: height,
            fps,
            ..SynthParams::default()
        };
        let trial = synthesize_trial(&params, "S", 1).map_err(|e| e.to_string())?;
        let rec = &trial.recording;
        let truth = trial.truth.left.ok_or("no ground-truth cycle")?;
        let frame = |t: f64| (t * fps).round() as usize;
        let times = rec.times();
        let (hs, to, ts) = (frame(truth.t_hs), frame(truth.t_to), frame(truth.t_ts));
        let events = GaitEvents {
            leg: Leg::Left,
            t_hs: times[hs],
            t_to: times[to],
            t_ts: times[ts],
            hs_frame: hs,
            to_frame: to,
            ts_frame: ts,
        };
        let cycle = cycle_from_events(rec, events, &DetectionParams::default()).map_err(|e| e.to_string())?;
        let td = time_distance_indices(&cycle, height).map_err(|e| e.to_string())?;
        let h = height / 100.0;
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        for (name, got, want) in [
            ("v_n", td.v_n, stride / params.cycle_time / h),
            ("l_n", td.l_n, stride / h),
            ("s", td.s, params.stance_fraction),
        ] {
            if rel(got, want) > 1e-9 {
                return Err(format!("{name} = {got}, expected {want}"));
            }
        }
        let w = td.w.ok_or("no double support found")?;
        let hip = range_of_motion(&hip_angle_series(&cycle, Leg::Left).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let knee = range_of_motion(&knee_angle_series(&cycle, Leg::Left).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        for (name, got, want) in [
            ("w", w, params.step_width),
            ("alpha_h", hip, trial.truth.hip_rom),
            ("alpha_k", knee, trial.truth.knee_rom),
        ] {
            worst_rom = worst_rom.max(rel(got, want));
            if rel(got, want) > 0.005 {
                return Err(format!("{name} = {got}, expected {want} within 0.5%"));
            }
        }
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!(
        "{} cycles: v_n, l_n, s within 1e-9; w and ROM worst {:.3}%",
        cases.len(),
        worst_rom * 100.0
    ))
}

/// Textbook two-way ANOVA decomposition, written independently of the library.
fn icc_by_anova(table: &[Vec<f64>]) -> f64 {
    let n = table.len() as f64;
    let k = table[0].len() as f64;
    let all: Vec<f64> = table.iter().flatten().copied().collect();
    let grand = all.iter().sum::<f64>() / (n * k);
    let ss_total: f64 = all.iter().map(|x| (x - grand) * (x - grand)).sum();
    let ss_rows: f64 = table
        .iter()
        .map(|r| {
            let m = r.iter().sum::<f64>() / k;
            k * (m - grand) * (m - grand)
        })
        .sum();
    let ss_cols: f64 = (0..table[0].len())
        .map(|j| {
            let m = table.iter().map(|r| r[j]).sum::<f64>() / n;
            n * (m - grand) * (m - grand)
        })
        .sum();
    let ss_err = ss_total - ss_rows - ss_cols;
    let msr = ss_rows / (n - 1.0);
    let msc = ss_cols / (k - 1.0);
    let mse = ss_err / ((n - 1.0) * (k - 1.0));
    (msr - mse) / (msr + (k - 1.0) * mse + k * (msc - mse) / n)
}

fn icc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let n = rng.gen_range(3..=10);
        let k = rng.gen_range(2..=6);
        let table: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let subject = rng.gen_range(0.0..10.0);
                (0..k).map(|_| subject + rng.gen_range(-2.0..2.0)).collect()
            })
            .collect();
        let got = icc(&table).map_err(|e| format!("case {case}: {e}"))?.icc;
        let want = icc_by_anova(&table);
        worst = worst.max((got - want).abs());
        if (got - want).abs() > 1e-12 {
            return Err(format!("case {case}: {got} vs {want}"));
        }
    }
    for case in 0..50 {
        let n = rng.gen_range(3..=10);
        let k = rng.gen_range(2..=6);
        let table: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 + rng.gen_range(0.0..0.5); k]).collect();
        let r = icc(&table).map_err(|e| format!("constant rows {case}: {e}"))?;
        if r.icc != 1.0 {
            return Err(format!("constant rows {case}: ICC {}", r.icc));
        }
    }
    Ok(format!(
        "200 random tables, max |diff| {worst:.1e}; 50 zero-within tables give exactly 1"
    ))
}

#[allow(clippy::excessive_precision)]
const T_CDF_REFERENCE: [(f64, f64, f64); 20] = [
    (-3.5, 1.0, 0.088585532782904748876),
    (-2.0, 1.0, 0.14758361765043327418),
    (0.5, 1.0, 0.64758361765043327418),
    (1.0, 2.0, 0.78867513459481288225),
    (-1.5, 2.0, 0.13619656244550053972),
    (2.92, 2.0, 0.95000042221864639318),
    (0.3, 3.0, 0.60811835398004047885),
    (3.182, 3.0, 0.97499143172834311744),
    (-0.741, 4.0, 0.24991763405393911494),
    (2.776, 4.0, 0.97498861084001179389),
    (1.833, 9.0, 0.9499910299747084906),
    (-2.262, 9.0, 0.025006422751227314752),
    (0.0, 10.0, 0.5),
    (1.5, 12.0, 0.9202712482433964968),
    (-4.0, 15.0, 0.00057965842488055780905),
    (2.5, 20.0, 0.98938322728043380155),
    (0.75, 29.0, 0.77035172514587374663),
    (-1.96, 30.0, 0.029671156448025238157),
    (2.0, 60.0, 0.97498347817427127559),
    (1.2, 120.0, 0.88374845311659112259),
];

fn distribution_kernels() -> Outcome {
    let mut worst_t: f64 = 0.0;
    for (t, df, want) in T_CDF_REFERENCE {
        let got = t_cdf(t, df).map_err(|e| e.to_string())?;
        worst_t = worst_t.max((got - want).abs());
        if (got - want).abs() > 1e-8 {
            return Err(format!("t_cdf({t}, {df}) = {got}, reference {want}"));
        }
    }
    let mut worst_f: f64 = 0.0;
    for (d1, d2) in [
        (1.0, 1.0),
        (2.0, 5.0),
        (4.0, 36.0),
        (9.0, 9.0),
        (9.0, 36.0),
        (3.0, 120.0),
        (30.0, 4.0),
    ] {
        for p in [0.01, 0.025, 0.1, 0.5, 0.9, 0.975, 0.99] {
            let x = f_quantile(p, d1, d2).map_err(|e| e.to_string())?;
            let back = f_cdf(x, d1, d2).map_err(|e| e.to_string())?;
            worst_f = worst_f.max((back - p).abs());
            if (back - p).abs() > 1e-9 {
                return Err(format!("f_cdf(f_quantile({p}, {d1}, {d2})) = {back}"));
            }
        }
    }
    Ok(format!(
        "t_cdf max error {worst_t:.1e} at 20 points; F round trip max error {worst_f:.1e} at 49 points"
    ))
}

fn tiny_cohort(rng: &mut ChaCha8Rng, prefix: &str, subjects: usize, trials: u32) -> Vec<TrialSeries> {
    let mut out = Vec::new();
    for s in 1..=subjects {
        for t in 1..=trials {
            out.push(TrialSeries {
                subject_id: format!("{prefix}{s}"),
                trial_no: t,
                left: random_seq(rng, 6),
                right: random_seq(rng, 6),
            });
        }
    }
    out
}

/// Straightforward nested-loop aggregation using the exhaustive distance.
fn exhaustive_mean(own: &[&TrialSeries], others: &[&TrialSeries]) -> f64 {
    let leg_mean = |leg: Leg| {
        let mut sum = 0.0;
        let mut count = 0;
        for a in own {
            for b in others {
                sum += brute_force_dtw(a.leg(leg), b.leg(leg)).unwrap();
                count += 1;
            }
        }
        sum / count as f64
    };
    (leg_mean(Leg::Left) + leg_mean(Leg::Right)) / 2.0
}

fn sorted(mut v: Vec<&TrialSeries>) -> Vec<&TrialSeries> {
    v.sort_by(|a, b| (&a.subject_id, a.trial_no).cmp(&(&b.subject_id, b.trial_no)));
    v
}

fn aggregation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let patient = tiny_cohort(&mut rng, "P", 1, 5);
    let controls = tiny_cohort(&mut rng, "C", 10, 5);
    let calls = AtomicUsize::new(0);
    let counted = |a: &[f64], b: &[f64]| {
        calls.fetch_add(1, Ordering::Relaxed);
        brute_force_dtw(a, b).unwrap()
    };

    let got = mean_dtw_patient_with(&patient, &controls, counted).map_err(|e| e.to_string())?;
    let want = exhaustive_mean(&sorted(patient.iter().collect()), &sorted(controls.iter().collect()));
    if got.value.to_bits() != want.to_bits() {
        return Err(format!("patient mean {} vs exhaustive {want}", got.value));
    }
    let patient_calls = calls.swap(0, Ordering::Relaxed);
    if patient_calls != 500 || got.evaluations != 500 {
        return Err(format!(
            "patient aggregation used {patient_calls} evaluations (reported {}), expected 500",
            got.evaluations
        ));
    }

    let got = mean_dtw_control_with("C3", &controls, counted).map_err(|e| e.to_string())?;
    let own = sorted(controls.iter().filter(|t| t.subject_id == "C3").collect());
    let others = sorted(controls.iter().filter(|t| t.subject_id != "C3").collect());
    let want = exhaustive_mean(&own, &others);
    if got.value.to_bits() != want.to_bits() {
        return Err(format!("control mean {} vs exhaustive {want}", got.value));
    }
    let control_calls = calls.load(Ordering::Relaxed);
    if control_calls != 2 * 5 * 9 * 5 {
        return Err(format!("control aggregation used {control_calls} evaluations, expected 450"));
    }
    Ok(format!(
        "patient and control means bit-identical; {patient_calls} and {control_calls} evaluations"
    ))
}

fn dir_contents(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn pipeline_cohort(noise_sd: f64, dir: &Path) -> Result<std::path::PathBuf, String> {
    let cohort = synthesize_cohort(&CohortSynthParams {
        noise_sd,
        ..CohortSynthParams::default()
    })
    .map_err(|e| e.to_string())?;
    write_cohort(&cohort.dataset, dir).map_err(|e| e.to_string())
}

fn determinism_and_speed() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = pipeline_cohort(0.0, &tmp.path().join("cohort"))?;
    let mut outputs = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in ["run1", "run2"] {
        let start = Instant::now();
        let report = run_pipeline(&PipelineConfig::new(&manifest, tmp.path().join(run))).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if report.exit_code() != 0 {
            return Err(format!("pipeline reported errors: {:?}", report.analysis.errors));
        }
        outputs.push(dir_contents(&tmp.path().join(run)));
    }
    within(slowest, 10.0)?;
    if outputs[0] != outputs[1] {
        let differing: Vec<&String> = outputs[0].keys().filter(|k| outputs[0].get(*k) != outputs[1].get(*k)).collect();
        return Err(format!("outputs differ: {differing:?}"));
    }
    Ok(format!(
        "10+10 subjects x 5 trials in {:.2} s per run; {} files byte-identical",
        slowest.as_secs_f64(),
        outputs[0].len()
    ))
}

fn direction_of_effect() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = pipeline_cohort(0.005, &tmp.path().join("cohort"))?;
    let report = run_pipeline(&PipelineConfig::new(&manifest, tmp.path().join("out"))).map_err(|e| e.to_string())?;
    let stats = &report.stats;
    let value = |stat, index| stats.get(index).value(stat).map_err(|e| format!("{index:?} {stat:?}: {e}"));
    for index in [IndexKind::NormalizedVelocity, IndexKind::NormalizedStrideLength] {
        if value(StatKind::MsMean, index)? >= value(StatKind::ControlMean, index)? {
            return Err(format!("patient {} not below controls", index.key()));
        }
    }
    for index in [IndexKind::StanceFraction, IndexKind::KneeMeanDtw, IndexKind::HipMeanDtw] {
        if value(StatKind::MsMean, index)? <= value(StatKind::ControlMean, index)? {
            return Err(format!("patient {} not above controls", index.key()));
        }
    }
    let mut worst_p: f64 = 0.0;
    for index in IndexKind::ALL {
        let p = value(StatKind::TPValue, index)?;
        worst_p = worst_p.max(p);
        if p > 0.05 {
            return Err(format!("t-test p = {p} for {}", index.key()));
        }
    }
    Ok(format!(
        "v_n, l_n lower; s, d_k, d_h higher; largest p = {worst_p:.2e} over eight indices"
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("DTW equals exhaustive search", dtw_matches_exhaustive),
        ("DTW property suite", dtw_properties),
        ("Fisher interval for r = -0.69, n = 50", fisher_interval_anchor),
        ("group summary of the reference cohort", group_summary_anchor),
        ("segmentation accuracy under 5 mm noise", segmentation_accuracy),
        ("closed-form indices on clean cycles", index_closed_form),
        ("ICC against ANOVA decomposition", icc_oracle),
        ("t and F distribution kernels", distribution_kernels),
        ("mean DTW aggregation and evaluation count", aggregation_oracle),
        ("pipeline determinism and runtime", determinism_and_speed),
        ("patient vs control direction of effect", direction_of_effect),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
