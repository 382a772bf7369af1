//! C ABI over gait-core.
//!
//! Every function returns a [`GaitStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and read with
//! [`gait_last_error_message`]. Trials and DTW results are opaque handles
//! owned by the caller and released with their `_free` function. Panics never
//! cross the boundary: they are caught and reported as `GAIT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gait_core::dtw::{self, DtwError};
use gait_core::gait_cycle::{ankle_speed, detect_gait_events, GaitError};
use gait_core::kinematics::{analyze_trial, AnalysisOptions};
use gait_core::skeletal_io::{interpolate_gaps, parse_trial, RecordingError};
use gait_core::stats::{self, StatsError};
use gait_core::{DetectionParams, Leg, TrialRecording};

/// Outcome of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument is out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// The recording could not be parsed or repaired.
    Recording = 3,
    /// No gait cycle could be segmented.
    Segmentation = 4,
    /// Index computation failed.
    Kinematics = 5,
    /// DTW input was rejected.
    Dtw = 6,
    /// A statistic is undefined for the input.
    Stats = 7,
    /// The library panicked; the message holds the payload.
    Panic = 99,
}

/// Body side.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaitLeg {
    Left = 0,
    Right = 1,
}

impl From<GaitLeg> for Leg {
    fn from(leg: GaitLeg) -> Self {
        match leg {
            GaitLeg::Left => Leg::Left,
            GaitLeg::Right => Leg::Right,
        }
    }
}

/// Parsed skeletal recording of one trial.
pub struct GaitTrial(TrialRecording);

/// DTW distance with its warping path.
pub struct GaitDtwResult(dtw::DtwResult);

/// Gait events of one leg, in seconds and frame indices.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaitEvents {
    pub t_hs: f64,
    pub t_to: f64,
    pub t_ts: f64,
    pub hs_frame: usize,
    pub to_frame: usize,
    pub ts_frame: usize,
}

/// Per-trial indices. `w` is NaN when the cycle has no double support.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaitIndices {
    pub v_n: f64,
    pub l_n: f64,
    pub s: f64,
    pub w: f64,
    pub rom_hip: f64,
    pub rom_knee: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaitCorrelation {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaitTTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub n: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GaitIcc {
    pub icc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(GaitStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(GaitStatus::InvalidArgument, msg.into())
    }

    fn null(name: &str) -> Self {
        Failure(GaitStatus::NullPointer, format!("`{name}` is null"))
    }
}

macro_rules! failure_from {
    ($err:ty, $status:expr) => {
        impl From<$err> for Failure {
            fn from(e: $err) -> Self {
                Failure($status, e.to_string())
            }
        }
    };
}

failure_from!(RecordingError, GaitStatus::Recording);
failure_from!(GaitError, GaitStatus::Segmentation);
failure_from!(gait_core::kinematics::IndexFailure, GaitStatus::Kinematics);
failure_from!(DtwError, GaitStatus::Dtw);
failure_from!(StatsError, GaitStatus::Stats);

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GaitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            GaitStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            GaitStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(name))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn trial_arg<'a>(p: *const GaitTrial) -> Result<&'a TrialRecording, Failure> {
    p.as_ref().map(|t| &t.0).ok_or_else(|| Failure::null("trial"))
}

fn detection(threshold: f64) -> Result<DetectionParams, Failure> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Failure::invalid(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    Ok(DetectionParams::with_threshold(threshold))
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn gait_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a trial CSV (`t` column then `<joint>_x,_y,_z` triples).
///
/// # Safety
/// `csv` and `subject_id` must be null or NUL-terminated strings; `out` must
/// be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_parse_csv(
    csv: *const c_char,
    subject_id: *const c_char,
    trial_no: u32,
    out_trial: *mut *mut GaitTrial,
) -> GaitStatus {
    guard(|| {
        let slot = out(out_trial, "out_trial")?;
        *slot = ptr::null_mut();
        let text = str_arg(csv, "csv")?;
        let id = str_arg(subject_id, "subject_id")?;
        let rec = parse_trial(text, id, trial_no)?;
        *slot = Box::into_raw(Box::new(GaitTrial(rec)));
        Ok(())
    })
}

/// Releases a trial. Null is ignored.
///
/// # Safety
/// `trial` must be null or a handle from [`gait_trial_parse_csv`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_free(trial: *mut GaitTrial) {
    if !trial.is_null() {
        drop(Box::from_raw(trial));
    }
}

/// # Safety
/// `trial` must be null or a live handle; `out_count` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_frame_count(trial: *const GaitTrial, out_count: *mut usize) -> GaitStatus {
    guard(|| {
        *out(out_count, "out_count")? = trial_arg(trial)?.len();
        Ok(())
    })
}

/// Fills untracked runs of at most `max_gap` frames in place. The trial is
/// left untouched on failure.
///
/// # Safety
/// `trial` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_interpolate_gaps(trial: *mut GaitTrial, max_gap: usize) -> GaitStatus {
    guard(|| {
        let t = trial.as_mut().ok_or_else(|| Failure::null("trial"))?;
        t.0 = interpolate_gaps(&t.0, max_gap)?;
        Ok(())
    })
}

/// Segments one gait cycle of `leg` from smoothed ankle speed.
///
/// # Safety
/// `trial` must be null or a live handle; `out_events` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_detect_events(
    trial: *const GaitTrial,
    leg: GaitLeg,
    threshold: f64,
    out_events: *mut GaitEvents,
) -> GaitStatus {
    guard(|| {
        let slot = out(out_events, "out_events")?;
        let rec = trial_arg(trial)?;
        let params = detection(threshold)?;
        let speed = ankle_speed(rec, leg.into(), params.smoothing_window)?;
        let ev = detect_gait_events(&speed, &rec.times(), params.threshold, leg.into())?;
        *slot = GaitEvents {
            t_hs: ev.t_hs,
            t_to: ev.t_to,
            t_ts: ev.t_ts,
            hs_frame: ev.hs_frame,
            to_frame: ev.to_frame,
            ts_frame: ev.ts_frame,
        };
        Ok(())
    })
}

/// Time-distance indices from the left-leg cycle and ranges of motion
/// averaged over both legs.
///
/// # Safety
/// `trial` must be null or a live handle; `out_indices` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_trial_indices(
    trial: *const GaitTrial,
    height_cm: f64,
    threshold: f64,
    out_indices: *mut GaitIndices,
) -> GaitStatus {
    guard(|| {
        let slot = out(out_indices, "out_indices")?;
        let rec = trial_arg(trial)?;
        let opts = AnalysisOptions {
            detection: detection(threshold)?,
            ..AnalysisOptions::default()
        };
        let a = analyze_trial(rec, height_cm, &opts)?;
        let i = a.indices;
        *slot = GaitIndices {
            v_n: i.v_n,
            l_n: i.l_n,
            s: i.s,
            w: i.w.unwrap_or(f64::NAN),
            rom_hip: i.rom_hip,
            rom_knee: i.rom_knee,
        };
        Ok(())
    })
}

/// DTW distance between two series.
///
/// # Safety
/// `a` and `b` must point to `a_len` and `b_len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw_distance(a: *const f64, a_len: usize, b: *const f64, b_len: usize, out_distance: *mut f64) -> GaitStatus {
    guard(|| {
        let slot = out(out_distance, "out_distance")?;
        *slot = dtw::dtw_distance(slice_arg(a, a_len, "a")?, slice_arg(b, b_len, "b")?)?;
        Ok(())
    })
}

/// DTW distance plus warping path.
///
/// # Safety
/// As [`gait_dtw_distance`]; `out_result` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    out_result: *mut *mut GaitDtwResult,
) -> GaitStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        *slot = ptr::null_mut();
        let r = dtw::dtw(slice_arg(a, a_len, "a")?, slice_arg(b, b_len, "b")?)?;
        *slot = Box::into_raw(Box::new(GaitDtwResult(r)));
        Ok(())
    })
}

/// Distance of a DTW result, or NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw_result_distance(result: *const GaitDtwResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.distance)
}

/// Number of (i, j) pairs on the warping path, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw_result_path_len(result: *const GaitDtwResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.path.len())
}

/// Copies the warping path from the start corner into `rows` and `cols`,
/// which must each hold `capacity` entries; `capacity` must be at least the
/// path length.
///
/// # Safety
/// `result` must be null or a live handle; `rows` and `cols` must point to
/// `capacity` writable entries.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw_result_path(
    result: *const GaitDtwResult,
    rows: *mut usize,
    cols: *mut usize,
    capacity: usize,
) -> GaitStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| Failure::null("result"))?;
        let pairs = r.0.path.pairs();
        if capacity < pairs.len() {
            return Err(Failure::invalid(format!(
                "capacity {capacity} is below path length {}",
                pairs.len()
            )));
        }
        if pairs.is_empty() {
            return Ok(());
        }
        if rows.is_null() || cols.is_null() {
            return Err(Failure::null(if rows.is_null() { "rows" } else { "cols" }));
        }
        let rows = std::slice::from_raw_parts_mut(rows, pairs.len());
        let cols = std::slice::from_raw_parts_mut(cols, pairs.len());
        for (k, &(i, j)) in pairs.iter().enumerate() {
            rows[k] = i;
            cols[k] = j;
        }
        Ok(())
    })
}

/// Releases a DTW result. Null is ignored.
///
/// # Safety
/// `result` must be null or a handle from [`gait_dtw`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gait_dtw_result_free(result: *mut GaitDtwResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Pearson correlation with its 95% Fisher-z interval.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn gait_pearson_ci(x: *const f64, y: *const f64, n: usize, out_result: *mut GaitCorrelation) -> GaitStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let c = stats::pearson_ci(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        *slot = GaitCorrelation {
            r: c.r,
            ci_low: c.ci_low,
            ci_high: c.ci_high,
            n: c.n,
        };
        Ok(())
    })
}

/// Paired two-tailed t-test of `x` against `y`.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn gait_paired_t(x: *const f64, y: *const f64, n: usize, out_result: *mut GaitTTest) -> GaitStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let t = stats::paired_t(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?)?;
        *slot = GaitTTest {
            t: t.t,
            df: t.df,
            p: t.p,
            n: t.n,
        };
        Ok(())
    })
}

/// ICC(2,1) with its 95% interval over a row-major subjects x trials table.
///
/// # Safety
/// `table` must point to `n_subjects * n_trials` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn gait_icc(table: *const f64, n_subjects: usize, n_trials: usize, out_result: *mut GaitIcc) -> GaitStatus {
    guard(|| {
        let slot = out(out_result, "out_result")?;
        let len = n_subjects
            .checked_mul(n_trials)
            .ok_or_else(|| Failure::invalid("table size overflows"))?;
        let flat = slice_arg(table, len, "table")?;
        let rows: Vec<Vec<f64>> = if n_trials == 0 {
            Vec::new()
        } else {
            flat.chunks(n_trials).map(<[f64]>::to_vec).collect()
        };
        let r = stats::icc(&rows)?;
        *slot = GaitIcc {
            icc: r.icc,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
        };
        Ok(())
    })
}

/// Student t cumulative distribution.
///
/// # Safety
/// `out_p` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_t_cdf(t: f64, df: f64, out_p: *mut f64) -> GaitStatus {
    guard(|| {
        *out(out_p, "out_p")? = stats::t_cdf(t, df)?;
        Ok(())
    })
}

/// Quantile of the F distribution.
///
/// # Safety
/// `out_x` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn gait_f_quantile(p: f64, d1: f64, d2: f64, out_x: *mut f64) -> GaitStatus {
    guard(|| {
        *out(out_x, "out_x")? = stats::f_quantile(p, d1, d2)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panic_becomes_status_with_message() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, GaitStatus::Panic);
        let msg = unsafe { CStr::from_ptr(gait_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
        assert_eq!(guard(|| Ok(())), GaitStatus::Ok);
        assert!(gait_last_error_message().is_null());
    }

    #[test]
    fn interior_nul_in_message_is_replaced() {
        set_last_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(gait_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
