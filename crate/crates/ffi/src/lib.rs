//! C ABI for the directed-wave diagnostics pipeline.
//!
//! Conventions:
//!
//! * Every fallible call returns a [`WsStatus`]; out-parameters are written
//!   only when the call returns `WS_STATUS_OK`. The nonzero status values
//!   match the CLI exit codes for the same failure classes.
//! * [`ws_last_error_message`] returns a thread-local, NUL-terminated
//!   message describing the most recent failure on the calling thread. The
//!   pointer stays valid until the next failing call on that thread.
//! * `WsScenario` and `WsDiagnosis` are opaque; release them with their
//!   `_free` functions. Passing null where a pointer is expected yields
//!   `WS_STATUS_INVALID_CALL` rather than undefined behaviour; passing a
//!   dangling or foreign pointer is the caller's responsibility.
//! * Strings returned through `char **` out-parameters are owned by the
//!   caller and must be released with [`ws_string_free`].
//!
//! Panics never unwind across the boundary: they are caught and reported
//! as `WS_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use wavesplit::cli::{
    parse_config, run_calibration, run_diagnosis, CalibrationFile, ScenarioConfig,
};
use wavesplit::diagnose::DiagnosticsReport;
use wavesplit::projectors::Mode;
use wavesplit::{Category, Error};

/// Status code of an FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    /// Success.
    Ok = 0,
    /// Null pointer, invalid UTF-8, or an out-of-range argument.
    InvalidCall = 1,
    /// The scenario configuration is invalid.
    Config = 2,
    /// A runtime precondition was violated (wrap-around guard, calibration
    /// mismatch, undetected mode, ...).
    Precondition = 3,
    /// A file could not be read or written.
    Io = 4,
    /// Internal error (caught panic).
    Internal = 5,
}

/// Wave-mode selector for queries against a diagnosis.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsMode {
    /// Right-moving directed mode.
    Right = 0,
    /// Left-moving directed mode.
    Left = 1,
    /// Non-propagating entropy mode (acoustic system only).
    Entropy = 2,
}

/// A parsed and validated scenario configuration.
pub struct WsScenario {
    cfg: ScenarioConfig,
}

/// The result of running the inverse pipeline on a scenario.
pub struct WsDiagnosis {
    report: DiagnosticsReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized: String = message.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL-free error message");
    });
}

fn invalid(message: &str) -> WsStatus {
    set_error(message);
    WsStatus::InvalidCall
}

fn fail(err: &Error) -> WsStatus {
    set_error(&err.to_string());
    match err.category() {
        Category::Config => WsStatus::Config,
        Category::Precondition => WsStatus::Precondition,
        Category::Io => WsStatus::Io,
    }
}

fn guarded(f: impl FnOnce() -> WsStatus) -> WsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal error: panic caught at the FFI boundary");
            WsStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, WsStatus> {
    if ptr.is_null() {
        return Err(invalid(&format!("{name} must not be null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(&format!("{name} must be valid UTF-8")))
}

fn mode_arg(mode: i32) -> Result<Mode, WsStatus> {
    match mode {
        0 => Ok(Mode::Right),
        1 => Ok(Mode::Left),
        2 => Ok(Mode::Entropy),
        other => Err(invalid(&format!(
            "mode must be 0 (right), 1 (left), or 2 (entropy), got {other}"
        ))),
    }
}

/// # Safety
/// `ptr` must be null or a pointer previously returned by this library.
unsafe fn scenario_arg<'a>(ptr: *const WsScenario) -> Result<&'a WsScenario, WsStatus> {
    ptr.as_ref()
        .ok_or_else(|| invalid("scenario must not be null"))
}

/// # Safety
/// `ptr` must be null or a pointer previously returned by this library.
unsafe fn diagnosis_arg<'a>(ptr: *const WsDiagnosis) -> Result<&'a WsDiagnosis, WsStatus> {
    ptr.as_ref()
        .ok_or_else(|| invalid("diagnosis must not be null"))
}

fn out_arg<T>(ptr: *mut T, name: &str) -> Result<(), WsStatus> {
    if ptr.is_null() {
        Err(invalid(&format!("{name} must not be null")))
    } else {
        Ok(())
    }
}

macro_rules! try_ffi {
    ($expr:expr) => {
        match $expr {
            Ok(value) => value,
            Err(status) => return status,
        }
    };
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ws_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread (empty if none).
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ws_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses and validates a scenario from TOML text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_parse(
    text: *const c_char,
    out: *mut *mut WsScenario,
) -> WsStatus {
    guarded(|| {
        let text = try_ffi!(utf8_arg(text, "text"));
        try_ffi!(out_arg(out, "out"));
        match parse_config(text) {
            Ok(cfg) => {
                out.write(Box::into_raw(Box::new(WsScenario { cfg })));
                WsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Loads and validates a scenario from a TOML file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_load(
    path: *const c_char,
    out: *mut *mut WsScenario,
) -> WsStatus {
    guarded(|| {
        let path = try_ffi!(utf8_arg(path, "path"));
        try_ffi!(out_arg(out, "out"));
        match wavesplit::cli::load_config(std::path::Path::new(path)) {
            Ok(cfg) => {
                out.write(Box::into_raw(Box::new(WsScenario { cfg })));
                WsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a scenario handle (null is ignored).
///
/// # Safety
/// `scenario` must be null or a pointer obtained from `ws_scenario_parse`
/// or `ws_scenario_load`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_free(scenario: *mut WsScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Calibrates the detection baseline δ for the scenario (which must contain
/// only right-moving pulses) and writes it to `out_delta`.
///
/// # Safety
/// `scenario` must be a live scenario handle; `out_delta` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_calibrate(
    scenario: *const WsScenario,
    trials: u32,
    out_delta: *mut f64,
) -> WsStatus {
    guarded(|| {
        let scenario = try_ffi!(scenario_arg(scenario));
        try_ffi!(out_arg(out_delta, "out_delta"));
        match run_calibration(&scenario.cfg, trials as usize) {
            Ok(file) => {
                out_delta.write(file.delta);
                WsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs the inverse pipeline (simulate → observe → detect → reconstruct →
/// localize) with the given calibrated baseline `delta` (use the value from
/// `ws_scenario_calibrate`, or 0.0 for noiseless exact sampling).
///
/// # Safety
/// `scenario` must be a live scenario handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_scenario_diagnose(
    scenario: *const WsScenario,
    delta: f64,
    out: *mut *mut WsDiagnosis,
) -> WsStatus {
    guarded(|| {
        let scenario = try_ffi!(scenario_arg(scenario));
        try_ffi!(out_arg(out, "out"));
        if !delta.is_finite() || delta < 0.0 {
            return invalid(&format!("delta must be finite and >= 0, got {delta}"));
        }
        let cfg = &scenario.cfg;
        let calibration = CalibrationFile {
            delta,
            trials: 0,
            sigma: cfg.observation.noise_sigma,
            stencil: cfg.stencil(),
        };
        match run_diagnosis(cfg, &calibration) {
            Ok(diagnosis) => {
                out.write(Box::into_raw(Box::new(WsDiagnosis {
                    report: diagnosis.report,
                })));
                WsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a diagnosis handle (null is ignored).
///
/// # Safety
/// `diagnosis` must be null or a pointer obtained from
/// `ws_scenario_diagnose`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_free(diagnosis: *mut WsDiagnosis) {
    if !diagnosis.is_null() {
        drop(Box::from_raw(diagnosis));
    }
}

/// Writes 1 to `out` if the given mode (0 right, 1 left, 2 entropy) was
/// detected, 0 otherwise.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_detected(
    diagnosis: *const WsDiagnosis,
    mode: i32,
    out: *mut bool,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        let mode = try_ffi!(mode_arg(mode));
        try_ffi!(out_arg(out, "out"));
        out.write(diagnosis.report.detected.contains(&mode));
        WsStatus::Ok
    })
}

/// Discrete norm of the whole measured series.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_norm_total(
    diagnosis: *const WsDiagnosis,
    out: *mut f64,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        try_ffi!(out_arg(out, "out"));
        out.write(diagnosis.report.norm_total);
        WsStatus::Ok
    })
}

/// Norm of the series content in the given directed mode's complement:
/// mode 1 (left) reports ‖φ − P₊φ‖ and mode 0 (right) reports ‖φ − P₋φ‖.
/// The entropy mode has no residual and is rejected.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_residual(
    diagnosis: *const WsDiagnosis,
    mode: i32,
    out: *mut f64,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        let mode = try_ffi!(mode_arg(mode));
        try_ffi!(out_arg(out, "out"));
        let value = match mode {
            Mode::Right => diagnosis.report.residual_right,
            Mode::Left => diagnosis.report.residual_left,
            Mode::Entropy => {
                return invalid("the entropy mode has no directed residual");
            }
        };
        out.write(value);
        WsStatus::Ok
    })
}

/// Estimated mode weights: writes α̂ (right) and β̂ (left).
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; both out-pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_weights(
    diagnosis: *const WsDiagnosis,
    out_alpha: *mut f64,
    out_beta: *mut f64,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        try_ffi!(out_arg(out_alpha, "out_alpha"));
        try_ffi!(out_arg(out_beta, "out_beta"));
        out_alpha.write(diagnosis.report.weights.alpha_hat);
        out_beta.write(diagnosis.report.weights.beta_hat);
        WsStatus::Ok
    })
}

/// Threshold-crossing arrival time of the dominant detected mode. Fails
/// with `WS_STATUS_PRECONDITION` when no directed mode was detected.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_arrival_time(
    diagnosis: *const WsDiagnosis,
    out: *mut f64,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        try_ffi!(out_arg(out, "out"));
        match diagnosis.report.arrival_time {
            Some(t) => {
                out.write(t);
                WsStatus::Ok
            }
            None => fail(&Error::precondition(
                "no directed mode was detected, so no arrival time was estimated",
            )),
        }
    })
}

/// Inferred source position of the dominant detected mode. Fails with
/// `WS_STATUS_PRECONDITION` when no directed mode was detected.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_source_position(
    diagnosis: *const WsDiagnosis,
    out: *mut f64,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        try_ffi!(out_arg(out, "out"));
        match diagnosis.report.source_position {
            Some(x) => {
                out.write(x);
                WsStatus::Ok
            }
            None => fail(&Error::precondition(
                "no directed mode was detected, so no source position was inferred",
            )),
        }
    })
}

/// Serializes the full diagnostics report as JSON. The returned string is
/// owned by the caller; release it with `ws_string_free`.
///
/// # Safety
/// `diagnosis` must be a live diagnosis handle; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ws_diagnosis_report_json(
    diagnosis: *const WsDiagnosis,
    out: *mut *mut c_char,
) -> WsStatus {
    guarded(|| {
        let diagnosis = try_ffi!(diagnosis_arg(diagnosis));
        try_ffi!(out_arg(out, "out"));
        match serde_json::to_string_pretty(&diagnosis.report) {
            Ok(json) => match CString::new(json) {
                Ok(cstring) => {
                    out.write(cstring.into_raw());
                    WsStatus::Ok
                }
                Err(_) => {
                    set_error("report JSON unexpectedly contained a NUL byte");
                    WsStatus::Internal
                }
            },
            Err(e) => {
                set_error(&format!("report serialization failed: {e}"));
                WsStatus::Internal
            }
        }
    })
}

/// Releases a string returned by this library (null is ignored).
///
/// # Safety
/// `string` must be null or a pointer obtained from
/// `ws_diagnosis_report_json`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ws_string_free(string: *mut c_char) {
    if !string.is_null() {
        drop(CString::from_raw(string));
    }
}
