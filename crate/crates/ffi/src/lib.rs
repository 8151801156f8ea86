//! C ABI over the solver: configs, initial data, runs and norms behind
//! opaque handles. Every entry point returns a [`PeStatus`]; the message of
//! the last failure on the calling thread is kept for `pe_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polar_euler::config::RunConfig;
use polar_euler::construction::assemble_initial;
use polar_euler::evolve::{Termination, TrajectoryRecord};
use polar_euler::expcli;
use polar_euler::sobolev::{self, SobolevSpec};
use polar_euler::{Error, PolarField};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Domain = 4,
    Aliasing = 5,
    Resolution = 6,
    Verification = 7,
    Contract = 8,
    Config = 9,
    Io = 10,
    Serde = 11,
    Panic = 12,
    OutOfRange = 13,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeTermination {
    Completed = 0,
    Resolution = 1,
    NonFinite = 2,
}

/// One monitor row; absent values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct PeMonitorRow {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub supp_osc_lo: f64,
    pub supp_osc_hi: f64,
    pub c1_osc: f64,
    /// Norm of the oscillatory part at the first monitored order.
    pub hs_first: f64,
    pub pseudo_err_l2: f64,
    pub pseudo_err_rel: f64,
}

pub struct PeConfig {
    inner: RunConfig,
}

pub struct PeField {
    inner: PolarField,
}

pub struct PeRun {
    record: TrajectoryRecord,
    summary_json: CString,
    final_field: PolarField,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PeStatus {
    match e {
        Error::Domain(_) => PeStatus::Domain,
        Error::InvalidArgument(_) => PeStatus::InvalidArgument,
        Error::Aliasing { .. } => PeStatus::Aliasing,
        Error::Resolution(_) => PeStatus::Resolution,
        Error::Verification(_) => PeStatus::Verification,
        Error::Contract(_) => PeStatus::Contract,
        Error::Config(_) => PeStatus::Config,
        Error::Io(_) => PeStatus::Io,
        Error::Serde(_) => PeStatus::Serde,
    }
}

struct Fail(PeStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PeStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside the solver".into());
            PeStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PeStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(PeStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(PeStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(PeStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated) and returns its full length, 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pe_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn pe_config_default(out: *mut *mut PeConfig) -> PeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(PeConfig { inner: RunConfig::default() }));
        Ok(())
    })
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn pe_config_from_toml(toml: *const c_char, out: *mut *mut PeConfig) -> PeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let text = str_arg(toml, "toml")?;
        *out = Box::into_raw(Box::new(PeConfig { inner: RunConfig::parse(text)? }));
        Ok(())
    })
}

/// Applies one `key.path=value` override.
///
/// # Safety
/// `cfg` must come from `pe_config_*`; `kv` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pe_config_set(cfg: *mut PeConfig, kv: *const c_char) -> PeStatus {
    guard(|| {
        let c = cfg.as_mut().ok_or_else(|| Fail(PeStatus::NullPointer, "cfg is null".into()))?;
        let kv = str_arg(kv, "kv")?;
        c.inner = RunConfig::parse_with(&c.inner.to_toml()?, &[kv.to_string()])?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from `pe_config_*`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pe_config_free(cfg: *mut PeConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Builds the initial data. `valid` receives the verification verdict; a
/// field is returned either way.
///
/// # Safety
/// Pointers must be valid; `out` receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn pe_build(cfg: *const PeConfig, out: *mut *mut PeField, valid: *mut bool) -> PeStatus {
    guard(|| {
        let c = handle(cfg, "cfg")?;
        out_ptr(out, "out")?;
        let init = assemble_initial(&c.inner.construction)?;
        if !valid.is_null() {
            *valid = init.report.valid;
        }
        *out = Box::into_raw(Box::new(PeField { inner: init.field }));
        Ok(())
    })
}

/// Reads a field from its JSON serialization.
///
/// # Safety
/// `json` must be NUL-terminated; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn pe_field_from_json(json: *const c_char, out: *mut *mut PeField) -> PeStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let text = str_arg(json, "json")?;
        *out = Box::into_raw(Box::new(PeField { inner: PolarField::from_json(text)? }));
        Ok(())
    })
}

/// Homogeneous (`homogeneous = true`) or inhomogeneous order-`s` norm.
///
/// # Safety
/// `field` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_field_sobolev_norm(field: *const PeField, s: f64, homogeneous: bool, out: *mut f64) -> PeStatus {
    guard(|| {
        let f = handle(field, "field")?;
        out_ptr(out, "out")?;
        let spec = if homogeneous { SobolevSpec::homogeneous(s) } else { SobolevSpec::inhomogeneous(s) };
        *out = sobolev::norm(&f.inner, &spec)?;
        Ok(())
    })
}

/// `L^p` norm, `p = INFINITY` allowed.
///
/// # Safety
/// `field` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_field_lp_norm(field: *const PeField, p: f64, out: *mut f64) -> PeStatus {
    guard(|| {
        let f = handle(field, "field")?;
        out_ptr(out, "out")?;
        *out = f.inner.lp_norm(p)?;
        Ok(())
    })
}

/// Angular symmetry order of the stored modes (1 when none is declared).
///
/// # Safety
/// `field` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn pe_field_base(field: *const PeField) -> usize {
    field.as_ref().map(|f| f.inner.base()).unwrap_or(0)
}

/// # Safety
/// `field` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pe_field_free(field: *mut PeField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Builds and evolves per the configuration. Runs stopped by the resolution
/// guard still return a handle; check `pe_run_termination`.
///
/// # Safety
/// `cfg` must come from `pe_config_*`; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn pe_evolve(cfg: *const PeConfig, out: *mut *mut PeRun) -> PeStatus {
    guard(|| {
        let c = handle(cfg, "cfg")?;
        out_ptr(out, "out")?;
        let run = expcli::evolve_run(&c.inner, None)?;
        let json = serde_json::to_string(&run.summary).map_err(|e| Fail(PeStatus::Serde, e.to_string()))?;
        let summary_json = CString::new(json).map_err(|e| Fail(PeStatus::Serde, e.to_string()))?;
        *out = Box::into_raw(Box::new(PeRun { record: run.record, summary_json, final_field: run.state.omega }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from `pe_evolve`.
#[no_mangle]
pub unsafe extern "C" fn pe_run_rows(run: *const PeRun) -> usize {
    run.as_ref().map(|r| r.record.rows.len()).unwrap_or(0)
}

/// # Safety
/// `run` must come from `pe_evolve`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_run_row(run: *const PeRun, i: usize, out: *mut PeMonitorRow) -> PeStatus {
    guard(|| {
        let r = handle(run, "run")?;
        out_ptr(out, "out")?;
        let row = r
            .record
            .rows
            .get(i)
            .ok_or_else(|| Fail(PeStatus::OutOfRange, format!("row {i} of {}", r.record.rows.len())))?;
        let nan = f64::NAN;
        *out = PeMonitorRow {
            t: row.t,
            l1: row.l1,
            l2: row.l2,
            linf: row.linf,
            supp_osc_lo: row.supp_osc.map_or(nan, |s| s.0),
            supp_osc_hi: row.supp_osc.map_or(nan, |s| s.1),
            c1_osc: row.c1_osc,
            hs_first: row.hs.first().copied().unwrap_or(nan),
            pseudo_err_l2: row.pseudo_err_l2.unwrap_or(nan),
            pseudo_err_rel: row.pseudo_err_rel.unwrap_or(nan),
        };
        Ok(())
    })
}

/// # Safety
/// `run` must come from `pe_evolve`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pe_run_termination(run: *const PeRun, out: *mut PeTermination) -> PeStatus {
    guard(|| {
        let r = handle(run, "run")?;
        out_ptr(out, "out")?;
        *out = match r.record.termination {
            Termination::Completed => PeTermination::Completed,
            Termination::Resolution => PeTermination::Resolution,
            Termination::NonFinite => PeTermination::NonFinite,
        };
        Ok(())
    })
}

/// JSON summary of the run, valid until `pe_run_free`.
///
/// # Safety
/// `run` must come from `pe_evolve`.
#[no_mangle]
pub unsafe extern "C" fn pe_run_summary_json(run: *const PeRun) -> *const c_char {
    run.as_ref().map_or(ptr::null(), |r| r.summary_json.as_ptr())
}

/// Copy of the final vorticity as a new field handle.
///
/// # Safety
/// `run` must come from `pe_evolve`; `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn pe_run_final_field(run: *const PeRun, out: *mut *mut PeField) -> PeStatus {
    guard(|| {
        let r = handle(run, "run")?;
        out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(PeField { inner: r.final_field.clone() }));
        Ok(())
    })
}

/// # Safety
/// `run` must be null or come from `pe_evolve`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pe_run_free(run: *mut PeRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
