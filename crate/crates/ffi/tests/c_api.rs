use std::ffi::{CStr, CString};
use std::ptr;

use polar_euler_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { pe_last_error(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(pe_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn build_and_measure_default_data() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(pe_config_default(&mut cfg), PeStatus::Ok);
        let mut field = ptr::null_mut();
        let mut valid = false;
        assert_eq!(pe_build(cfg, &mut field, &mut valid), PeStatus::Ok);
        assert!(valid);
        assert_eq!(pe_field_base(field), 18);
        let mut h = 0.0;
        assert_eq!(pe_field_sobolev_norm(field, 0.5, false, &mut h), PeStatus::Ok);
        assert!(h > 0.0 && h <= 1.0, "{h}");
        let mut l2 = 0.0;
        assert_eq!(pe_field_lp_norm(field, 2.0, &mut l2), PeStatus::Ok);
        assert!(l2 > 0.0);
        assert_eq!(pe_field_sobolev_norm(field, 1.5, true, &mut h), PeStatus::InvalidArgument);
        assert!(last_error().contains("outside"));
        pe_field_free(field);
        pe_config_free(cfg);
    }
}

#[test]
fn config_errors_map_to_status_codes() {
    unsafe {
        let mut cfg = ptr::null_mut();
        let bad = CString::new("seeed = 1").unwrap();
        assert_eq!(pe_config_from_toml(bad.as_ptr(), &mut cfg), PeStatus::Config);
        assert!(cfg.is_null());
        assert!(last_error().contains("seeed"));
        assert_eq!(pe_config_from_toml(ptr::null(), &mut cfg), PeStatus::NullPointer);
        assert_eq!(pe_config_default(ptr::null_mut()), PeStatus::NullPointer);
        assert_eq!(pe_config_default(&mut cfg), PeStatus::Ok);
        assert_eq!(last_error(), "");
        let kv = CString::new("evolve.cfl=3.0").unwrap();
        assert_eq!(pe_config_set(cfg, kv.as_ptr()), PeStatus::Config);
        pe_config_free(cfg);
        pe_config_free(ptr::null_mut());
    }
}

#[test]
fn short_evolution_through_handles() {
    unsafe {
        let toml = CString::new("[evolve]\nt_end = 0.05\nmonitor_stride = 2\n").unwrap();
        let mut cfg = ptr::null_mut();
        assert_eq!(pe_config_from_toml(toml.as_ptr(), &mut cfg), PeStatus::Ok);
        let mut run = ptr::null_mut();
        assert_eq!(pe_evolve(cfg, &mut run), PeStatus::Ok);
        let n = pe_run_rows(run);
        assert!(n >= 2);
        let mut first = PeMonitorRow::default();
        let mut last = PeMonitorRow::default();
        assert_eq!(pe_run_row(run, 0, &mut first), PeStatus::Ok);
        assert_eq!(pe_run_row(run, n - 1, &mut last), PeStatus::Ok);
        assert_eq!(pe_run_row(run, n, &mut last), PeStatus::OutOfRange);
        assert!(last.t > first.t);
        assert!((last.l2 / first.l2 - 1.0).abs() < 1e-6);
        assert!(first.pseudo_err_l2 == 0.0);
        let mut term = PeTermination::NonFinite;
        assert_eq!(pe_run_termination(run, &mut term), PeStatus::Ok);
        assert_eq!(term, PeTermination::Completed);
        let json = CStr::from_ptr(pe_run_summary_json(run)).to_str().unwrap();
        assert!(json.contains("\"termination\":\"completed\""));
        let mut field = ptr::null_mut();
        assert_eq!(pe_run_final_field(run, &mut field), PeStatus::Ok);
        let mut l2 = 0.0;
        assert_eq!(pe_field_lp_norm(field, 2.0, &mut l2), PeStatus::Ok);
        assert!((l2 / last.l2 - 1.0).abs() < 1e-12);
        pe_field_free(field);
        pe_run_free(run);
        pe_config_free(cfg);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/polar_euler.h")).unwrap();
    for name in ["pe_config_default", "pe_build", "pe_evolve", "pe_run_row", "pe_last_error", "PE_STATUS_OK"] {
        assert!(h.contains(name), "missing {name}");
    }
    assert!(h.contains("typedef struct PeField PeField;"));
}
