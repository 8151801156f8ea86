use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polar-euler"));
    c.env_remove("POLAR_EULER_OUT").env("RUST_LOG", "off");
    c
}

fn run(args: &[&str], out: &Path) -> std::process::Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

const SHORT: &[&str] = &["--override", "evolve.t_end=0.1", "--override", "evolve.monitor_stride=3"];

#[test]
fn evolve_is_reproducible_byte_for_byte() {
    let d = tempfile::tempdir().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    for o in [&a, &b] {
        let mut args = vec!["evolve"];
        args.extend_from_slice(SHORT);
        let r = run(&args, o);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    for f in ["trajectory.csv", "config.toml", "field_final.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("schema_version,t,"));
    assert!(csv.lines().nth(1).unwrap().starts_with("polar-euler/1,0,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], "polar-euler/1");
}

#[test]
fn build_then_norms_reads_the_field_back() {
    let d = tempfile::tempdir().unwrap();
    let r = run(&["build"], d.path());
    assert_eq!(r.status.code(), Some(0));
    let field = d.path().join("field.json");
    let r = run(&["norms", field.to_str().unwrap()], &d.path().join("n"));
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(d.path().join("n/norms.json").exists());
}

#[test]
fn config_errors_exit_with_code_4() {
    let d = tempfile::tempdir().unwrap();
    let r = run(&["--override", "construction.lamda=3", "build"], d.path());
    assert_eq!(r.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&r.stderr).contains("lamda"));
    let r = run(&["--override", "evolve.cfl=-1", "evolve"], d.path());
    assert_eq!(r.status.code(), Some(4));
    let bad = d.path().join("bad.toml");
    std::fs::write(&bad, "[sweep]\nvalues = [4, 2]\n").unwrap();
    let r = run(&["--config", bad.to_str().unwrap(), "sweep"], d.path());
    assert_eq!(r.status.code(), Some(4));
}

#[test]
fn missing_field_file_is_an_error() {
    let d = tempfile::tempdir().unwrap();
    let r = run(&["norms", "/nonexistent/field.json"], d.path());
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let r = bin()
        .args(["decay", "--override", "decay.n_list=[4, 8]"])
        .env("POLAR_EULER_OUT", d.path())
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(d.path().join("decay.csv").exists());
}
