use std::path::Path;
use std::process::{Command, Output};

fn cellhom(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellhom"))
        .args(args)
        .env("CELLHOM_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn homogenize_constant_field_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = cellhom(
        &["homogenize", "--field", "constant:2", "--method", "elliptic", "--R", "2.5", "--h", "0.25", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("method      elliptic"));
    let err: f64 = text.lines().find(|l| l.starts_with("error")).unwrap()[5..].trim().parse().unwrap();
    assert!(err < 1e-10);
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json.trim_start().starts_with('['));
    assert!(json.contains("\"elliptic\""));
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# laminate\nfield = checkerboard:1:4\ndim = 1\nmethod = parabolic\nR = 3.4\nh = 0.1\n").unwrap();
    let o = cellhom(&["homogenize", "--config", cfg.to_str().unwrap(), "--method", "elliptic"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("method      elliptic"));
    assert!(text.contains("R, L, T, N  3.4, 3.4, inf, 0"));
}

#[test]
fn deterministic_sweep_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--field", "paper-2d", "--method", "elliptic", "--h", "0.25", "--r-values", "2.3,3.1,4.2,5.4", "--deterministic",
    ];
    let a = cellhom(&args, dir.path());
    let b = cellhom(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = stdout(&a);
    assert_eq!(text, stdout(&b));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("R,L,T,N,q,method"));
    assert!(String::from_utf8_lossy(&a.stderr).contains("slope"));
}

#[test]
fn strict_sweep_reports_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "sweep", "--field", "paper-2d", "--method", "modified-elliptic", "--h", "0.25", "--N", "60", "--r-values", "1.2,2.3,3.1,4.2",
        "--deterministic",
    ];
    let lenient = cellhom(&base, dir.path());
    assert!(lenient.status.success(), "{}", String::from_utf8_lossy(&lenient.stderr));
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("R = 1.2"));
    let mut strict = base.to_vec();
    strict.push("--strict");
    assert_eq!(cellhom(&strict, dir.path()).status.code(), Some(2));
}

#[test]
fn invalid_input_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellhom(&["homogenize", "--method", "wave"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown method"));
    let o = cellhom(&["sweep", "--r-values", "2,3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reference_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellhom(&["reference", "--field", "paper-2d", "--h", "0.03125"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let numbers: Vec<f64> = text.split([',', '[', ']']).filter_map(|s| s.trim().parse().ok()).collect();
    assert_eq!(numbers.len(), 4);
    assert!((numbers[0] - 0.2).abs() < 5e-3 && (numbers[3] - 20.0 / 41.0).abs() < 5e-3);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 1);
    let again = cellhom(&["reference", "--field", "paper-2d", "--h", "0.03125"], dir.path());
    assert_eq!(stdout(&again), text);
}
