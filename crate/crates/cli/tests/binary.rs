use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn speclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speclab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn speclab")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn constants_command_writes_stamped_csv() {
    let tmp = TempDir::new().unwrap();
    let out = speclab(tmp.path(), &["--out", "out", "constants", "--n", "2", "--kappa1", "0", "--kappa2", "0", "--r-max", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("out/constants.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.contains("config_fingerprint") && header.contains("tool_version"), "{header}");
    assert!(csv.contains("\r\n"));
    assert!(tmp.path().join("out/constants.json").exists());
}

#[test]
fn fingerprint_ignores_output_directory() {
    let tmp = TempDir::new().unwrap();
    for dir in ["a", "b"] {
        let out = speclab(tmp.path(), &["--out", dir, "constants"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(tmp.path().join("a/constants.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/constants.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "[domain]\npreset = \"disk\"\nradious = 1.0\n");
    let out = speclab(tmp.path(), &["--config", &config, "geometry"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("speclab-out").exists());
}

#[test]
fn unknown_preset_and_flag_exit_with_usage_code() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "[domain]\npreset = \"torus\"\n");
    assert_eq!(speclab(tmp.path(), &["--config", &config, "geometry"]).status.code(), Some(2));
    assert_eq!(speclab(tmp.path(), &["geometry", "--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn injected_fault_fails_the_suite() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "[domain]\npreset = \"disk\"\n\n[check]\nlevels = [2]\n\n[fault_injection]\nproblem = \"buckling\"\nindex = 1\nfactor = 0.5\n",
    );
    let out = speclab(tmp.path(), &["--config", &config, "--out", "out", "check-inequalities"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(tmp.path().join("out/inequalities.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("2,field_buckling_lower[k=01],")).expect("row present");
    assert_eq!(row.split(',').nth(7), Some("fail"), "{row}");
}

#[test]
fn clean_suite_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let out = speclab(tmp.path(), &["--out", "out", "--levels", "2,3", "check-inequalities"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
