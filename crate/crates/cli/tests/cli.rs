//! End-to-end runs of the `boundq` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn boundq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundq"))
        .arg("--output-dir")
        .arg(dir)
        .args(args)
        .env_remove("BOUNDQ_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn quick_profile_verifies_against_bundled_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = boundq(dir.path(), &["--serial", "table"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = boundq(dir.path(), &["verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    // Tamper with one manifest-checked value: a class count of the operational family.
    let path = dir.path().join("probe_family_comparison.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let header: Vec<&str> = lines[1].split(',').collect();
    let col = header.iter().position(|c| *c == "op_classes").expect("op_classes column");
    let mut fields: Vec<String> = lines[2].split(',').map(str::to_string).collect();
    fields[col] = "999".into();
    lines[2] = fields.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = boundq(dir.path(), &["verify"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("999") || String::from_utf8_lossy(&out.stderr).contains("999"));

    fs::remove_file(&path).unwrap();
    let out = boundq(dir.path(), &["verify"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn serial_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        let out = boundq(dir, &["--serial", "table", "partition_agreement", "latent_planning"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["partition_agreement.csv", "latent_planning.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn unknown_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&boundq(dir.path(), &["table", "no_such_table"])), 2);
}

#[test]
fn oversized_clock_aware_family_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = boundq(dir.path(), &["partition", "--tier", "exact-clk", "-m", "2", "-T", "6"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("layered") || err.contains("subset"), "{err}");
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&boundq(dir.path(), &["partition", "--eps", "-0.5"])), 2);
    assert_eq!(code(&boundq(dir.path(), &["bench", "-b", "gridworld:0"])), 2);
    assert_eq!(code(&boundq(dir.path(), &["partition", "--metric", "l7"])), 2);
}

#[test]
fn single_benchmark_commands_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = boundq(dir.path(), &["partition", "-b", "tiger-listen", "--eps", "0,0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = boundq(dir.path(), &["quotient", "-b", "tiger-full", "-T", "3", "--eps", "0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = boundq(dir.path(), &["cache", "-b", "tiger-full", "-T", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = boundq(dir.path(), &["subset", "-b", "tiger-full", "-m", "2", "-T", "3", "-k", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().any(|n| n.starts_with("partition_eps")), "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("quotient_eps")), "{names:?}");
    assert!(names.iter().any(|n| n.ends_with(".cache.bin")), "{names:?}");
    assert!(names.iter().any(|n| n.starts_with("selection")), "{names:?}");
}
