//! Artifact round trips, reproducibility, and manifest verification.

use std::fs;

use boundq::experiments::{manifest_for, run_table, verify_artifacts, Artifact, Manifest, RunConfig, TableId};

fn quick_config(dir: &std::path::Path) -> RunConfig {
    RunConfig { output_dir: dir.to_path_buf(), serial: true, ..RunConfig::default() }
}

#[test]
fn csv_round_trip() {
    let mut art = Artifact::new("demo", "abc123".into(), &["k", "v"]);
    art.push(vec!["a,b".into(), "1.000000".into()]).unwrap();
    art.push(vec!["c".into(), "".into()]).unwrap();
    assert!(art.push(vec!["short".into()]).is_err());
    let back = Artifact::parse(&art.to_csv_string().unwrap()).unwrap();
    assert_eq!(back, art);
}

#[test]
fn schema_mismatch_is_rejected() {
    assert!(Artifact::parse("# boundq artifact=x schema=99 config=0\na\n1\n").is_err());
    assert!(Artifact::parse("a,b\n1,2\n").is_err());
}

#[test]
fn tables_are_byte_identical_across_runs_and_thread_modes() {
    let cfg = quick_config(std::path::Path::new("unused"));
    let parallel = RunConfig { serial: false, ..cfg.clone() };
    for id in [TableId::ProbeFamilyComparison, TableId::PartitionAgreement] {
        let a = run_table(id, &cfg).unwrap().to_csv_string().unwrap();
        let b = run_table(id, &cfg).unwrap().to_csv_string().unwrap();
        let c = run_table(id, &parallel).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b, "{id}");
        assert_eq!(a, c, "{id}");
    }
}

#[test]
fn config_hash_tracks_seed() {
    let cfg = quick_config(std::path::Path::new("unused"));
    let other = RunConfig { seed: cfg.seed + 1, ..cfg.clone() };
    let a = run_table(TableId::PartitionAgreement, &cfg).unwrap();
    let b = run_table(TableId::PartitionAgreement, &other).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
}

#[test]
fn empty_eps_list_yields_header_only() {
    let cfg = RunConfig { eps: Some(vec![]), ..quick_config(std::path::Path::new("unused")) };
    let art = run_table(TableId::MediumScale, &cfg).unwrap();
    assert!(art.rows.is_empty());
    let text = art.to_csv_string().unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("benchmark,"));
}

#[test]
fn verifier_detects_tampering_and_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let art = run_table(TableId::ProbeFamilyComparison, &cfg).unwrap();
    art.write(dir.path()).unwrap();
    let manifest = manifest_for(&[(TableId::ProbeFamilyComparison, &art)], 1e-6).unwrap();
    assert!(!manifest.checks.is_empty());
    let report = verify_artifacts(dir.path(), &manifest);
    assert!(report.passed());

    let manifest = Manifest::from_json(&manifest.to_json().unwrap()).unwrap();
    let path = dir.path().join("probe_family_comparison.csv");
    let text = fs::read_to_string(&path).unwrap();
    let target = &manifest.checks[0];
    let mut tampered = Artifact::parse(&text).unwrap();
    let row = tampered.find(&target.key).unwrap()[0];
    let col = tampered.column(&target.column).unwrap();
    tampered.rows[row][col] = "12345".into();
    fs::write(&path, tampered.to_csv_string().unwrap()).unwrap();
    let report = verify_artifacts(dir.path(), &manifest);
    assert!(!report.passed());
    assert!(report.failures().any(|f| f.check == *target && f.actual.as_deref() == Some("12345")));

    fs::remove_file(&path).unwrap();
    let report = verify_artifacts(dir.path(), &manifest);
    assert_eq!(report.failures().count(), manifest.checks.len());
    assert!(report.failures().all(|f| f.message.contains("missing")));
}

#[test]
fn verifier_reports_schema_drift() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let art = run_table(TableId::LatentPlanning, &cfg).unwrap();
    let manifest = manifest_for(&[(TableId::LatentPlanning, &art)], 1e-6).unwrap();
    let mut drifted = art.clone();
    drifted.columns = drifted.columns.iter().map(|c| format!("{c}_v2")).collect();
    drifted.write(dir.path()).unwrap();
    let report = verify_artifacts(dir.path(), &manifest);
    assert!(report.failures().all(|f| f.message.contains("schema drift")));
    assert!(!report.passed());
}
