//! Golden-file tests for the `pm25` command line.
//!
//! Each case runs the CLI into a scratch directory and compares exit code,
//! stdout, stderr and every written file with `tests/golden/<case>/`.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test cli_golden`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use pm25_core::cli::run_with;

const FIXTURE: &str = "tests/fixtures/countries.csv";

fn golden_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn collect(dir: &Path, prefix: &str, into: &mut BTreeMap<String, Vec<u8>>) {
    let mut entries: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let rel = if prefix.is_empty() {
            name
        } else {
            format!("{prefix}/{name}")
        };
        if path.is_dir() {
            collect(&path, &rel, into);
        } else {
            into.insert(rel, fs::read(&path).unwrap());
        }
    }
}

/// Runs `args` with `--out` appended and returns every artifact by name.
fn run_case(args: &[&str]) -> BTreeMap<String, Vec<u8>> {
    let scratch = tempfile::tempdir().unwrap();
    let out_dir = scratch.path().join("out");
    let mut argv: Vec<String> = vec!["pm25".into()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out_dir.display().to_string());
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = run_with(&argv, &mut stdout, &mut stderr);

    let mut files = BTreeMap::new();
    files.insert("exit_code".to_string(), format!("{code}\n").into_bytes());
    files.insert("stdout.txt".to_string(), stdout);
    files.insert("stderr.txt".to_string(), stderr);
    if out_dir.is_dir() {
        collect(&out_dir, "out", &mut files);
    }
    files
}

fn check_golden(case: &str, args: &[&str]) {
    let actual = run_case(args);
    let dir = golden_root().join(case);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let _ = fs::remove_dir_all(&dir);
        for (rel, bytes) in &actual {
            let path = dir.join(rel);
            fs::create_dir_all(path.parent().unwrap()).unwrap();
            fs::write(path, bytes).unwrap();
        }
        return;
    }
    assert!(
        dir.is_dir(),
        "missing golden directory {}; run with UPDATE_GOLDEN=1",
        dir.display()
    );
    let mut expected = BTreeMap::new();
    collect(&dir, "", &mut expected);
    let names = |m: &BTreeMap<String, Vec<u8>>| m.keys().cloned().collect::<Vec<_>>();
    assert_eq!(names(&actual), names(&expected), "{case}: file set differs");
    for (rel, bytes) in &expected {
        assert!(
            &actual[rel] == bytes,
            "{case}: {rel} differs from golden\n--- actual ---\n{}",
            String::from_utf8_lossy(&actual[rel])
        );
    }
}

#[test]
fn golden_cluster_fixture() {
    check_golden(
        "cluster_fixture",
        &["cluster", "--input", FIXTURE, "--k", "3", "--seed", "7"],
    );
}

#[test]
fn golden_forecast_embedded() {
    check_golden(
        "forecast_embedded",
        &["forecast", "--embedded", "--train-end", "2022", "--test-year", "2023"],
    );
}

#[test]
fn golden_forecast_fixture() {
    check_golden(
        "forecast_fixture",
        &[
            "forecast",
            "--input",
            FIXTURE,
            "--train-end",
            "2022",
            "--test-year",
            "2023",
        ],
    );
}

#[test]
fn golden_evaluate_fixture() {
    check_golden("evaluate_fixture", &["evaluate", "--input", FIXTURE]);
}

#[test]
fn golden_density_embedded() {
    check_golden(
        "correlate_density_embedded",
        &["correlate", "--embedded", "--study", "density"],
    );
}

#[test]
fn golden_trends_embedded_zero_fill() {
    check_golden(
        "trends_embedded_zero",
        &["trends", "--embedded", "--fill-policy", "zero", "--format", "json"],
    );
}

#[test]
fn golden_report_fixture() {
    check_golden("report_fixture", &["report", "--input", FIXTURE, "--seed", "0"]);
}

#[test]
fn golden_report_embedded() {
    check_golden(
        "report_embedded",
        &["report", "--embedded", "--seed", "0", "--format", "csv"],
    );
}

fn binary(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pm25"))
        .args(args)
        .arg("--out")
        .arg(out)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .unwrap()
}

#[test]
fn binary_exit_codes() {
    let scratch = tempfile::tempdir().unwrap();
    let out = scratch.path().join("out");
    assert_eq!(binary(&["trends", "--embedded"], &out).status.code(), Some(0));
    assert_eq!(
        binary(&["correlate", "--embedded", "--study", "deaths"], &out)
            .status
            .code(),
        Some(2)
    );
    let bad = binary(&["trends", "--embedded", "--bogus"], &out);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("Usage"));
    assert_eq!(
        binary(&["trends", "--input", "no/such/file.csv"], &out).status.code(),
        Some(1)
    );
    assert_eq!(
        binary(&["cluster", "--embedded", "--k", "0"], &out).status.code(),
        Some(1)
    );
}

#[test]
fn zero_fill_charts_never_plot_fabricated_zeros() {
    let scratch = tempfile::tempdir().unwrap();
    let run = |policy: &str| {
        let out = scratch.path().join(policy);
        let o = binary(&["trends", "--embedded", "--fill-policy", policy], &out);
        assert_eq!(o.status.code(), Some(0));
        let mut files = BTreeMap::new();
        collect(&out, "", &mut files);
        files
    };
    let zero = run("zero");
    let exclude = run("exclude");
    let svgs: Vec<&String> = zero.keys().filter(|k| k.ends_with(".svg")).collect();
    assert!(!svgs.is_empty());
    for name in svgs {
        assert_eq!(zero[name], exclude[name], "{name} changed under zero fill");
    }
    assert_ne!(zero["regional_trends.csv"], exclude["regional_trends.csv"]);
}

#[test]
fn manifest_lists_every_written_file() {
    let scratch = tempfile::tempdir().unwrap();
    let out = scratch.path().join("out");
    assert_eq!(binary(&["report", "--input", FIXTURE], &out).status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let mut on_disk = BTreeMap::new();
    collect(&out, "", &mut on_disk);
    on_disk.remove("manifest.json");
    let listed: Vec<&String> = manifest["files"].as_object().unwrap().keys().collect();
    assert_eq!(listed, on_disk.keys().collect::<Vec<_>>());
    assert_eq!(manifest["command"], "report");
    assert_eq!(manifest["toolkit"]["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["dataset"]["sha256"].as_str().unwrap().len(), 64);
}
