//! The `inquest` binary: exit codes, outputs and environment defaults.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn inquest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inquest"))
        .args(args)
        .env_remove("INQUEST_STORE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn rules_file(dir: &Path, catalog: &str) -> PathBuf {
    let path = dir.join(format!("{catalog}.rules.json"));
    let o = inquest(&["generate-rules", "--catalog", catalog, "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn generate_rules_reports_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = inquest(&[
        "generate-rules",
        "--catalog",
        "table1.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "118 rules\n");
    let o = inquest(&[
        "generate-rules",
        "--catalog",
        "builtin:casestudy2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "40 rules\n");
}

#[test]
fn catalog_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let catalog = Path::new(env!("CARGO_MANIFEST_DIR")).join("catalogs/table1.json");
    let out = dir.path().join("r.json");
    let o = inquest(&[
        "generate-rules",
        "--catalog",
        catalog.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "118 rules\n");
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = inquest(&["ingest", "--frobnicate", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert!(o.stdout.is_empty());
}

#[test]
fn ingest_summarizes_and_rejects_invalid() {
    let o = inquest(&["ingest", &fixture("casestudy1")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("run 1: 4 units, 67 inspection defects, 7 test defects"));

    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixture("casestudy1")).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    let path = dir.path().join("run_1.inspection.csv");
    let text = std::fs::read_to_string(&path)
        .unwrap()
        .replace("I,class,0,26,0,0,1", "I,class,0,26,0,0,0");
    std::fs::write(&path, text).unwrap();
    let o = inquest(&["ingest", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coverage"));

    let o = inquest(&["ingest", "/nonexistent/dataset"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evaluate_counts_sum_to_rule_total() {
    let dir = tempfile::tempdir().unwrap();
    let rules = rules_file(dir.path(), "table1");
    let o = inquest(&[
        "evaluate",
        "--dataset",
        &fixture("casestudy1"),
        "--rules",
        rules.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("rule_id,run_id,category,effective,effectiveness,effort_fraction")
    );
    for run in ["1", "2"] {
        let n = csv.lines().skip(1).filter(|l| l.split(',').nth(1) == Some(run)).count();
        assert_eq!(n, 118);
    }
    let summary = String::from_utf8_lossy(&o.stderr).into_owned();
    for line in summary.lines().skip(1) {
        let cols: Vec<usize> = line.split('\t').skip(1).map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[..4].iter().sum::<usize>(), 118);
        assert_eq!(cols[4], 118);
    }
}

#[test]
fn prioritize_lists_ranked_units() {
    let dir = tempfile::tempdir().unwrap();
    let rules = rules_file(dir.path(), "casestudy2");
    let o = inquest(&[
        "prioritize",
        "--dataset",
        &fixture("synthetic12"),
        "--rules",
        rules.to_str().unwrap(),
        "--run",
        "1",
    ]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert!(csv.starts_with("rule_id,run_id,rank,unit_id,metric_value\n"));
    // Eight single rankings list 3+5+8+10 units each; the two unions list
    // 4, 7, 10 and 11 units at N = 3, 5, 8, 10.
    assert_eq!(csv.lines().count(), 1 + 8 * 26 + 2 * (4 + 7 + 10 + 11));

    let o = inquest(&[
        "prioritize",
        "--dataset",
        &fixture("synthetic12"),
        "--rules",
        rules.to_str().unwrap(),
        "--run",
        "9",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn store_from_environment_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let rules = rules_file(dir.path(), "table1");
    let store = dir.path().join("eb");
    let o = Command::new(env!("CARGO_BIN_EXE_inquest"))
        .args([
            "evaluate",
            "--dataset",
            &fixture("casestudy1"),
            "--rules",
            rules.to_str().unwrap(),
        ])
        .env("INQUEST_STORE", &store)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(store.join("evaluations.log.json").is_file());

    let trend = Command::new(env!("CARGO_BIN_EXE_inquest"))
        .arg("trend")
        .env("INQUEST_STORE", &store)
        .output()
        .unwrap();
    let text = stdout(&trend);
    assert_eq!(text.lines().count(), 119);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(1).is_some_and(|s| s.len() == 2)));

    let md1 = inquest(&["report", "--store", store.to_str().unwrap(), "--format", "markdown"]);
    let md2 = inquest(&["report", "--store", store.to_str().unwrap(), "--format", "markdown"]);
    assert!(md1.status.success());
    assert_eq!(md1.stdout, md2.stdout);
    let csv = inquest(&["report", "--store", store.to_str().unwrap(), "--format", "csv"]);
    assert!(stdout(&csv).starts_with("section,subject,run_id,key,value\n"));

    let again = inquest(&[
        "evaluate",
        "--dataset",
        &fixture("casestudy1"),
        "--rules",
        rules.to_str().unwrap(),
        "--store",
        store.to_str().unwrap(),
    ]);
    assert_eq!(again.status.code(), Some(1));

    let missing = inquest(&["trend", "--store", dir.path().join("nope").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn extract_metrics_writes_product_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run_1.product.csv");
    let o = inquest(&["extract-metrics", &fixture("snippets"), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "4 units\n");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "unit_id,class_length_loc,mean_method_length,cyclomatic,statement_loc,waste_per_line\n\
         Account,22,6,4,,\n\
         queue,20,7.5,5,,\n\
         server,9,8,3,,\n\
         shapes,23,5.666666666666667,4,,\n"
    );
    let o = inquest(&[
        "extract-metrics",
        &fixture("snippets"),
        "--out",
        out.to_str().unwrap(),
        "--aggregate",
        "mean",
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().contains("queue,20,7.5,3.5,,"));
}
