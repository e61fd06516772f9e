use std::path::Path;
use std::process::{Command, Output};

fn wtail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wtail"))
        .args(args)
        .env_remove("WT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn is_estimate_reproduces_reference_row() {
    let o = wtail(&["estimate", "--n", "100", "--p", "10", "--beta", "1", "--x", "1.95", "--method", "is", "--iterations", "10000", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = json_lines(&o);
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    let (est, se) = (r["estimate"].as_f64().unwrap(), r["se"].as_f64().unwrap());
    assert!((est - 1.02e-3).abs() < 3.0 * se, "{est} ± {se}");
    assert_eq!(r["spec"]["N"], 10000);
    assert_eq!(r["spec"]["seed"], 7);
    assert_eq!(r["r_source"], "computed");
    assert!(r["r_used"].as_f64().unwrap() > 0.0);
    assert!(r["log_alpha_ld"].as_f64().unwrap() < 0.0);
}

#[test]
fn tw_method_matches_reference_cell() {
    let o = wtail(&["estimate", "--n", "100", "--p", "10", "--beta", "1", "--x", "1.80", "--method", "tw"]);
    assert!(o.status.success());
    let r = &json_lines(&o)[0];
    assert!((r["tw"].as_f64().unwrap() - 5.07e-2).abs() < 2e-3);
    assert_eq!(r["estimate"], r["tw"]);
    assert!(r["sd"].is_null());
    assert!(r["notes"]["sd"].is_string());
}

#[test]
fn topk_with_rate_override() {
    let o = wtail(&["estimate", "--n", "100", "--p", "50", "--beta", "1", "--x", "5.9", "--k", "2", "--method", "is", "--rate", "0.1", "--iterations", "10000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &json_lines(&o)[0];
    let (est, se) = (r["estimate"].as_f64().unwrap(), r["se"].as_f64().unwrap());
    let reference_se = 6.70e-3 / 100.0;
    assert!((est - 1.14e-3).abs() < 3.0 * (se * se + reference_se * reference_se).sqrt(), "{est} ± {se}");
    assert_eq!(r["r_used"], 0.1);
    assert_eq!(r["r_source"], "override");
    assert!(r["tw"].is_null());
}

#[test]
fn below_edge_without_rate_is_refused() {
    let o = wtail(&["estimate", "--n", "100", "--p", "10", "--beta", "1", "--x", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not rare"), "{err}");
}

#[test]
fn parameter_errors_exit_2() {
    assert_eq!(wtail(&["estimate", "--n", "100", "--p", "10", "--beta", "3", "--x", "2"]).status.code(), Some(2));
    assert_eq!(wtail(&["estimate", "--n", "100", "--p", "10", "--beta", "1", "--x", "12"]).status.code(), Some(2));
    assert_eq!(wtail(&["table", "--table", "9z"]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical_across_workers_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str, format: &str| {
        let path = dir.path().join(name);
        let o = wtail(&[
            "estimate", "--n", "100", "--p", "20", "--beta", "2", "--x", "2.18", "--x", "2.3", "--method", "all",
            "--iterations", "3000", "--seed", "9", "--workers", workers, "--format", format, "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(path).unwrap()
    };
    for format in ["json", "csv"] {
        let a = run("1", &format!("a.{format}"), format);
        let b = run("4", &format!("b.{format}"), format);
        let c = run("1", &format!("c.{format}"), format);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
    let json = std::fs::read_to_string(dir.path().join("a.json")).unwrap();
    assert_eq!(json.lines().count(), 10);
    assert!(!json.contains("NaN"));
}

#[test]
fn seed_falls_back_to_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_wtail"))
        .args(["estimate", "--n", "100", "--p", "10", "--beta", "1", "--x", "2.0", "--iterations", "500"])
        .env("WT_SEED", "4242")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(json_lines(&o)[0]["spec"]["seed"], 4242);
}

#[test]
fn csv_has_rfc4180_quoting_and_header() {
    let o = wtail(&["estimate", "--n", "100", "--p", "50", "--beta", "1", "--x", "5.9", "--k", "2", "--iterations", "300", "--format", "csv"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "n");
    assert_eq!(&header[18], "notes");
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(row.len(), 19);
    assert_eq!(&row[16], "");
    assert!(row[18].contains("k = 1 only"));
}

#[test]
fn table_columns_and_zero_hit_cells() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let o = wtail(&["table", "--table", "1a", "--iterations-is", "500", "--iterations-dmc", "2000", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["x", "EST_IS", "SD_IS", "SD_IS/EST_IS", "EST_DMC", "SD_DMC", "SD_DMC/EST_DMC", "c.TW", "TW"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    // x = 2.30 has α ≈ 5e−8: no direct hits, undefined ratio left empty
    assert_eq!(&rows[4][4], "0");
    assert_eq!(&rows[4][6], "");
    let tw: f64 = rows[0][8].parse().unwrap();
    assert!((tw - 5.07e-2).abs() < 2e-3);
}

#[test]
fn timing_table_orders_methods() {
    let o = wtail(&["table", "--table", "3a", "--iterations-timing", "300"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().len(), 6);
    assert_eq!(rdr.records().count(), 8);
}

#[test]
fn figure_data_flags_negative_ctw() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    let o = wtail(&[
        "figure-data", "--n", "100", "--p", "10", "--beta", "1", "--x-from", "1.9", "--x-to", "2.1", "--x-points", "3",
        "--iterations-is", "2000", "--iterations-dmc", "5000", "--out", path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(Path::new(&path)).unwrap();
    let h = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let last = &rows[2];
    assert_eq!(&last[col("ctw_negative")], "1");
    assert_eq!(&last[col("log10_ctw")], "");
    assert!(last[col("ctw")].parse::<f64>().unwrap() < 0.0);
    for r in &rows {
        let tw: f64 = r[col("log10_tw")].parse().unwrap();
        let is: f64 = r[col("log10_is")].parse().unwrap();
        assert!(tw > is);
    }
}

#[test]
fn tw_grid_export() {
    let o = wtail(&["tw-grid"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,F1,F2"));
    assert_eq!(lines.count(), 24 * 256 + 1);
}

#[test]
fn selftest_quick_passes() {
    let o = wtail(&["selftest", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("check tw-grid: PASS"));
}

#[test]
fn selftest_full_passes() {
    let o = wtail(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("check small-p-unbiasedness: PASS"));
}

#[test]
fn selftest_reports_injected_fault() {
    let o = wtail(&["selftest", "--quick", "--inject-fault", "tw-grid"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("check tw-grid: FAIL"), "{out}");
    assert!(out.contains("cdf decreases"), "{out}");
}
