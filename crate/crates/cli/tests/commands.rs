use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn pulsewell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pulsewell"))
        .args(args)
        .env_remove("PULSEWELL_DIGITS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Rows of a CSV table as column-name maps.
fn table(text: &str) -> Vec<HashMap<String, String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            headers.iter().map(String::from).zip(r.iter().map(String::from)).collect()
        })
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap()
}

const COLUMNS: &str =
    "lambda,omega,alpha,re_r,im_r,abs_r,probability,err_estimate,depth_used,digits_used,flag";

#[test]
fn large_lambda_keeps_the_bound_state() {
    let out = pulsewell(&["survival", "--lambda", "1e4", "--omega", "1", "--psi0", "bound"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), COLUMNS);
    let rows = table(&text);
    assert_eq!(rows.len(), 1);
    let abs_r = num(&rows[0], "abs_r");
    assert!((0.999..=1.001).contains(&abs_r), "abs_r = {abs_r}");
}

#[test]
fn zero_coupling_is_exact() {
    let out = pulsewell(&["survival", "--lambda", "1", "--omega", "3", "--alpha", "0"]);
    assert_eq!(code(&out), 0);
    let rows = table(&stdout(&out));
    assert_eq!(num(&rows[0], "re_r"), 0.0);
    assert_eq!(num(&rows[0], "im_r"), 1.0);
    assert_eq!(num(&rows[0], "probability"), 1.0);
    assert_eq!(rows[0]["flag"], "ok");
}

#[test]
fn zero_lambda_points_to_the_lambda0_command() {
    let out = pulsewell(&["survival", "--lambda", "0", "--omega", "3"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda0"));
    assert!(out.stdout.is_empty());
}

#[test]
fn argument_errors_exit_with_one() {
    for args in [
        vec!["survival", "--omega", "3"],
        vec!["survival", "--lambda", "x", "--omega", "3"],
        vec!["survival", "--lambda", "1", "--omega", "3", "--format", "xml"],
        vec!["sweep", "--param", "lambda", "--from", "2", "--to", "1", "--points", "5"],
        vec!["sweep", "--param", "lambda", "--from", "0", "--to", "1", "--points", "5", "--scale", "log"],
        vec!["nonsense"],
    ] {
        let out = pulsewell(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&pulsewell(&["--help"])), 0);
}

#[test]
fn unconverged_point_is_flagged_with_exit_two() {
    let out = pulsewell(&[
        "survival", "--lambda", "0.3", "--omega", "1.5", "--tol", "1e-14", "--depth", "4", "--max-depth", "4",
    ]);
    assert_eq!(code(&out), 2);
    let rows = table(&stdout(&out));
    assert_eq!(rows[0]["flag"], "unconverged");
    for key in ["re_r", "im_r", "abs_r", "probability", "err_estimate"] {
        assert!(num(&rows[0], key).is_finite());
    }
}

#[test]
fn json_mirrors_csv() {
    let args = ["survival", "--lambda", "1", "--omega", "3"];
    let csv_rows = table(&stdout(&pulsewell(&args)));
    let json: serde_json::Value =
        serde_json::from_str(&stdout(&pulsewell(&[&args[..], &["--format", "json"]].concat()))).unwrap();
    let record = &json.as_array().unwrap()[0];
    let keys: Vec<&str> = record.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected: Vec<&str> = COLUMNS.split(',').collect();
    let mut got = keys.clone();
    expected.sort_unstable();
    got.sort_unstable();
    assert_eq!(got, expected);
    assert_eq!(record["re_r"].as_f64().unwrap(), num(&csv_rows[0], "re_r"));
    assert_eq!(record["flag"], "ok");
}

#[test]
fn omega_zero_uses_the_series() {
    let a = table(&stdout(&pulsewell(&["survival", "--lambda", "0.5", "--omega", "0"])));
    let b = table(&stdout(&pulsewell(&["omega0", "--lambda", "0.5"])));
    assert_eq!(a[0]["re_r"], b[0]["re_r"]);
    assert!(num(&b[0], "asymptotic_abs_r") > 0.0);
}

#[test]
fn digits_come_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_pulsewell"))
        .args(["survival", "--lambda", "1", "--omega", "3"])
        .env("PULSEWELL_DIGITS", "30")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let rows = table(&stdout(&out));
    assert_eq!(num(&rows[0], "digits_used"), 30.0);
    let plain = table(&stdout(&pulsewell(&["survival", "--lambda", "1", "--omega", "3"])));
    assert!((num(&rows[0], "abs_r") - num(&plain[0], "abs_r")).abs() < 1e-11);
}

fn sweep_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--output", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    pulsewell(&args)
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let args = ["--param", "lambda", "--from", "0.2", "--to", "2", "--points", "24", "--omega", "2.5"];
    assert_eq!(code(&sweep_to(&a, &args)), 0);
    assert_eq!(code(&sweep_to(&b, &args)), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn denser_sweeps_refine_coarser_ones() {
    let dir = tempfile::tempdir().unwrap();
    let (coarse, fine) = (dir.path().join("c.csv"), dir.path().join("f.csv"));
    let base = ["--param", "omega", "--from", "1", "--to", "3", "--lambda", "0.7"];
    assert_eq!(code(&sweep_to(&coarse, &[&base[..], &["--points", "5"]].concat())), 0);
    assert_eq!(code(&sweep_to(&fine, &[&base[..], &["--points", "9"]].concat())), 0);
    let c = table(&std::fs::read_to_string(coarse).unwrap());
    let f = table(&std::fs::read_to_string(fine).unwrap());
    for (i, row) in c.iter().enumerate() {
        let shared = &f[2 * i];
        assert!((num(row, "omega") - num(shared, "omega")).abs() < 1e-15);
        for key in ["re_r", "im_r"] {
            assert!((num(row, key) - num(shared, key)).abs() <= 1e-12, "{key} at row {i}");
        }
    }
    let omegas: Vec<f64> = f.iter().map(|r| num(r, "omega")).collect();
    assert!(omegas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn omega0_sweep_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let args = ["--param", "lambda", "--from", "0.1", "--to", "1", "--points", "20", "--scale", "log", "--mode", "omega0"];
    assert_eq!(code(&sweep_to(&path, &args)), 0);
    let rows = table(&std::fs::read_to_string(path).unwrap());
    assert_eq!(rows.len(), 20);
    assert_eq!(num(&rows[0], "lambda"), 0.1);
    assert_eq!(num(&rows[19], "lambda"), 1.0);
    assert!(rows.iter().all(|r| r["flag"] == "ok" && num(r, "omega") == 0.0));
}

#[test]
fn short_pulse_sweep_stays_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig5.csv");
    let args = ["--param", "lambda", "--from", "1", "--to", "10", "--points", "50", "--mode", "shortpulse", "--ratio", "20"];
    assert_eq!(code(&sweep_to(&path, &args)), 0);
    let rows = table(&std::fs::read_to_string(path).unwrap());
    assert_eq!(rows.len(), 50);
    for r in &rows {
        let p = num(r, "probability");
        assert!((0.0..=1.01).contains(&p), "P = {p}");
        assert_eq!(num(r, "omega"), 20.0 * num(r, "lambda"));
        assert_eq!(num(r, "alpha"), num(r, "lambda"));
    }
}

#[test]
fn lambda0_sweep_uses_its_own_schema() {
    let out = pulsewell(&["sweep", "--param", "omega", "--from", "2", "--to", "4", "--points", "3", "--mode", "lambda0", "--truncation", "60"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "omega,truncation,sigma_min,flag");
    assert!(table(&text).iter().all(|r| num(r, "sigma_min") > 0.0));
}

#[test]
fn validate_quick_passes_and_a_fault_exits_three() {
    let out = pulsewell(&["validate", "--level", "quick"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));

    let out = pulsewell(&["validate", "--inject-fault"]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).lines().next().unwrap().starts_with("FAIL path sum"));
}

#[test]
fn oracle_reports_samples_and_dumps_the_last_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("psi.csv");
    let out = pulsewell(&[
        "oracle", "--lambda", "1", "--omega", "3", "--grid-L", "80", "--tmax", "1", "--sample-every", "0.5",
        "--dump", dump.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = table(&stdout(&out));
    assert_eq!(rows.len(), 3);
    assert!((num(&rows[0], "box_probability") - (1.0 - (-2.0f64).exp())).abs() < 1e-5);
    assert!(rows.iter().all(|r| (num(r, "norm") - 1.0).abs() < 1e-10));
    let snapshot = std::fs::read_to_string(dump).unwrap();
    assert_eq!(snapshot.lines().next().unwrap(), "t,x,re,im,abs2");
    let cells = table(&snapshot);
    assert_eq!(cells.len(), 3201);
    assert!(cells.iter().all(|r| num(r, "t") == 1.0));
}
