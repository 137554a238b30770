use std::process::{Command, Output};

use serde_json::Value;

fn cbfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr carries error JSON")
}

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn price_emits_a_record_with_config_echo() {
    let out = cbfem(&["price", "--order", "p1", "--n-elements", "100"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["command"], "price");
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    let price = v["rows"][0]["price"].as_f64().unwrap();
    assert_eq!(v["summary"]["price"].as_f64().unwrap(), price);
    // floor F + coupons discounted is well below, call cap plus coupon well above
    assert!(price > 105.0 && price < 140.0, "{price}");
    assert_eq!(v["config"]["numerics"]["n_t"], 100);
    assert_eq!(v["config"]["contract"]["face_value"], 100.0);
}

#[test]
fn price_to_file_prints_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("price.json");
    let out = cbfem(&[
        "price",
        "--order",
        "p1",
        "--n-elements",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    let line = stdout(&out);
    assert!(line.starts_with("U(t=0, S=100) = "), "{line}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let printed: f64 = line.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((printed - v["summary"]["price"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn surface_has_one_row_per_level_and_node() {
    let out = cbfem(&["surface", "--order", "p2", "--n-elements", "20"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,s,u,v"));
    // P2 on 20 elements has 41 nodes; 20 steps give 21 levels
    assert_eq!(lines.count(), 21 * 41);
}

#[test]
fn surface_output_is_deterministic() {
    let a = stdout(&cbfem(&["surface", "--order", "p1", "--n-elements", "40"]));
    let b = stdout(&cbfem(&["surface", "--order", "p1", "--n-elements", "40"]));
    assert_eq!(a, b);
}

#[test]
fn greeks_csv_has_both_columns() {
    let text = stdout(&cbfem(&["greeks", "--order", "p2", "--n-elements", "20"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,s,delta,gamma"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21 * 20);
    assert!(rows.iter().flatten().all(|x| x.is_finite()));
}

#[test]
fn converge_preserves_size_order() {
    let text = stdout(&cbfem(&[
        "converge", "--order", "p1", "--sizes", "40,20,80",
    ]));
    let sizes: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(sizes, ["40", "20", "80"]);
    // the first row has no predecessor
    assert!(text.lines().nth(1).unwrap().ends_with(','));
}

#[test]
fn compare_fdm_reports_differences() {
    let text = stdout(&cbfem(&[
        "compare-fdm",
        "--order",
        "p2",
        "--sizes",
        "40",
        "--format",
        "json",
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let row = &v["rows"][0];
    let fem = row["fem"].as_f64().unwrap();
    let fdm = row["fdm_n"].as_f64().unwrap();
    assert!((row["fem_minus_fdm_n"].as_f64().unwrap() - (fem - fdm)).abs() < 1e-12);
    assert!((fem - fdm).abs() < 2.0);
}

#[test]
fn mms_reports_orders() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "[mms]\ntemporal_dtaus = [0.5, 0.25]\ntemporal_n_p1 = 2000\nspatial_sizes = [4, 8, 16]\nspatial_dtau = 0.01\n",
    );
    let text = stdout(&cbfem(&[
        "mms", "--order", "p1", "--config", &cfg, "--format", "json",
    ]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    let spatial = v["summary"]["spatial"]["order_l2"].as_f64().unwrap();
    assert!(spatial > 1.5, "{spatial}");
    let temporal = v["summary"]["temporal"]["order_l2"].as_f64().unwrap();
    assert!((temporal - 1.0).abs() < 0.2, "{temporal}");
}

#[test]
fn config_violations_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[market]\nsigma = -0.1\n\n[numerics]\ntheta = 3.0\n");
    let out = cbfem(&["price", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let v = error_json(&out);
    assert_eq!(v["error"]["kind"], "config");
    let violations = v["error"]["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 2);
    assert!(violations[0]
        .as_str()
        .unwrap()
        .starts_with("line 2: market.sigma"));
    assert!(violations[1]
        .as_str()
        .unwrap()
        .starts_with("line 5: numerics.theta"));
}

#[test]
fn unknown_keys_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "[numerics]\nsteps = 10\n");
    let v = error_json(&cbfem(&["price", "--config", &cfg]));
    assert!(v["error"]["message"]
        .as_str()
        .unwrap()
        .contains("unknown field"));
}

#[test]
fn misaligned_time_grid_is_a_config_error() {
    let out = cbfem(&["price", "--n-elements", "40", "--n-t", "33"]);
    assert_eq!(out.status.code(), Some(2));
    let v = error_json(&out);
    assert!(v["error"]["violations"][0]
        .as_str()
        .unwrap()
        .starts_with("flag --n-t"));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = cbfem(&["price", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_json(&out)["error"]["kind"], "io");
}
