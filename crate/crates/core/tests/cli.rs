use std::process::{Command, Output};

fn ehglue(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehglue")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn jet_file_round_trip_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ch.jet");
    std::fs::write(&path, ehglue::jets::format_jet(&ehglue::jets::complex_hyperbolic_jet())).unwrap();
    let out = ehglue(&["jet-curvature", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["operator"]["scal"].as_f64().unwrap() + 6.0).abs() < 1e-10);
    assert_eq!(v["wall"]["kernel_dim"], 2);
}

#[test]
fn conflicting_jet_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jet");
    std::fs::write(&path, "# two values for one entry\n1 2 1 1 0.5\n2 1 1 1 0.25\n").unwrap();
    let out = ehglue(&["obstruction", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn missing_file_and_unknown_catalog() {
    assert_eq!(ehglue(&["obstruction", "--input", "/nonexistent/x.jet"]).status.code(), Some(3));
    assert_eq!(ehglue(&["obstruction", "--catalog", "taub-nut"]).status.code(), Some(3));
    assert_eq!(ehglue(&["obstruction"]).status.code(), Some(3));
    assert_eq!(ehglue(&["no-such-command"]).status.code(), Some(3));
}

#[test]
fn eh_verify_exit_codes() {
    let ok = ehglue(&["eh-verify", "--grid", "6"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["rows"].as_array().unwrap().len(), 10);
    let tight = ehglue(&["eh-verify", "--grid", "6", "--tol", "1e-12"]);
    assert_eq!(tight.status.code(), Some(2));
    assert_eq!(ehglue(&["eh-verify", "--grid", "0"]).status.code(), Some(3));
}

#[test]
fn eh_verify_csv() {
    let out = ehglue(&["eh-verify", "--grid", "3", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("identity,point,r,residual"));
    assert_eq!(text.lines().count(), 1 + 10 * 3);
}

#[test]
fn glue_scan_reports() {
    let out = ehglue(&["glue-scan", "--grid", "8"]);
    assert!(out.status.success());
    let v = json(&out);
    let slope = v["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() < 0.2, "{slope}");
    assert_eq!(v["chart"], "real-hyperbolic");
    assert!(v["convention"]["orientation"].is_string());

    let csv = ehglue(&["glue-scan", "--grid", "8", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,sup_residual,argmax_r"));
    assert_eq!(text.lines().count(), 5);

    let corrected = ehglue(&["glue-scan", "--grid", "8", "--builder", "corrected", "--catalog", "complex-hyperbolic"]);
    assert!(corrected.status.success());
}

#[test]
fn glue_scan_input_errors() {
    // inadmissible t
    assert_eq!(ehglue(&["glue-scan", "--t-list", "0.5,1e-2,1e-3,1e-4"]).status.code(), Some(3));
    // too few decades
    assert_eq!(ehglue(&["glue-scan", "--t-list", "1e-2,9e-3,8e-3,7e-3"]).status.code(), Some(3));
    assert_eq!(ehglue(&["glue-scan", "--t-list", "1e-2,1e-3"]).status.code(), Some(3));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = ehglue(&["obstruction", "--catalog", "flat", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["degeneracy"], "degenerate");
    // the output path does not enter the report
    let again = ehglue(&["obstruction", "--catalog", "flat"]);
    assert_eq!(std::fs::read(&path).unwrap(), again.stdout);
}
