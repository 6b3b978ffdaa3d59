use znd_cli::output::{canonical_json, emit_report};
use znd_cli::{run, Command, RunOptions, Status};
use znd_core::params::p0;
use znd_core::stability::{verify_condition_d, Verdict, VerifyOptions};

#[test]
fn same_report_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let rep = verify_condition_d(&p0(), &VerifyOptions::default());
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    emit_report(&rep, &a).unwrap();
    emit_report(&verify_condition_d(&p0(), &VerifyOptions::default()), &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn inconclusive_report_carries_diagnostics() {
    let opts = VerifyOptions {
        indent_r: Some(5.0),
        ..Default::default()
    };
    let rep = verify_condition_d(&p0(), &opts);
    assert_eq!(rep.verdict, Verdict::Inconclusive);
    let json = canonical_json(&rep).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(!v["diagnostics"].as_array().unwrap().is_empty());
    assert_eq!(v["verdict"], "Inconclusive");
    assert!(v["winding_open_half_plane"].is_null());
}

#[test]
fn params_command_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let status = run(Command::Params, &RunOptions::new(dir.path())).unwrap();
    assert_eq!(status, Status::Ok);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("params.json")).unwrap())
            .unwrap();
    assert!((v["psi_max"].as_f64().unwrap() - 1.2251482).abs() < 1e-7);
    assert!((v["coeff_floor"].as_f64().unwrap() - 1.3324555).abs() < 1e-7);
}
