//! Command-line behaviour: outputs, exit codes and flag validation.

use std::process::{Command, Output};

fn rnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnp"))
        .args(args)
        .env_remove("RNP_THREADS")
        .output()
        .expect("rnp binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn measure_reports_optimal_vote() {
    let o = rnp(&[
        "measure", "--p-i", "0.05", "--p-m", "0.05", "--p-l", "1e-4", "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 7);
    let eps = v["eps_M"].as_f64().unwrap();
    assert!((7.8e-4..8.6e-4).contains(&eps), "{eps}");
    assert!(v["t_robust_meas"].as_f64().unwrap() > 0.0);
}

#[test]
fn measure_without_errors_needs_no_repetition() {
    let o = rnp(&[
        "measure", "--p-i", "0", "--p-m", "0", "--p-l", "0", "--json",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 0);
    assert_eq!(v["eps_M"], 0.0);
    // A perfect optical readout has no finite duration.
    assert!(v["t_robust_meas"].is_null());
}

#[test]
fn out_of_range_flag_is_a_flag_error() {
    let o = rnp(&["measure", "--p-m", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--p-m"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_and_bad_enum_are_flag_errors() {
    assert_eq!(rnp(&["plan", "--frobnicate"]).status.code(), Some(2));
    let o = rnp(&["plan", "--restart", "sometimes"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--restart"), "{}", stderr(&o));
    assert_eq!(rnp(&[]).status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let o = rnp(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["measure", "pump", "plan", "sweep", "verify"] {
        assert!(stdout(&o).contains(sub));
    }
}

#[test]
fn unpurifiable_fidelity_is_a_domain_error() {
    let o = rnp(&["plan", "--f", "0.4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unpurifiable fidelity"));
    assert!(stderr(&o).contains("--f"));
}

#[test]
fn unknown_preset_is_rejected() {
    let o = rnp(&["plan", "--preset", "quantum-dots"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ion-depolarizing"));
}

#[test]
fn plan_json_uses_result_field_names() {
    let o = rnp(&["plan", "--preset", "nv-dephasing", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in [
        "schedule",
        "delta_min",
        "n_tot_budget",
        "expected_pairs",
        "eps_fail",
        "eps_E",
        "t_robust_ent",
        "t_C",
        "gamma",
        "t_C_expected",
        "eps_M",
        "restart_mode",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["schedule"]["n_b"], 0);
    assert_eq!(v["memory_warning"], false);
}

#[test]
fn plan_flags_override_the_preset() {
    let base = rnp(&["plan", "--preset", "ion-depolarizing", "--json"]);
    let slow = rnp(&[
        "plan",
        "--preset",
        "ion-depolarizing",
        "--eta",
        "0.05",
        "--json",
    ]);
    let t = |o: &Output| {
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["t_C"]
            .as_f64()
            .unwrap()
    };
    assert!(t(&slow) > 5.0 * t(&base));
    let full = rnp(&[
        "plan",
        "--preset",
        "ion-depolarizing",
        "--restart",
        "full",
        "--json",
    ]);
    assert!(t(&full) > t(&base));
}

#[test]
fn pump_prints_one_json_line_per_step() {
    let o = rnp(&["pump", "--n-b", "2", "--n-p", "3", "--f", "0.9", "--json"]);
    assert!(o.status.success());
    let lines: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 5);
    let first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(first["kind"], "bit");
    let last: serde_json::Value = serde_json::from_str(&lines[4]).unwrap();
    assert_eq!(last["kind"], "phase");

    let table = rnp(&["pump", "--standard", "4"]);
    assert!(table.status.success());
    assert_eq!(stdout(&table).lines().count(), 6);
}

#[test]
fn sweep_writes_csv_with_exact_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.csv");
    let o = rnp(&[
        "sweep",
        "--p-l-points",
        "2",
        "--f-points",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "p_L,F,noise,n_b,n_p,delta_min,eps_fail,eps_E,n_tot_budget,expected_pairs,t_C_s,gamma"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn sweep_json_lines() {
    let o = rnp(&["sweep", "--p-l-points", "1", "--f-points", "3", "--json"]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["F"], 0.99);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = rnp(&["sweep", "--out", "/nonexistent-dir/for/sure/s.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("/nonexistent-dir"));
}

#[test]
fn bad_thread_count_is_a_flag_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_rnp"))
        .args(["plan"])
        .env("RNP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("RNP_THREADS"));
}

#[test]
fn verify_passes_and_records_seed() {
    let o = rnp(&["verify", "--trials", "20000", "--seed", "7", "--json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["trials"], 20000);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"] == "oracle_equivalence" && c["status"] == "pass"));
    assert!(checks.iter().all(|c| c["status"] != "fail"));
}

#[test]
fn verify_rejects_zero_trials() {
    let o = rnp(&["verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--trials"));
}
