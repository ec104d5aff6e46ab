//! End-to-end CLI tests: golden outputs, exit-code contract, byte-stable
//! CSV, trace format, and the seed override.

use std::process::{Command, Output};

fn retroalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_retroalign"))
        .args(args)
        .env_remove("RETROALIGN_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn dof_prints_exact_fraction_and_decimal() {
    let out = retroalign(&["dof", "--model", "icfd", "--k", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("6/5"));
    assert!(text.contains("1.20000000000"));
}

#[test]
fn dof_flags_the_two_user_regime() {
    let out = retroalign(&["dof", "--model", "icof", "--k", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("unsupported regime"));
    assert!(stdout(&out).contains("1/1"));
}

#[test]
fn table_row_values_and_unsupported_marker() {
    let out = retroalign(&["table", "--models", "icfd,icof,icsf", "--k-range", "2..4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,icfd,icfd_dec,icof,icof_dec,icsf,icsf_dec");
    assert!(lines[1].starts_with("2,unsupported"));
    assert!(lines[2].contains("6/5"));
    assert!(lines[3].contains("24/19"));
}

#[test]
fn table_is_byte_stable() {
    let args = [
        "table",
        "--models",
        "icof,icsf,xfd",
        "--k-range",
        "3..12",
        "--m-tx",
        "2,3,wide",
        "--per-candidate",
    ];
    let a = retroalign(&args);
    let b = retroalign(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // Candidate columns exist for the fan-out widths.
    let text = stdout(&a);
    assert!(text.lines().next().unwrap().contains("icof_w2"));
    assert!(text.lines().next().unwrap().contains("xfd_wide"));
}

#[test]
fn simulate_golden_run_and_exit_zero() {
    let out = retroalign(&[
        "simulate", "--model", "icfd", "--k", "3", "--seed", "1", "--trials", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text
        .lines()
        .next()
        .unwrap()
        .starts_with("scheme,field,seed"));
    assert_eq!(text.matches("6/5,true,0").count(), 3);
}

#[test]
fn simulate_xsf_three_users() {
    let out = retroalign(&[
        "simulate", "--model", "xsf", "--k", "3", "--trials", "2", "--format", "json",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("json line");
        assert_eq!(v["report"]["empirical_dof"], "27/17");
        assert_eq!(v["report"]["all_decodable"], true);
    }
}

#[test]
fn simulate_trace_emits_slots_then_report() {
    let out = retroalign(&[
        "simulate", "--model", "xof", "--k", "2", "--trials", "1", "--trace", "--format", "json",
    ]);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json"))
        .collect();
    // 3 slots and one trailing report.
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0]["t"], 0);
    assert!(lines[0]["H"][0][0].is_string());
    assert!(lines[3]["report"]["slots_used"] == 3);
}

#[test]
fn invalid_model_is_a_usage_error() {
    let out = retroalign(&["simulate", "--model", "nonsense", "--k", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unsupported_xfd_size_gets_analytic_hint() {
    let out = retroalign(&[
        "simulate", "--model", "xfd", "--k", "6", "--m-tx", "4", "--trials", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("analytic-only"));
    assert!(err.contains("analytic DoF is"));
}

#[test]
fn x_feedback_models_require_matching_m() {
    let out = retroalign(&[
        "simulate", "--model", "xof", "--k", "3", "--m-tx", "2", "--trials", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_seed_overrides_flag() {
    let with_flag = retroalign(&[
        "simulate", "--model", "xof", "--k", "3", "--seed", "9", "--trials", "1",
    ]);
    let with_env = Command::new(env!("CARGO_BIN_EXE_retroalign"))
        .args([
            "simulate", "--model", "xof", "--k", "3", "--seed", "4", "--trials", "1",
        ])
        .env("RETROALIGN_SEED", "9")
        .output()
        .expect("binary runs");
    assert_eq!(with_flag.stdout, with_env.stdout);
}

#[test]
fn verify_scoped_subset_passes() {
    for scope in ["golden", "appendices", "ordering"] {
        let out = retroalign(&["verify", "--scope", scope]);
        assert!(out.status.success(), "scope {scope}");
        assert!(stdout(&out).contains("[PASS]"));
    }
}

#[test]
fn limits_table_contains_known_constants() {
    let out = retroalign(&["limits"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("icfd,,4/3,1.33333333333"));
    assert!(text.contains("1.44269504089")); // 1/ln 2
    assert!(text.contains("1.55054609673")); // 6/(pi^2 - 6)
}

#[test]
fn verify_json_lines_are_machine_readable() {
    let out = retroalign(&["verify", "--scope", "ordering", "--format", "json"]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("json line");
        assert_eq!(v["passed"], true);
        assert!(v["id"].is_u64());
    }
}

#[test]
fn dof_xfd_without_m_tx_is_a_usage_error() {
    let out = retroalign(&["dof", "--model", "xfd", "--k", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_json_rows_carry_the_header_fields() {
    let out = retroalign(&[
        "table", "--models", "xof", "--k-range", "3..4", "--format", "json",
    ]);
    assert!(out.status.success());
    let rows: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).expect("json"))
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["k"], "3");
    assert_eq!(rows[0]["xof"], "3/2");
}
