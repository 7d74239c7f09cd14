//! End-to-end checks of the `charlab` binary: exit codes, output
//! contracts, and sweep determinism through the real command line.

use std::path::Path;
use std::process::{Command, Output};

fn charlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_charlab"))
        .args(args)
        .env_remove("CHARLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = charlab(&[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = charlab(&["frobnicate"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage") || stderr(&out).contains("unrecognized"));
}

#[test]
fn sum_prints_the_quadratic_character_value() {
    let out = charlab(&["sum", "--q", "5", "--chi", "5:2", "--a", "1", "--N", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    // −log 2 + log 3 + log 5, frozen to the shortest round-trip decimal.
    assert!(stdout(&out).contains("2.0149030205422647"), "{}", stdout(&out));
}

#[test]
fn sum_accepts_the_order_four_character_too() {
    let out = charlab(&["sum", "--q", "5", "--chi", "5:1", "--a", "1", "--N", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("value ="));
}

#[test]
fn sum_rejects_a_shift_sharing_a_factor_with_q() {
    let out = charlab(&["sum", "--q", "5", "--chi", "5:2", "--a", "5", "--N", "10"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("error"));
}

#[test]
fn sum_rejects_a_character_from_the_wrong_modulus() {
    let out = charlab(&["sum", "--q", "7", "--chi", "5:2", "--a", "1", "--N", "10"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("does not match"));
}

#[test]
fn gauss_reports_the_square_root_magnitude() {
    let out = charlab(&["gauss", "--q", "5", "--chi", "5:2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("sqrt(q) = 2.23606797749979"), "{text}");
    assert!(text.contains("|tau| = 2.236067977"), "{text}");
}

#[test]
fn verify_single_criterion_passes_with_a_small_qmax() {
    let dir = tempfile::tempdir().unwrap();
    let locks = dir.path().join("locks.txt");
    let out = charlab(&[
        "verify",
        "trans-identity",
        "--qmax",
        "50",
        "--locks",
        locks.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("trans-identity"), "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"), "{}", stdout(&out));
}

#[test]
fn verify_ramanujan_passes_with_a_small_qmax() {
    let dir = tempfile::tempdir().unwrap();
    let locks = dir.path().join("locks.txt");
    let out = charlab(&[
        "verify",
        "ramanujan",
        "--qmax",
        "80",
        "--locks",
        locks.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("PASS"));
}

#[test]
fn verify_rejects_an_unknown_target() {
    let out = charlab(&["verify", "bogus-target"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown verify target"));
    assert!(stderr(&out).contains("gauss-magnitude"));
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn sweep_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trans.cfg",
        "target = trans-identity\nq-list = 5,13\nchi-rule = all-primitive\nsamples = 3\nseed = 7\n",
    );
    let first = charlab(&["sweep", &cfg]);
    assert_eq!(code(&first), 0, "{}", stderr(&first));
    let second = charlab(&["sweep", &cfg]);
    assert_eq!(stdout(&first), stdout(&second));
    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "target,q,chi_label,a,N,d,V,r,lhs,rhs,ratio,seed,notes"
    );
    // 3 primitive characters mod 5, 11 mod 13, times 3 samples each.
    assert_eq!(lines.count(), (3 + 11) * 3);
}

#[test]
fn sweep_seed_override_changes_the_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trans.cfg",
        "target = trans-identity\nq-list = 13\nsamples = 4\nseed = 7\n",
    );
    let base = charlab(&["sweep", &cfg]);
    let reseeded = charlab(&["sweep", &cfg, "--seed", "8"]);
    assert_eq!(code(&base), 0);
    assert_eq!(code(&reseeded), 0);
    assert_ne!(stdout(&base), stdout(&reseeded));
}

#[test]
fn sweep_with_an_empty_grid_prints_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.cfg", "target = theorem1\nq-list =\n");
    let out = charlab(&["sweep", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "target,q,chi_label,a,N,d,V,r,lhs,rhs,ratio,seed,notes\n");
}

#[test]
fn sweep_json_output_parses_and_mirrors_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trans.cfg",
        "target = trans-identity\nq-list = 5\nsamples = 2\nformat = json\n",
    );
    let out = charlab(&["sweep", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["target"], "trans-identity");
    assert_eq!(rows[0]["q"], 5);
    assert!(rows[0].get("N").is_some());
    assert!(rows[0].get("V").is_some());
}

#[test]
fn sweep_out_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "trans.cfg",
        "target = trans-identity\nq-list = 5\nsamples = 2\n",
    );
    let report = dir.path().join("report.csv");
    let out = charlab(&["sweep", &cfg, "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote 2 rows"));
    let written = std::fs::read_to_string(&report).unwrap();
    assert!(written.starts_with("target,q,chi_label"));
}

#[test]
fn config_with_an_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", "target = theorem1\nq-lost = 5\n");
    let out = charlab(&["sweep", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown key"), "{}", stderr(&out));
}

#[test]
fn budget_env_variable_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "chain.cfg",
        "target = aset-chain\ns-list = 9\nd-list = 1\nv-list = 3\n",
    );
    // A malformed value is a usage error…
    let bad = Command::new(env!("CARGO_BIN_EXE_charlab"))
        .args(["sweep", &cfg])
        .env("CHARLAB_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code().unwrap(), 2);
    // …and a tiny budget skips the cells but the sweep still succeeds.
    let tiny = Command::new(env!("CARGO_BIN_EXE_charlab"))
        .args(["sweep", &cfg])
        .env("CHARLAB_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(tiny.status.code().unwrap(), 0);
    let summary = String::from_utf8_lossy(&tiny.stderr);
    assert!(summary.contains("budget violations"), "{summary}");
}

#[test]
fn mv_command_reports_an_exact_enumeration() {
    let out = charlab(&["mv", "--q", "13", "--V", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("exact mean value"), "{text}");
    assert!(text.contains("bound shape"), "{text}");
}

#[test]
fn mv_command_exits_one_when_the_budget_is_exhausted() {
    let out = charlab(&["mv", "--q", "13", "--V", "3", "--budget", "5"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("resource limit"));
}

#[test]
fn asets_command_prints_every_link() {
    let out = charlab(&["asets", "--s", "9", "--s-prime", "3", "--V", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("#A "), "{text}");
    assert!(text.contains("#A1"), "{text}");
    assert!(text.contains("#A2"), "{text}");
    assert!(text.contains("#A3(s''="), "{text}");
}

#[test]
fn cset_command_covers_the_box_exactly() {
    let out = charlab(&["cset", "--q", "15"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("covering 15/15"), "{text}");
    assert!(text.contains("cover residual"), "{text}");
}

#[test]
fn vaughan_command_recombines_and_reports_the_ratio() {
    let out = charlab(&["vaughan", "--q", "101", "--N", "101"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("recombination residual"), "{text}");
    assert!(text.contains("ratio ="), "{text}");
}
