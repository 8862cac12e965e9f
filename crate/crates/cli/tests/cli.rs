use std::process::{Command, Output};

use peakseq_cli::{parse_csv, RunReport, ValidationReport};

fn peakseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peakseq"))
        .args(args)
        .env_remove("PEAKSEQ_SCAN_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_factorial() {
    let out = peakseq(&["solve", "factorial", "--a", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    let s = report.solution.unwrap();
    assert!((s.sup_value - 3125.0 / 120.0).abs() < 1e-12);
    assert_eq!((s.argmax(), s.truncation_index), (4, 5));
    assert_eq!(report.command, ["solve", "factorial", "--a", "5"]);
}

#[test]
fn solve_factorial_max_tie() {
    let out = peakseq(&["solve", "factorial", "--a", "5", "--tie", "max"]);
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.solution.unwrap().argmax(), 5);
}

#[test]
fn solve_fibonacci() {
    let out = peakseq(&["solve", "fibonacci", "--u0", "0", "--u1", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let s = serde_json::from_str::<RunReport>(&stdout(&out)).unwrap().solution.unwrap();
    assert_eq!((s.sup_value, s.argmax()), (2.0, 2));
}

#[test]
fn unsupported_logistic_exits_2() {
    let out = peakseq(&["solve", "logistic", "--r", "2.5", "--y0", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported"));
}

#[test]
fn precondition_exits_2() {
    assert_eq!(peakseq(&["solve", "fibonacci", "--u0", "1", "--u1", "1"]).status.code(), Some(2));
    assert_eq!(peakseq(&["solve", "factorial", "--a", "0"]).status.code(), Some(2));
    let out = peakseq(&["solve", "linsys", "--lambda", "0.5", "--q", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(peakseq(&["solve"]).status.code(), Some(1));
    assert_eq!(peakseq(&["solve", "factorial"]).status.code(), Some(1));
    assert_eq!(peakseq(&["table", "--lambda"]).status.code(), Some(1));
    assert_eq!(peakseq(&["validate", "factorial", "--a", "3", "--horizon", "0"]).status.code(), Some(1));
    assert_eq!(peakseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn trace_length_matches_terms_evaluated() {
    let out = peakseq(&["solve", "linsys", "--lambda", "0.9", "--trace"]);
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    let s = report.solution.unwrap();
    assert_eq!(report.trace.unwrap().len() as u64, s.terms_evaluated);
    assert_eq!(s.argmax(), 9);
}

#[test]
fn table_format_output() {
    let out = peakseq(&["solve", "syracuse", "--n0", "27", "--format", "table"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("reached_cycle     true"));
}

#[test]
fn table_single_lambda() {
    let out = peakseq(&["table", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!((rows[0].k_s, rows[0].f_floor), (1, 2));
    assert!((rows[0].max_norm_sq - 1.4572).abs() / 1.4572 < 5e-4);
}

#[test]
fn table_default_list_has_eight_rows() {
    let out = peakseq(&["table"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("lambda,k_s,max_norm_sq,f_floor\n"));
    assert_eq!(parse_csv(&text).unwrap().len(), 8);
}

#[test]
fn table_error_prints_no_csv() {
    let out = peakseq(&["table", "--lambda", "0.5,1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn table_dimension_independent() {
    let two = parse_csv(&stdout(&peakseq(&["table", "--lambda", "0.5,0.9", "--d", "2"]))).unwrap();
    let five = parse_csv(&stdout(&peakseq(&["table", "--lambda", "0.5,0.9", "--d", "5"]))).unwrap();
    assert_eq!(two, five);
}

#[test]
fn validate_clean_and_corrupted() {
    let out = peakseq(&["validate", "factorial", "--a", "3", "--horizon", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(serde_json::from_str::<ValidationReport>(&stdout(&out)).unwrap().clean);

    let out = peakseq(&["validate", "factorial", "--a", "3", "--horizon", "100", "--beta-scale", "0.5"]);
    assert_eq!(out.status.code(), Some(3));
    let report: ValidationReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.first_violation.unwrap() <= 100);
}

#[test]
fn validate_syracuse_matches_direct_iteration() {
    let (n0, a, b, c, horizon) = (7u64, 50.0f64, 0.9f64, 5.0f64, 60u64);
    let mut y = n0;
    let mut first = None;
    for n in 0..=horizon {
        if y as f64 > a * b.powi(n as i32) + c {
            first = Some(n);
            break;
        }
        y = if y % 2 == 0 { y / 2 } else { (3 * y + 1) / 2 };
    }
    let out = peakseq(&[
        "validate", "syracuse", "--n0", "7", "--a", "50", "--b", "0.9", "--c", "5", "--horizon", "60",
    ]);
    let report: ValidationReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report.first_violation, first);
    assert_eq!(out.status.code(), Some(if first.is_some() { 3 } else { 0 }));
}

#[test]
fn scan_limit_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_peakseq"))
        .args(["solve", "factorial", "--a", "3"])
        .env("PEAKSEQ_SCAN_LIMIT", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
