use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn dq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dq"))
        .args(args)
        .output()
        .expect("dq runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(args: &[&str]) -> (Output, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut full: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap().to_string();
    full.extend(["--report", &p]);
    let out = dq(&full);
    let text = std::fs::read_to_string(&path).unwrap_or_default();
    (out, text)
}

fn result_line<'a>(text: &'a str, label: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(label).and_then(|r| r.strip_prefix(" = ")))
}

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("DQ_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {name}"));
    assert_eq!(actual, expected, "report differs from {name}");
}

#[test]
fn flat_star_of_coordinates() {
    let p = problem("flat.json");
    let o = dq(&["star", p.to_str().unwrap(), "f", "g"]);
    assert!(o.status.success());
    assert_eq!(result_line(&stdout(&o), "f * g"), Some("1 * x1 * x2 + 1 * eps"));
}

#[test]
fn star_with_unit_and_self() {
    let p = problem("flat.json");
    let o = dq(&["star", p.to_str().unwrap(), "h", "one"]);
    assert_eq!(result_line(&stdout(&o), "h * one"), Some("3 * x2 + -1/2 * x1 * x2 + 1 * x1^2"));
    let o = dq(&["star", p.to_str().unwrap(), "h", "h"]);
    assert_eq!(
        result_line(&stdout(&o), "h * h"),
        Some("9 * x2^2 + -3 * x1 * x2^2 + 6 * x1^2 * x2 + 1/4 * x1^2 * x2^2 + -1 * x1^3 * x2 + 1 * x1^4 + -1/4 * eps^2")
    );
    let o = dq(&["star", p.to_str().unwrap(), "f", "f"]);
    assert_eq!(result_line(&stdout(&o), "f * f"), Some("1 * x1^2"));
}

#[test]
fn flat_run_has_trivial_gamma_and_curvature() {
    let p = problem("flat.json");
    let o = dq(&["run", p.to_str().unwrap()]);
    let text = stdout(&o);
    assert!(o.status.success());
    assert!(!text.contains("gamma["), "{text}");
    assert!(!text.contains("F["), "{text}");
    assert_eq!(result_line(&text, "rho(f)"), Some("1 * x1 + 1 * y1"));
}

#[test]
fn flat_check_report_matches_golden() {
    let p = problem("flat.json");
    let (o, json) = report(&["check", p.to_str().unwrap()]);
    assert!(o.status.success());
    golden("flat-check.json", &json);
}

#[test]
fn flows_run_report_matches_golden() {
    let p = problem("flows.json");
    let (o, json) = report(&["run", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("gamma[dx1] = "));
    golden("flows-run.json", &json);
}

#[test]
fn reports_are_deterministic() {
    let p = problem("twist-shear.json");
    let (_, a) = report(&["check", p.to_str().unwrap()]);
    let (_, b) = report(&["check", p.to_str().unwrap()]);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(!a.contains("timing"));
}

#[test]
fn timing_only_on_request() {
    let p = problem("flat.json");
    let (_, json) = report(&["gamma", p.to_str().unwrap(), "--timing"]);
    assert!(json.contains("\"timing\""));
}

#[test]
fn negative_control_fails_flatness_at_first_order() {
    let p = problem("shear.json");
    let o = dq(&["check", "--negative-control", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("flatness: FAIL at (ε1, degree 2)"), "{}", stdout(&o));
}

#[test]
fn non_darboux_chart_is_a_verification_failure() {
    let p = problem("non-darboux.json");
    let o = dq(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("darboux_check: FAIL"), "{text}");
    assert!(text.contains("darboux_check failed: residual (2 * y1) dx1∧dx2"), "{text}");
}

#[test]
fn input_errors_exit_with_two() {
    let p = problem("flat.json");
    let o = dq(&["star", p.to_str().unwrap(), "f", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown function name"));

    let o = dq(&["check", "--eps", "1", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output_order 3 exceeds"));

    let o = dq(&["check", "/nonexistent/problem.json"]);
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"format_version\": 1,\n  oops\n}\n").unwrap();
    let o = dq(&["check", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn cap_override_keeps_products() {
    let p = problem("shear.json");
    let a = stdout(&dq(&["star", p.to_str().unwrap(), "h", "g"]));
    let b = stdout(&dq(&["star", "--eps", "4", "--ny", "12", p.to_str().unwrap(), "h", "g"]));
    assert_eq!(result_line(&a, "h * g"), result_line(&b, "h * g"));
    assert!(result_line(&a, "h * g").is_some());
}

#[test]
fn poisson_mode_checks() {
    let p = problem("poisson.json");
    let o = dq(&["check", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = dq(&["star", p.to_str().unwrap(), "f", "g"]);
    assert_eq!(result_line(&stdout(&o), "f * g"), Some("1 * x1 * x2 + 1 * eps * x1"));
}

#[test]
fn quantize_and_curvature_subcommands() {
    let p = problem("flows.json");
    let o = dq(&["quantize", p.to_str().unwrap(), "one"]);
    assert_eq!(result_line(&stdout(&o), "rho(one)"), Some("1"));
    let o = dq(&["curvature", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("F[dx1^dx2] = "));
}
