use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn pdcris(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_pdcris"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn success_prints_one_json_report() {
    let path = problem("affine_line_f2.pdc");
    let out = pdcris(&[path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["sides_agree"], true);
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn stdin_overrides_and_timing() {
    let text = std::fs::read_to_string(problem("affine_line_f3.pdc")).unwrap();
    let out = pdcris(&["-", "--weight-cutoff", "3", "--side", "de-rham", "--pretty", "--timing"], Some(&text));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["task"]["weight_cutoff"], 3);
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() > 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("elapsed"));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("elapsed"));
}

#[test]
fn input_errors_exit_one() {
    let out = pdcris(&["[base]\n"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = pdcris(&[], Some("[base]\nring = Z\n[presentation]\nchart = x\nideal = x^[2\n[compute]\ntask = cohomology\n"));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: line 5, column 11"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn refusal_exits_two() {
    // θ = ∂ + 1 over ℤ has no quasi-nilpotence certificate, so the comparison side is refused
    let text = std::fs::read_to_string(problem("theta_plus_one_z.pdc")).unwrap().replace("task = verify-connection", "task = cohomology\ndegrees = 0..0");
    let out = pdcris(&["--side", "ca"], Some(&text));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("refused"));
}

#[test]
fn inconclusive_verification_is_not_an_error() {
    let path = problem("theta_plus_one_z.pdc");
    let out = pdcris(&[path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["inconclusive"], true);
    assert_eq!(v["result"]["quasi_nilpotence"]["status"], "not_within_bound");
}
