//! End-to-end checks of the `cutbound` binary: exit codes and deterministic
//! output for each subcommand.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutbound"))
        .args(args)
        .output()
        .expect("failed to spawn cutbound")
}

#[test]
fn generate_is_deterministic_and_zero_exit() {
    let a = run(&["generate", "--preset", "fibonacci-full", "--t-max", "50"]);
    let b = run(&["generate", "--preset", "fibonacci-full", "--t-max", "50"]);
    assert!(a.status.success(), "stderr: {}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout, "generate output must be byte-identical");
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "direct,internal,m,n,mass,direct_exact");
    // 50 / mean gap (tau^2/sqrt(5) ~ 1.17) ~ 43 points; demand a sane count.
    let n = lines.count();
    assert!((35..=55).contains(&n), "unexpected point count {n}");
}

#[test]
fn scan_reports_checkpoints() {
    let out = run(&[
        "scan",
        "--preset",
        "fibonacci-full",
        "--t-max",
        "500",
        "--checkpoints",
        "100,250,500",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("sup"), "missing summary: {text}");
    let rows = text
        .lines()
        .skip_while(|l| *l != "t,defect")
        .skip(1)
        .count();
    assert_eq!(rows, 3, "expected one row per checkpoint: {text}");
}

#[test]
fn cfrac_expands_quadratic_surd() {
    let out = run(&["cfrac", "sqrt(2)", "--convergents", "6"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains('2'), "expansion of sqrt(2) should show quotient 2: {text}");
    assert!(text.contains("convergent") || text.contains('/'), "missing convergents: {text}");
}

#[test]
fn brs_certifies_fibonacci_hat() {
    let out = run(&[
        "brs",
        "--preset",
        "fibonacci-full",
        "--weight",
        "hat(-1/2,0,1/2,1/5)",
        "--samples",
        "100,1000",
    ]);
    assert!(
        out.status.success(),
        "brs should certify: stderr {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).expect("brs output must be JSON");
    assert_eq!(json["verdict"], "bounded");
    assert_eq!(json["hypotheses_satisfied"], true);
}

#[test]
fn brs_rejects_half_window() {
    let out = run(&["brs", "--preset", "fibonacci-half", "--samples", "100,1000"]);
    assert_eq!(out.status.code(), Some(4), "half window must fail the verdict");
}

#[test]
fn compare_respects_bound_flag() {
    let base = &["compare", "--preset", "fibonacci-full", "--t-max", "300", "--seed", "7"];
    let ok = run(&[base as &[&str], &["--bound", "5.0"]].concat());
    assert!(ok.status.success(), "stderr: {}", String::from_utf8_lossy(&ok.stderr));
    let tight = run(&[base as &[&str], &["--bound", "0.001"]].concat());
    assert_eq!(tight.status.code(), Some(4), "tight bound must exit 4");
    let again = run(&[base as &[&str], &["--bound", "5.0"]].concat());
    assert_eq!(ok.stdout, again.stdout, "seeded compare must be deterministic");
}

#[test]
fn semantic_errors_exit_3() {
    let out = run(&["generate", "--preset", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(3));
    let weight = run(&["generate", "--preset", "fibonacci-full", "--weight", "hat(1,0,-1,2)"]);
    assert_eq!(weight.status.code(), Some(3), "invalid hat must be a semantic error");
}

#[test]
fn argument_errors_exit_2() {
    let out = run(&["generate", "--preset"]);
    assert_eq!(out.status.code(), Some(2));
    let none = run(&[] as &[&str]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn scheme_file_roundtrip_through_cli() {
    let scheme = cutbound::scheme::fibonacci_preset(cutbound::scheme::FibonacciKind::Full);
    let dir = std::env::temp_dir().join("cutbound-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fib.json");
    std::fs::write(&path, scheme.to_json()).unwrap();
    let from_file = run(&["generate", "--scheme", path.to_str().unwrap(), "--t-max", "30"]);
    let from_preset = run(&["generate", "--preset", "fibonacci-full", "--t-max", "30"]);
    assert!(from_file.status.success(), "stderr: {}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(from_file.stdout, from_preset.stdout);
}
