use std::path::Path;
use std::process::{Command, Output};

fn stressnav(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stressnav"))
        .args(args)
        .env("STRESSNAV_OUT", out)
        .output()
        .unwrap()
}

/// Asserts a failed run and returns its single error line.
fn error_line(o: &Output) -> String {
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with("stressnav: error: "), "{err}");
    lines[0].to_string()
}

#[test]
fn missing_corpus_is_one_error_line() {
    let tmp = tempfile::tempdir().unwrap();
    let line = error_line(&stressnav(&["train"], tmp.path()));
    // The default corpus directory comes from STRESSNAV_OUT.
    assert!(
        line.contains(&tmp.path().join("corpus").display().to_string()),
        "{line}"
    );
    let line = error_line(&stressnav(&["evaluate", "--corpus", "/nonexistent/corpus"], tmp.path()));
    assert!(line.contains("/nonexistent/corpus"), "{line}");
}

#[test]
fn usage_errors_are_one_line_too() {
    let tmp = tempfile::tempdir().unwrap();
    // Every stochastic command needs an explicit seed.
    let line = error_line(&stressnav(&["generate"], tmp.path()));
    assert!(line.contains("--seed"), "{line}");
    error_line(&stressnav(&["noise-study"], tmp.path()));
    error_line(&stressnav(
        &["generate", "--paper-scale", "--branches", "5", "--seed", "1"],
        tmp.path(),
    ));
    error_line(&stressnav(&["frobnicate"], tmp.path()));
}

#[test]
fn out_of_range_flags_are_rejected_before_any_work() {
    let tmp = tempfile::tempdir().unwrap();
    let line = error_line(&stressnav(&["generate", "--seed", "1", "--dt", "3"], tmp.path()));
    assert!(line.contains("--dt"), "{line}");
    error_line(&stressnav(&["generate", "--seed", "1", "--branches", "3"], tmp.path()));
    error_line(&stressnav(&["evaluate", "--threshold", "1.5"], tmp.path()));
    error_line(&stressnav(&["demo-fig1", "--grid", "0.001"], tmp.path()));
    assert!(!tmp.path().join("corpus").join("manifest.json").exists());
}

#[test]
fn help_and_version_succeed() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["generate", "--help"]] {
        let o = stressnav(args, tmp.path());
        assert!(o.status.success());
        assert!(!o.stdout.is_empty());
    }
}
