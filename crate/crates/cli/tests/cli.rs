use std::path::PathBuf;
use std::process::{Command, Output};

fn coop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name]
        .iter()
        .collect();
    path.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn run_prints_the_golden_trace() {
    let out = coop(&["run", &fixture("thread1.coop")]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(fixture("thread1.trace")).unwrap();
    assert_eq!(stdout(&out), golden);
    let last_trust = golden.lines().rfind(|l| l.contains(" trust ")).unwrap();
    assert!(last_trust.contains("level=0"), "{last_trust}");
    assert!(stderr(&out).is_empty());
}

#[test]
fn run_writes_trace_file() {
    let target = scratch("thread2.trace", "");
    let out = coop(&[
        "run",
        &fixture("thread2.coop"),
        "--trace",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    assert_eq!(
        std::fs::read_to_string(&target).unwrap(),
        std::fs::read_to_string(fixture("thread2.trace")).unwrap()
    );
}

#[test]
fn check_passes_on_thread_three() {
    let out = coop(&["check", &fixture("thread3.coop")]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("9 expectations, 9 passed, 0 failed\n"));
}

#[test]
fn check_reports_failed_expectations() {
    let path = scratch(
        "wrong.coop",
        "tick 0\ntrust q p = 1\nexpect-trust q p = 2\n",
    );
    let out = coop(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL line 3"), "{}", stdout(&out));
}

#[test]
fn quiet_check_uses_only_the_exit_code() {
    let out = coop(&["check", &fixture("thread1.coop"), "--quiet"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty() && stderr(&out).is_empty());
}

#[test]
fn flags_override_the_header() {
    // recency-history caps a single kept promise at 1, so the thread's
    // expected 2 no longer holds
    let out = coop(&[
        "check",
        &fixture("thread3.coop"),
        "--tram",
        "recency",
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let thread3 = std::fs::read_to_string(fixture("thread3.coop")).unwrap();
    let recency = scratch(
        "recency.coop",
        &format!("policy tram=recency-history\n{thread3}"),
    );
    let recency = recency.to_str().unwrap();
    let by_flag = coop(&["run", &fixture("thread3.coop"), "--tram", "recency"]);
    let by_header = coop(&["run", recency]);
    assert_eq!(stdout(&by_flag), stdout(&by_header));
    let back = coop(&["run", recency, "--tram", "incremental", "--seed", "7"]);
    let default = coop(&["run", &fixture("thread3.coop")]);
    assert_eq!(stdout(&back), stdout(&default));
    assert_ne!(stdout(&back), stdout(&by_header));
}

#[test]
fn load_errors_exit_two() {
    let path = scratch("bad.coop", "tick 3\ntrust q p = 1\ntick 1\n");
    let out = coop(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    assert!(
        stderr(&out).contains("tick 1 follows tick 3"),
        "{}",
        stderr(&out)
    );

    let out = coop(&["run", "/nonexistent/scenario.coop"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_prints_canonical_form() {
    let out = coop(&["parse", r#"p [ promise! pi : "b" / {r,q} ] q"#]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "p[pi:\"b\"/{q,r}]q\n");
}

#[test]
fn parse_errors_point_at_a_column() {
    let out = coop(&["parse", r#"p[pi "b"]q"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).is_empty());
    let err = stderr(&out);
    assert!(err.contains("column 6"), "{err}");
    assert!(err.contains("\n       ^"), "{err}");
}

#[test]
fn corpus_lists_canonical_statements() {
    let out = coop(&["corpus"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() >= 22);
    for line in lines {
        let again = coop(&["parse", line]);
        assert_eq!(stdout(&again).trim_end(), line);
    }
}

#[test]
fn unknown_flags_and_missing_subcommands_are_usage_errors() {
    assert_eq!(coop(&["run", "--bogus", "x"]).status.code(), Some(2));
    assert_eq!(coop(&[]).status.code(), Some(2));
    assert_eq!(
        coop(&["run", "x", "--tram", "sometimes"]).status.code(),
        Some(2)
    );
}
