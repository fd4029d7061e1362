//! End-to-end runs of the `opacity` binary: exit codes, report formats, and
//! agreement with the library.

use std::io::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use opacity::corpus::{entries, fig5, names};
use opacity_cli::format::parse_history;
use opacity_cli::report::{FuzzReport, Report};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opacity"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be UTF-8")
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    assert_eq!(code(&run(&["check", "--criterion", "du-opacity", "corpus:fig4"])), 1);
    assert_eq!(code(&run(&["check", "--criterion", "opacity", "corpus:fig4"])), 0);
    assert_eq!(code(&run(&["check", "--criterion", "final-state", "corpus:fig3_prefix"])), 1);
}

#[test]
fn opacity_check_prints_a_per_prefix_table() {
    let out = run(&["check", "--criterion", "opacity", "corpus:fig4"]);
    let text = stdout(&out);
    for i in 0..=10 {
        assert!(text.contains(&format!("prefix {i:>2}: satisfied")), "missing prefix {i}:\n{text}");
    }
    let out = run(&["check", "--criterion", "opacity", "corpus:fig3_full"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("prefix 4: refuted"), "{}", stdout(&out));
}

#[test]
fn witness_flag_gates_the_text_witness() {
    let plain = stdout(&run(&["check", "--criterion", "du-opacity", "corpus:fig1"]));
    assert!(!plain.contains("order:"), "{plain}");
    let with = stdout(&run(&["check", "--criterion", "du-opacity", "--witness", "corpus:fig1"]));
    assert!(with.contains("order: T2,T3,T1,T4"), "{with}");
}

#[test]
fn pending_commits_render_in_the_witness() {
    let text = stdout(&run(&["check", "--criterion", "du-opacity", "--witness", "corpus:fig2_3"]));
    assert!(text.contains("commits: {T1:C}"), "{text}");
}

#[test]
fn verify_accepts_the_published_serialization() {
    let out = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T2,T3,T1,T4", "corpus:fig1",
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict: valid"), "{}", stdout(&out));
}

#[test]
fn verify_rejects_a_bad_order_with_violations() {
    let out = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T1,T2,T3,T4", "corpus:fig1",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("violation:"), "{}", stdout(&out));
}

#[test]
fn verify_with_commit_decisions() {
    let valid = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T3,T4,T5,T1,T2",
        "--commits", "T1:C", "corpus:fig2_3",
    ]);
    assert_eq!(code(&valid), 0, "{}", stderr(&valid));
    let invalid = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T3,T4,T5,T1,T2",
        "--commits", "T1:A", "corpus:fig2_3",
    ]);
    assert_eq!(code(&invalid), 1);
}

#[test]
fn malformed_witnesses_are_input_errors() {
    // A duplicated transaction.
    let out = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T1,T1,T2,T3", "corpus:fig1",
    ]);
    assert_eq!(code(&out), 2);
    // A decision for a transaction that is not commit-pending.
    let out = run(&[
        "verify", "--criterion", "du-opacity", "--order", "T2,T3,T1,T4",
        "--commits", "T1:C", "corpus:fig1",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_under_opacity_is_a_usage_error() {
    let out = run(&["verify", "--criterion", "opacity", "--order", "T1", "corpus:fig1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn json_reports_round_trip() {
    for args in [
        ["check", "--criterion", "du-opacity", "--json", "corpus:fig1"].as_slice(),
        ["check", "--criterion", "opacity", "--json", "corpus:fig3_full"].as_slice(),
        ["check", "--criterion", "tms2", "--json", "corpus:fig6"].as_slice(),
        ["prefixes", "--criterion", "du-opacity", "--json", "corpus:fig2_3"].as_slice(),
        ["verify", "--criterion", "du-opacity", "--order", "T2,T3,T1,T4", "--json",
         "corpus:fig1"].as_slice(),
    ] {
        let out = run(args);
        let report: Report = serde_json::from_str(&stdout(&out)).expect("stdout should be a report");
        let again: Report =
            serde_json::from_str(&serde_json::to_string(&report).expect("report should serialize"))
                .expect("report should re-parse");
        assert_eq!(report, again, "round-trip changed the report for {args:?}");
        assert_eq!(report.satisfied, code(&out) == 0);
    }
}

#[test]
fn json_report_carries_the_witness_unconditionally() {
    let out = run(&["check", "--criterion", "du-opacity", "--json", "corpus:fig1"]);
    let report: Report = serde_json::from_str(&stdout(&out)).expect("stdout should be a report");
    assert_eq!(report.input, "corpus:fig1");
    assert_eq!(report.criterion, "du-opacity");
    let w = report.witness.expect("satisfied run should carry a witness");
    assert_eq!(w.order, vec!["T2", "T3", "T1", "T4"]);
    assert!(w.commits.is_empty());
}

#[test]
fn prefixes_agrees_with_check() {
    let mut inputs: Vec<String> = names().iter().map(|n| format!("corpus:{n}")).collect();
    inputs.push("corpus:fig2_0".to_string());
    for input in &inputs {
        let check = code(&run(&["check", "--criterion", "du-opacity", input]));
        let prefixes = code(&run(&["prefixes", "--criterion", "du-opacity", input]));
        assert_eq!(check, prefixes, "verdicts diverge on {input}");
    }
}

#[test]
fn prefixes_under_final_state_matches_the_opacity_check() {
    let by_prefixes = run(&["prefixes", "--criterion", "final-state", "--json", "corpus:fig3_full"]);
    let by_check = run(&["check", "--criterion", "opacity", "--json", "corpus:fig3_full"]);
    let a: Report = serde_json::from_str(&stdout(&by_prefixes)).expect("report");
    let b: Report = serde_json::from_str(&stdout(&by_check)).expect("report");
    assert_eq!(a.prefix_failures, b.prefix_failures);
    assert_eq!(a.satisfied, b.satisfied);
    assert_eq!(a.witness, b.witness);
}

#[test]
fn file_inputs_parse_and_decide() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("fig5.txt");
    let mut f = std::fs::File::create(&path).expect("create");
    write!(f, "{}", fig5()).expect("write");
    drop(f);
    let out = run(&["check", "--criterion", "du-opacity", path.to_str().expect("utf-8 path")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn parse_errors_point_at_the_line() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "res T1 read 1\n").expect("write");
    let out = run(&["check", "--criterion", "du-opacity", path.to_str().expect("utf-8 path")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains(":1:5:"), "{}", stderr(&out));
}

#[test]
fn missing_files_and_unknown_corpus_names_are_input_errors() {
    assert_eq!(code(&run(&["check", "--criterion", "du-opacity", "/no/such/file"])), 2);
    assert_eq!(code(&run(&["check", "--criterion", "du-opacity", "corpus:fig9"])), 2);
    assert_eq!(code(&run(&["corpus", "fig9"])), 2);
}

#[test]
fn ghs_requires_a_sequential_history() {
    let out = run(&["check", "--criterion", "ghs", "corpus:fig1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sequential"), "{}", stderr(&out));
    let out = run(&["verify", "--criterion", "ghs", "--order", "T2,T3,T1,T4", "corpus:fig1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exhausted_budgets_are_errors_not_verdicts() {
    let out = run(&["check", "--criterion", "du-opacity", "--budget", "1", "corpus:fig1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn corpus_listing_matches_the_library() {
    let text = stdout(&run(&["corpus"]));
    let listed: Vec<&str> = text.lines().collect();
    assert_eq!(listed, names());
}

#[test]
fn corpus_output_round_trips() {
    for name in names() {
        let out = run(&["corpus", name]);
        let parsed = parse_history(&stdout(&out)).expect("corpus output should parse");
        let direct = entries().into_iter().find(|e| e.name == name).expect("known name").history;
        assert_eq!(parsed, direct, "{name} does not round-trip through the binary");
    }
}

#[test]
fn shipped_corpus_files_match_the_constructors() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    for e in entries() {
        let path = dir.join(format!("{}.txt", e.name));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|_| panic!("missing corpus file {}", path.display()));
        let parsed = parse_history(&text).expect("shipped corpus file should parse");
        assert_eq!(parsed, e.history, "{} diverges from its shipped text", e.name);
    }
}

#[test]
fn fuzz_is_deterministic_and_clean() {
    let args = ["fuzz", "--seed", "11", "--count", "30"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn fuzz_json_reports_the_counters() {
    let out = run(&[
        "fuzz", "--seed", "5", "--count", "25", "--json",
        "--config", "txn_count=4,value_mode=unique-writes",
    ]);
    assert_eq!(code(&out), 0);
    let report: FuzzReport = serde_json::from_str(&stdout(&out)).expect("fuzz report");
    assert_eq!((report.seed, report.count), (5, 25));
    assert_eq!(report.unique_writes, 25);
    assert!(report.required_zero.values().all(|&n| n == 0));
    assert!(!report.violation);
}

#[test]
fn bad_fuzz_configs_are_usage_errors() {
    for config in ["txns=4", "txn_count=many", "value_mode=both", "abort_probability=1.5"] {
        let out = run(&["fuzz", "--config", config, "--count", "1"]);
        assert_eq!(code(&out), 2, "config {config:?} should be rejected: {}", stderr(&out));
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["check", "--criterion", "nonsense", "corpus:fig1"])), 2);
    assert_eq!(code(&run(&["check", "corpus:fig1"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}
