//! End-to-end tests of the binary: exit codes, output formats and the JSON
//! round-trip contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ODD: &str = "S -> a S a | a\n";
const SINGLE: &str = "S -> a\n";
const EMPTY: &str = "S -> S\n";
const ODD_WITNESS: &str = "b: 3\npi: affine q=2\n";
const BAD_WITNESS: &str = "b: 3\npi: affine q=1\n";

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        for (name, content) in [
            ("odd.g", ODD),
            ("single.g", SINGLE),
            ("empty.g", EMPTY),
            ("odd.witness", ODD_WITNESS),
            ("bad.witness", BAD_WITNESS),
        ] {
            std::fs::write(dir.path().join(name), content).expect("write fixture");
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unareg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(args: &[&str], paths: &[&Path]) -> Output {
    let mut all: Vec<String> = Vec::new();
    let mut path_iter = paths.iter();
    for a in args {
        if *a == "{}" {
            all.push(path_iter.next().expect("path").display().to_string());
        } else {
            all.push(a.to_string());
        }
    }
    Command::new(env!("CARGO_BIN_EXE_unareg"))
        .args(&all)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn regularize_odd_grammar() {
    let fx = Fixture::new();
    let out = run_in(&["regularize", "{}", "--b", "3"], &[&fx.path("odd.g")]);
    assert_eq!(exit(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("regex       = a(aa)*"), "{text}");
    assert!(text.contains("<1,(2)>"), "{text}");
    assert!(text.contains("0 mismatches"), "{text}");
}

#[test]
fn regularize_empty_language() {
    let fx = Fixture::new();
    let out = run_in(&["regularize", "{}"], &[&fx.path("empty.g")]);
    assert_eq!(exit(&out), 0);
    assert!(stdout(&out).contains("regex       = ∅"));
}

#[test]
fn regularize_missing_file_is_input_error() {
    let out = run(&["regularize", "/nonexistent/grammar.g"]);
    assert_eq!(exit(&out), 2);
}

#[test]
fn malformed_grammar_is_input_error() {
    let fx = Fixture::new();
    std::fs::write(fx.path("bad.g"), "S -> a b\n").unwrap();
    let out = run_in(&["regularize", "{}"], &[&fx.path("bad.g")]);
    assert_eq!(exit(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("unknown terminal 'b'"), "{err}");
}

#[test]
fn json_output_round_trips_and_is_deterministic() {
    let fx = Fixture::new();
    let args = ["regularize", "{}", "--b", "3", "--json"];
    let first = run_in(&args, &[&fx.path("odd.g")]);
    assert_eq!(exit(&first), 0);
    let text = stdout(&first);

    // Parse and re-serialize: byte-identical.
    let value: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    let reserialized = serde_json::to_string_pretty(&value).expect("serializes");
    assert_eq!(
        text.trim_end(),
        reserialized,
        "round trip must be byte-identical"
    );

    // Stable fields.
    assert_eq!(value["b"], 3);
    assert_eq!(value["regex"], "a(aa)*");
    assert_eq!(value["low"], serde_json::json!([1]));
    assert_eq!(value["tuples"], serde_json::json!([{"p_h": 1, "qs": [2]}]));
    assert_eq!(value["eps"]["period"], 2);
    assert_eq!(value["dfa"]["accepting"], serde_json::json!([1]));
    assert_eq!(
        value["semilinear"]["components"],
        serde_json::json!([{"offset": 1, "periods": [2]}])
    );
    assert_eq!(value["verification"]["mismatches"], serde_json::json!([]));
    assert_eq!(value["verification"]["pi_mode"], "lineage");

    // Determinism: a second run emits identical bytes.
    let second = run_in(&args, &[&fx.path("odd.g")]);
    assert_eq!(stdout(&second), text);
}

#[test]
fn pump_with_witness_prints_the_descent() {
    let fx = Fixture::new();
    let out = run_in(
        &["pump", "{}", "--witness", "{}", "--length", "9"],
        &[&fx.path("odd.g"), &fx.path("odd.witness")],
    );
    assert_eq!(exit(&out), 0, "{out:?}");
    let text = stdout(&out);
    for needle in [
        "step 0: p = 7, q = 2",
        "step 1: p = 5, q = 2",
        "step 2: p = 3, q = 2",
        "step 3: p = 1, q = 2",
        "residual p_h = 1",
        "tuple: <1,(2)> with multiplicities [4]",
    ] {
        assert!(text.contains(needle), "missing '{needle}' in:\n{text}");
    }
}

#[test]
fn pump_guards_exit_with_input_error() {
    let fx = Fixture::new();
    // Not in the language.
    let out = run_in(
        &["pump", "{}", "--b", "3", "--length", "2"],
        &[&fx.path("odd.g")],
    );
    assert_eq!(exit(&out), 2);
    // Below the constant.
    let out = run_in(
        &["pump", "{}", "--b", "3", "--length", "1"],
        &[&fx.path("odd.g")],
    );
    assert_eq!(exit(&out), 2);
}

#[test]
fn family_command_lists_canonical_tuples() {
    let out = run(&["family", "--b", "1"]);
    assert_eq!(exit(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("<0,(1)>"));
    assert!(text.contains("count = 1"));

    let out = run(&["family", "--b", "2"]);
    assert!(stdout(&out).contains("count = 6"));

    let out = run(&["family", "--b", "0"]);
    assert_eq!(exit(&out), 2);
}

#[test]
fn member_command_prints_boolean() {
    let fx = Fixture::new();
    let out = run_in(&["member", "{}", "--length", "4"], &[&fx.path("odd.g")]);
    assert_eq!(exit(&out), 0);
    assert_eq!(stdout(&out).trim(), "false");

    let out = run_in(&["member", "{}", "--length", "3"], &[&fx.path("odd.g")]);
    assert_eq!(stdout(&out).trim(), "true");
}

#[test]
fn verify_agrees_on_sound_input() {
    let fx = Fixture::new();
    let out = run_in(&["verify", "{}"], &[&fx.path("odd.g")]);
    assert_eq!(exit(&out), 0, "{out:?}");
    assert!(stdout(&out).contains("0 mismatches"));
}

#[test]
fn unsound_witness_yields_mismatch_exit() {
    // b = 3 passes the bounded pumping check for the odd language, but the
    // affine split q = 1 walks outside it; the descents produce tuples the
    // filter discards, coverage is lost, and verification reports it.
    let fx = Fixture::new();
    let out = run_in(
        &["verify", "{}", "--witness", "{}"],
        &[&fx.path("odd.g"), &fx.path("bad.witness")],
    );
    assert_eq!(exit(&out), 1, "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("mismatches"), "{text}");

    // The same run with the filter off keeps the unsound tuple and still
    // reports the disagreement.
    let out = run_in(
        &["verify", "{}", "--witness", "{}", "--no-filter"],
        &[&fx.path("odd.g"), &fx.path("bad.witness")],
    );
    assert_eq!(exit(&out), 1, "{out:?}");
}

#[test]
fn witness_constant_must_survive_the_pumping_check() {
    let fx = Fixture::new();
    std::fs::write(fx.path("b1.witness"), "b: 1\npi: affine q=1\n").unwrap();
    let out = run_in(
        &["verify", "{}", "--witness", "{}"],
        &[&fx.path("odd.g"), &fx.path("b1.witness")],
    );
    assert_eq!(exit(&out), 2, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("pumping property fails"), "{err}");
}

#[test]
fn user_constant_must_survive_the_pumping_check() {
    let fx = Fixture::new();
    let out = run_in(&["regularize", "{}", "--b", "1"], &[&fx.path("odd.g")]);
    assert_eq!(exit(&out), 2, "{out:?}");
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("pumping property fails"), "{err}");
}

#[test]
fn batch_processes_a_directory() {
    let fx = Fixture::new();
    let dir = fx.dir.path().join("batch");
    std::fs::create_dir(&dir).unwrap();
    std::fs::write(dir.join("odd.g"), ODD).unwrap();
    std::fs::write(dir.join("single.g"), SINGLE).unwrap();
    let out = run_in(&["regularize", "--batch", "{}"], &[&dir]);
    assert_eq!(exit(&out), 0, "{out:?}");
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.contains("odd.g") && text.contains("single.g"));
    assert!(text.lines().all(|l| l.contains("verified")), "{text}");

    // A directory with a broken file is an input error overall.
    std::fs::write(dir.join("broken.g"), "S -> a b\n").unwrap();
    let out = run_in(&["regularize", "--batch", "{}"], &[&dir]);
    assert_eq!(exit(&out), 2);
}

#[test]
fn tuples_command_shows_filter_outcomes() {
    let fx = Fixture::new();
    let out = run_in(
        &["tuples", "{}", "--witness", "{}"],
        &[&fx.path("odd.g"), &fx.path("bad.witness")],
    );
    // The q = 1 witness generates <2,(1)>, which escapes at 4.
    assert_eq!(exit(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("<2,(1)>"), "{text}");
    assert!(text.contains("escapes the language at 4"), "{text}");

    let out = run_in(&["tuples", "{}", "--b", "3"], &[&fx.path("odd.g")]);
    assert_eq!(exit(&out), 0);
    assert!(stdout(&out).contains("<1,(2)>"));
}
