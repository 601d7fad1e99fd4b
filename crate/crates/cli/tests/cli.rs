//! End-to-end runs of the `lamd` binary: frozen output lines and exit codes
//! for every subcommand, including the usage and undecided paths.

use std::process::Command;

/// Runs the binary and returns (exit code, stdout, stderr).
fn lamd(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lamd"))
        .args(args)
        .output()
        .expect("the lamd binary runs");
    (
        out.status.code().expect("exited normally"),
        String::from_utf8(out.stdout).expect("stdout is utf-8"),
        String::from_utf8(out.stderr).expect("stderr is utf-8"),
    )
}

#[test]
fn parse_prints_the_term_back() {
    let (code, out, _) = lamd(&["parse", r"(\y. \x. v) s t"]);
    assert_eq!(code, 0);
    assert_eq!(out, "(\\y. \\x. v) s t\n");
}

#[test]
fn parse_error_is_a_usage_error() {
    let (code, out, err) = lamd(&["parse", r"(\x. x"]);
    assert_eq!(code, 2);
    assert_eq!(out, "");
    assert!(err.contains("parse error"), "stderr: {err}");
}

#[test]
fn canon_reaches_the_nested_form() {
    let (code, out, _) = lamd(&["canon", r"(\y. \x. v) s t"]);
    assert_eq!(code, 0);
    assert_eq!(out, "(\\y. (\\x. v) t) s\n");
}

#[test]
fn canon_reads_the_term_from_a_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("term.txt");
    std::fs::write(&path, "(\\y. \\x. v) s t\n").expect("write");
    let (code, out, _) = lamd(&["canon", "--file", path.to_str().expect("utf-8 path")]);
    assert_eq!(code, 0);
    assert_eq!(out, "(\\y. (\\x. v) t) s\n");
}

#[test]
fn spine_lists_word_pairs_counts_and_environment() {
    let (code, out, _) = lamd(&["spine", r"(\y. \x. v) s t"]);
    assert_eq!(code, 0);
    let expected = "\
arg t
arg s
abs y
abs x
head v
pair 0 3
pair 1 2
counts 0 0 2
env t/x, s/y
";
    assert_eq!(out, expected);
}

#[test]
fn equiv_sigma_accepts_the_swapped_pairs() {
    let (code, out, _) = lamd(&[
        "equiv",
        r"(\y. \x. v) s t",
        r"(\x. \y. v) t s",
        "--rel",
        "sigma",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "true\n");
}

#[test]
fn equiv_deep_e_rejects_the_swapped_pairs() {
    let (code, out, _) = lamd(&[
        "equiv",
        r"(\y. \x. v) s t",
        r"(\x. \y. v) t s",
        "--rel",
        "deep-e",
    ]);
    assert_eq!(code, 1);
    assert_eq!(out, "false\n");
}

#[test]
fn equiv_alpha_accepts_renamed_binders() {
    let (code, out, _) = lamd(&["equiv", r"\x. x y", r"\z. z y", "--rel", "alpha"]);
    assert_eq!(code, 0);
    assert_eq!(out, "true\n");
}

#[test]
fn equiv_reads_both_terms_from_a_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("pair.txt");
    std::fs::write(&path, "(\\y. \\x. v) s t\n(\\y. (\\x. v) t) s\n").expect("write");
    let (code, out, _) = lamd(&[
        "equiv",
        "--rel",
        "surface-e",
        "--file",
        path.to_str().expect("utf-8 path"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "true\n");
}

#[test]
fn reduce_prints_the_normal_form() {
    let (code, out, _) = lamd(&["reduce", r"(\x. x x) (\y. y)"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().last().expect("a final line"), "\\y#3. y#3");
}

#[test]
fn reduce_trace_steps_reparse_and_number_from_one() {
    let (code, out, _) = lamd(&["reduce", r"(\x. x x) (\y. y)", "--trace"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines.len() >= 3, "expected steps plus a final term: {out}");
    for (i, line) in lines[..lines.len() - 1].iter().enumerate() {
        let prefix = format!("step {} ", i + 1);
        assert!(line.starts_with(&prefix), "line {i}: {line}");
        assert!(line.contains(" @ "), "line {i} lacks a path: {line}");
        let (_, term) = line.split_once(": ").expect("step line has a term");
        let (pcode, pout, _) = lamd(&["parse", term]);
        assert_eq!(pcode, 0, "step term does not reparse: {term}");
        assert_eq!(pout.trim_end(), term, "step term is not in display syntax");
    }
}

#[test]
fn reduce_fuel_exhaustion_prints_the_reached_term_and_exits_three() {
    let (code, out, err) = lamd(&["reduce", r"(\x. x x) (\x. x x)", "--fuel", "10"]);
    assert_eq!(code, 3);
    assert!(err.contains("fuel exhausted"), "stderr: {err}");
    let reached = out.trim_end();
    let (pcode, _, _) = lamd(&["parse", reached]);
    assert_eq!(pcode, 0, "reached term does not reparse: {reached}");
}

#[test]
fn reduce_without_a_term_is_a_usage_error() {
    let (code, _, err) = lamd(&["reduce", "--rule", "beta"]);
    assert_eq!(code, 2);
    assert!(err.contains("no term given"), "stderr: {err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, _) = lamd(&["canon", "--nope", "x"]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_rule_is_a_usage_error() {
    let (code, _, _) = lamd(&["reduce", "x", "--rule", "zeta"]);
    assert_eq!(code, 2);
}

#[test]
fn typecheck_infers_an_arrow() {
    let (code, out, _) = lamd(&["typecheck", r"\x:o. x"]);
    assert_eq!(code, 0);
    assert_eq!(out, "o -> o\n");
}

#[test]
fn typecheck_uses_the_context() {
    let (code, out, _) = lamd(&["typecheck", "f y", "--ctx", "y:o, f:o -> o"]);
    assert_eq!(code, 0);
    assert_eq!(out, "o\n");
}

#[test]
fn typecheck_unbound_variable_exits_one() {
    let (code, _, err) = lamd(&["typecheck", "x"]);
    assert_eq!(code, 1);
    assert!(err.contains("unbound"), "stderr: {err}");
}

#[test]
fn measure_golden_values() {
    let (code, out, _) = lamd(&["measure", r"\x:o. x"]);
    assert_eq!(code, 0);
    assert_eq!(out, "2\n");
    let (code, out, _) = lamd(&["measure", r"(\x:o. x) y", "--ctx", "y:o"]);
    assert_eq!(code, 0);
    assert_eq!(out, "4\n");
    let (code, out, _) = lamd(&["measure", "y", "--ctx", "y:o"]);
    assert_eq!(code, 0);
    assert_eq!(out, "1\n");
}

#[test]
fn measure_trace_is_strictly_decreasing() {
    let (code, out, _) = lamd(&[
        "measure",
        r"(\f:o -> o. \x:o. f (f x)) (\z:o. z) y",
        "--ctx",
        "y:o",
        "--trace",
    ]);
    assert_eq!(code, 0);
    let mus: Vec<u64> = out
        .lines()
        .map(|line| {
            let (mu, _) = line.split_once('\t').expect("mu<TAB>term");
            mu.parse().expect("mu is a number")
        })
        .collect();
    assert!(mus.len() >= 3, "expected several states: {out}");
    assert!(
        mus.windows(2).all(|w| w[0] > w[1]),
        "not decreasing: {mus:?}"
    );
    assert_eq!(
        *mus.last().expect("nonempty"),
        1,
        "normal form y has measure 1"
    );
}

#[test]
fn check_reports_a_summary_line() {
    let (code, out, _) = lamd(&[
        "check",
        "--suite",
        "parse-print",
        "--seed",
        "1",
        "--count",
        "5",
        "--max-size",
        "10",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "parse-print: 5 passed, 0 failed\n");
}

#[test]
fn check_unknown_suite_is_a_usage_error() {
    let (code, _, err) = lamd(&["check", "--suite", "no-such-suite", "--count", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("no such suite"), "stderr: {err}");
    assert!(
        err.contains("parse-print"),
        "stderr should list known names: {err}"
    );
}

#[test]
fn check_list_names_every_suite() {
    let (code, out, _) = lamd(&["check", "--list"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = out.lines().collect();
    assert_eq!(names.len(), 26);
    for needed in [
        "parse-print",
        "canonical-uniqueness",
        "measure-decrease",
        "trace-hygiene",
    ] {
        assert!(names.contains(&needed), "missing {needed}: {names:?}");
    }
}

#[test]
fn version_and_help_exit_zero() {
    let (code, out, _) = lamd(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("lamd "), "version line: {out}");
    let (code, out, _) = lamd(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"), "help text: {out}");
}
