//! End-to-end tests against the built binary: exit codes, pinned
//! outputs, determinism, and the operation coverage table.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn seprank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seprank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn seprank_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_seprank"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().expect("binary finishes")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

const ANTICHAIN: &str = r#"{"kind":"omega-join","rule":{"kind":"constant","child":{"kind":"single"}}}"#;
const NIH: &str = r#"{"kind":"node-indicators-by-h"}"#;

#[test]
fn chain_of_three_ranks_three() {
    let out = seprank(&["rank-tree", r#"{"kind":"chain","len":3}"#]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn finite_trees_rank_by_derivative_count() {
    let out = seprank(&["rank-tree", r#"{"nodes":[[],[0],[0,0]]}"#]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn stdin_is_read_when_no_input_argument() {
    let out = seprank_stdin(&["rank-tree"], r#"{"kind":"chain","len":3}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3\n");
}

#[test]
fn malformed_json_exits_two() {
    let out = seprank(&["rank-tree", r#"{"kind":"#]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("\"error\":\"usage\""));
}

#[test]
fn unknown_subcommands_exit_two() {
    let out = seprank(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_machine_readable_code() {
    let out = seprank(&["rank-tree", r#"{"kind":"full-branch"}"#]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_str(stderr(&out).trim()).expect("error JSON");
    assert_eq!(err["error"], "not-well-founded");
    assert!(err["detail"].is_string());
}

#[test]
fn conflicting_flags_exit_two() {
    let out = seprank(&[
        "converge",
        "--seq",
        NIH,
        "--codes",
        r#"{"kind":"all"}"#,
        "--refine",
        "--limit",
        r#"{"kind":"zero"}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn selftest_is_byte_identical_for_equal_seeds() {
    let args = ["selftest", "--suite", "p1", "--samples", "20", "--seed", "7"];
    let first = seprank(&args);
    let second = seprank(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn selftest_prints_the_seed_it_used() {
    let out = seprank(&["selftest", "--suite", "p1", "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("seed 7\n"), "got: {text}");
    assert!(text.trim_end().ends_with("passed 3/3"));
}

#[test]
fn json_output_is_versioned() {
    let out = seprank(&[
        "--format",
        "json",
        "rank-tree",
        r#"{"kind":"chain","len":3}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).expect("JSON output");
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["rank"]["display"], "3");
    assert_eq!(v["wellfounded"], true);
}

#[test]
fn image_of_the_zero_branch_begins_eight_sixteen() {
    let out = seprank(&[
        "reduce",
        "h-image",
        "--point",
        r#"{"prefix":"","period":"0"}"#,
        "--count",
        "4",
        "--recover",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("8 16 32 64\n"), "got: {text}");
    assert!(text.contains("recovered prefix: \"000\""));
}

#[test]
fn exchange_holds_for_a_single_admissible_pair() {
    let out = seprank(&[
        "reduce",
        "verify-p1",
        "--point",
        r#"{"prefix":"","period":"01"}"#,
        "--set",
        r#"{"kind":"not","inner":{"kind":"eventually-constant"}}"#,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "true\n");
}

#[test]
fn node_families_over_antichains_converge_to_zero() {
    let codes = format!(r#"{{"kind":"node-set","tree":{ANTICHAIN}}}"#);
    let out = seprank(&[
        "--format",
        "json",
        "converge",
        "--seq",
        NIH,
        "--codes",
        &codes,
        "--oracle-depth",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["verdict"]["verdict"], "converges");
    assert_eq!(v["verdict"]["limit"]["kind"], "zero");
    assert_eq!(v["oracle"]["agrees"], true);
}

#[test]
fn truncations_stay_within_caps() {
    let codes = format!(r#"{{"kind":"node-set","tree":{ANTICHAIN}}}"#);
    let out = seprank(&[
        "--format",
        "json",
        "lf-tree",
        "--kind",
        "T",
        "--seq",
        NIH,
        "--codes",
        &codes,
        "--d",
        "1",
        "--depth",
        "3",
        "--caps",
        r#"{"index_count":5,"max_ball_word":4,"extra_blocks":[],"node_budget":50000}"#,
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(v["height"], 4);
    assert_eq!(v["rank"]["display"], "4");
    assert!(v["nodes"].as_u64().unwrap() <= 50_000);
}

#[test]
fn nonpositive_caps_are_rejected_as_usage() {
    let codes = format!(r#"{{"kind":"node-set","tree":{ANTICHAIN}}}"#);
    let out = seprank(&[
        "lf-tree",
        "--kind",
        "T",
        "--seq",
        NIH,
        "--codes",
        &codes,
        "--caps",
        r#"{"index_count":0,"max_ball_word":1,"extra_blocks":[],"node_budget":1}"#,
    ]);
    assert_eq!(out.status.code(), Some(2));
}

/// Library operations that must each be reachable through exactly one
/// documented invocation. The binary prints its own table; here it is
/// checked for totality, uniqueness, and valid subcommand heads.
const REQUIRED_OPS: &[&str] = &[
    "Ordinal::add",
    "Ordinal::cmp",
    "Ordinal::sup_plus_one",
    "FinTree::rank",
    "FinTree::derivative",
    "TreeSchema::rank",
    "TreeSchema::is_wellfounded",
    "TreeSchema::konig_branch",
    "find_monotone_map",
    "MonotoneMap::verify",
    "Point::cmp",
    "ClopenSet::algebra",
    "word_code",
    "word_from_code",
    "IndexSet::enumerate",
    "SymbolicFn::eval",
    "diff_region",
    "region_covers",
    "alpha_on",
    "alpha_full",
    "sep_derivative",
    "restrict_ball",
    "build_rank_example",
    "alpha_bruteforce",
    "find_attaining_sub",
    "point_death_stage",
    "decide_convergence",
    "decide_convergence_to",
    "refine_to_convergent",
    "tree_representation",
    "verify_verdict",
    "truncate_tree",
    "block_member",
    "limit_member",
    "glued_block_member",
    "glued_limit_member",
    "glued_rank",
    "branch_witness",
    "monotone_reduction",
    "phi_map",
    "h_image",
    "recovered_prefix",
    "restrict_family",
    "verify_p1",
    "psi_glue",
    "run_all",
    "p1_cases",
];

#[test]
fn every_operation_is_covered_by_one_invocation() {
    let out = seprank(&["--format", "json", "selftest", "--suite", "coverage"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let table = v["operations"].as_array().expect("operations array");

    let subcommands = [
        "rank-tree", "alpha", "eval", "converge", "lf-tree", "reduce", "selftest",
    ];
    let mut seen = std::collections::BTreeSet::new();
    for row in table {
        let op = row["op"].as_str().expect("op name");
        let path = row["path"].as_str().expect("path");
        assert!(seen.insert(op.to_string()), "operation {op} listed twice");
        let head = path.split_whitespace().next().unwrap();
        assert!(
            subcommands.contains(&head),
            "path {path} does not start with a subcommand"
        );
    }
    for op in REQUIRED_OPS {
        assert!(seen.contains(*op), "operation {op} missing from the table");
    }
    assert_eq!(seen.len(), REQUIRED_OPS.len(), "unexpected extra operations");

    // Every subcommand used by the table answers --help.
    for sub in subcommands {
        let out = seprank(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub} --help failed");
    }
}
