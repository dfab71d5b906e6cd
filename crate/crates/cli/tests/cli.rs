use std::path::PathBuf;
use std::process::{Command, Output};

fn popsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popsim"))
        .args(args)
        .current_dir(workspace())
        .output()
        .expect("binary runs")
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip_while(|l| l.starts_with('#'))
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn majority_run_certifies_the_majority() {
    let o = popsim(&["simulate", "--protocol", "majority", "--n", "256", "--epsilon", "0.25", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][6], "WIN_A");
    assert_eq!(r[0][7], "WIN_A");
    assert_eq!(r[0][3], "7");
}

#[test]
fn minority_side_flag_flips_the_answer() {
    let o = popsim(&["simulate", "--n", "128", "--epsilon", "1/4", "--majority", "b", "--check", "full"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(rows(&stdout(&o))[0][6], "WIN_B");
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["simulate", "--n", "1"][..],
        &["simulate", "--n", "10", "--epsilon", "0.25"],
        &["simulate", "--n", "64"],
        &["simulate", "--protocol", "bogus", "--n", "64"],
        &["simulate", "--protocol", "leader-election", "--n", "64", "--epsilon", "0.5"],
        &["simulate", "--n", "64", "--epsilon", "1/2", "--max-parallel-time", "0"],
        &["simulate", "--n", "64", "--epsilon", "1/2", "--trials", "0"],
        &["sweep", "--n", "64,65", "--epsilon", "1/2"],
        &["analyze", "reach", "--file", "protocols/missing.pp", "--init", "A:1"],
        &["analyze", "reach", "--file", "protocols/fourstate.pp", "--init", "Q:1"],
        &["analyze", "bottlenecks", "--file", "protocols/fourstate.pp", "--init", "A:3", "--f", "n+"],
        &["no-such-command"],
    ] {
        let o = popsim(args);
        assert_eq!(o.status.code(), Some(64), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?} must not run anything");
    }
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(popsim(&["--help"]).status.code(), Some(0));
    assert_eq!(popsim(&["--version"]).status.code(), Some(0));
}

#[test]
fn unanimous_four_state_is_decided_at_once() {
    let o = popsim(&["simulate", "--protocol", "four-state", "--n", "2", "--epsilon", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][4], "0");
    assert_eq!(r[0][6], "WIN_A");
}

#[test]
fn budget_exhaustion_exits_2() {
    let o = popsim(&["simulate", "--n", "256", "--epsilon", "1/8", "--max-parallel-time", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let r = rows(&stdout(&o));
    assert_eq!(r[0][4], "");
    assert_eq!(r[0][6], "none");
}

#[test]
fn clock_only_gap_violation_exits_1() {
    // ρ = 2 is far too small for 64 clocks, so the gap reaches it at once.
    let o = popsim(&["simulate", "--protocol", "phase-clock-only", "--n", "64", "--rho-mult", "0.1", "--tc-frac", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("clock gap@"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"invariant\":\"clock gap\""));
    let ok = popsim(&["simulate", "--protocol", "phase-clock-only", "--n", "64", "--max-parallel-time", "50"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn sweep_shape_and_determinism() {
    let args = ["sweep", "--protocol", "majority", "--n", "32,64", "--epsilon", "1/2,2/n", "--trials", "3", "--seed", "9"];
    let a = popsim(&args);
    let b = popsim(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# popsim sweep v1\n"));
    assert_eq!(rows(&text).len(), 12);
    let summary: Vec<&str> = text.lines().skip_while(|l| *l != "# summary").skip(2).collect();
    assert_eq!(summary.len(), 4);
    assert!(summary[1].starts_with("majority,32,0.0625,3,3,0,0,"));
}

#[test]
fn sweep_rows_replay_through_simulate() {
    let s = popsim(&["sweep", "--protocol", "leader-election", "--n", "64", "--trials", "2", "--seed", "4"]);
    for row in rows(&stdout(&s)) {
        let one = popsim(&["simulate", "--protocol", "leader-election", "--n", "64", "--seed", &row[3]]);
        assert_eq!(rows(&stdout(&one))[0], row);
    }
}

#[test]
fn traces_are_written_as_csv() {
    let dir = std::env::temp_dir().join(format!("popsim-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.csv");
    let out = dir.join("run.json");
    let o = popsim(&[
        "simulate",
        "--protocol",
        "file:protocols/fourstate.pp",
        "--init",
        "A:6,B:3",
        "--format",
        "json",
        "--trace",
        trace.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let steps = report[0]["interactions_run"].as_u64().unwrap();
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next(), Some("step,initiator,responder,before1,before2,after1,after2"));
    assert_eq!(text.lines().count() as u64, steps + 1);
    assert_eq!(report[0]["certificate_output"], "WIN_A");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn reach_and_decisions_reports() {
    let o = popsim(&["analyze", "reach", "--file", "protocols/fourstate.pp", "--init", "A:2,B:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["count"], 3);
    let o = popsim(&["analyze", "decisions", "--file", "protocols/fourstate.pp", "--init", "A:3,B:1"]);
    assert_eq!(json(&o)["stable_decisions"], serde_json::json!(["WIN_A"]));
    let o = popsim(&["analyze", "decisions", "--file", "protocols/fourstate.pp", "--init", "A:1,B:1"]);
    assert_eq!(json(&o)["stable_decisions"], serde_json::json!([]));
    let o = popsim(&["analyze", "reach", "--file", "protocols/fourstate.pp", "--init", "A:6,B:6", "--cap", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn dominance_reports() {
    let o = popsim(&["analyze", "dominance", "--file", "protocols/fourstate.pp", "--n-max", "5"]);
    assert_eq!(json(&o)["holds"], true);
    assert!(json(&o)["counterexample"].is_null());
    let o = popsim(&["analyze", "dominance", "--file", "protocols/flip.pp", "--n-max", "4"]);
    let r = json(&o);
    assert_eq!(r["holds"], false);
    assert_eq!(r["counterexample"]["c_prime"], "Y:2");
    assert_eq!(r["counterexample"]["c_double_prime"], "Z:2");
}

#[test]
fn bottleneck_report_lists_rare_pairs() {
    let o = popsim(&["analyze", "bottlenecks", "--file", "protocols/fourstate.pp", "--init", "A:30,B:20", "--f", "n/4"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["f_at_n"], 12.5);
    for b in r["bottlenecks"].as_array().unwrap() {
        let c = b["counts"].as_array().unwrap();
        assert!(c[0].as_u64().unwrap() * c[1].as_u64().unwrap() <= 12);
    }
}

#[test]
fn generated_ordering_is_validated() {
    let o = popsim(&["analyze", "ordering", "--generate", "--k", "2", "--n", "8", "--count", "5", "--seed", "3"]);
    let r = json(&o);
    assert_eq!(r["instances"], 5);
    let all_valid = r["validated"] == 5;
    assert_eq!(o.status.code(), Some(if all_valid { 0 } else { 1 }));
    for rep in r["reports"].as_array().unwrap() {
        assert!(rep.get("result").is_some() || rep["error"]["kind"] == "invariant");
    }
}

#[test]
fn ordering_names_the_violated_precondition() {
    // A is the majority and never runs out, so y(A) = 0 cannot hold.
    let o = popsim(&["analyze", "ordering", "--file", "protocols/fourstate.pp", "--init", "A:5,B:3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["reports"][0]["error"]["clause"], "y(A) = 0");
    // B is the minority and is exhausted along the trace.
    let o = popsim(&["analyze", "ordering", "--file", "protocols/fourstate.pp", "--init", "A:5,B:3", "--state", "B"]);
    let r = json(&o);
    assert!(!r["reports"][0]["y"].as_str().unwrap().contains("B:"));
}

#[test]
fn clock_gap_telemetry() {
    let o = popsim(&["clock-gap", "--n", "64", "--interactions", "640", "--sample-every", "64", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# popsim clock-gap v1 n=64 rho=34"));
    assert_eq!(rows(&text).len(), 2 * 11);
    let summary: Vec<&str> = text.lines().skip_while(|l| *l != "# summary").skip(2).collect();
    assert_eq!(summary.len(), 2);
}
