use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sievekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let v: Value = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (v, out.status.code().unwrap())
}

fn without_elapsed(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn decompose_finds_the_witness() {
    let (v, code) = json(&["decompose", "--set", "0,1,2,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["decomposable"], true);
    assert_eq!(v["result"]["witness"], serde_json::json!([[0, 1], [0, 2]]));
    assert_eq!(v["diagnostics"]["witness_verified"], true);
}

#[test]
fn indecomposable_set_is_not_an_error() {
    let (v, code) = json(&["decompose", "--set", "0,1,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["decomposable"], false);
}

#[test]
fn smooth_count_matches_enumeration() {
    let (v, code) = json(&["smooth-count", "--x", "100", "--y", "3"]);
    assert_eq!(code, 0);
    let direct = (1u64..=100)
        .filter(|&n| {
            let mut m = n;
            for p in [2, 3] {
                while m % p == 0 {
                    m /= p;
                }
            }
            m == 1
        })
        .count();
    assert_eq!(direct, 20);
    assert_eq!(v["result"]["count"], 20);
    assert_eq!(v["params"]["x"], 100);
    assert_eq!(v["params"]["y"], 3);
}

#[test]
fn ruzsa_small_case() {
    let (v, code) = json(&["ruzsa", "--a", "0,1", "--b", "0,1", "--c", "0,1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["lhs"], 16);
    assert_eq!(v["result"]["rhs"], 27);
    assert_eq!(v["result"]["holds"], true);
}

#[test]
fn report_has_the_fixed_schema() {
    let (v, _) = json(&["primes", "--hi", "100"]);
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in [
        "schema",
        "command",
        "params",
        "profile",
        "result",
        "diagnostics",
        "elapsed_ms",
    ] {
        assert!(keys.contains(&k), "missing {k}");
    }
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "primes");
    assert_eq!(v["profile"], "strict");
    assert_eq!(v["result"]["count"], 25);
}

#[test]
fn same_seed_gives_identical_reports() {
    for args in [
        &[
            "semigroup",
            "--select",
            "ap:1,4",
            "--x",
            "100000",
            "--hypotheses",
        ][..],
        &[
            "sieve-bound",
            "--method",
            "selberg",
            "--set",
            "1..3000",
            "--shifts",
            "0,2",
            "--select",
            "min:2.5",
            "--q",
            "6",
            "--exact",
        ],
        &["verify-all", "--seed", "11", "--budget-ms", "600000"],
    ] {
        let (a, _) = json(args);
        let (b, _) = json(args);
        assert_eq!(without_elapsed(a), without_elapsed(b), "{args:?}");
    }
}

#[test]
fn zero_budget_verify_is_empty() {
    let (v, code) = json(&["verify-all", "--budget-ms", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["invariants"], serde_json::json!([]));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (v, code) = json(&["smooth-count", "--x", "10", "--y", "2", "--bogus"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn capacity_errors_are_reported() {
    let (v, code) = json(&["smooth-count", "--x", "100000000000", "--y", "3"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "capacity");
}

#[test]
fn domain_errors_are_reported() {
    let (v, code) = json(&["dickman", "--u", "600"]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["kind"], "domain");
}

#[test]
fn strict_profile_reports_no_sieving_primes() {
    let mut f = tempfile();
    for n in (1..=9999u64).step_by(2) {
        writeln!(f.1, "{n}").unwrap();
    }
    f.1.flush().unwrap();
    let arg = format!("@{}", f.0);
    let (v, code) = json(&[
        "check-genthm",
        "--set",
        &arg,
        "--select",
        "set:2",
        "--profile",
        "strict",
    ]);
    assert_eq!(code, 2, "{v}");
    assert_eq!(v["profile"], "strict");
    assert_eq!(v["result"]["verdict"], "no_sieving_primes");
    assert_eq!(v["result"]["context"]["ps_star_size_up_to_sqrt_x"], 0);
    assert_eq!(v["params"]["set"].as_array().unwrap().len(), 5000);
}

#[test]
fn hypothesis_failure_exits_two() {
    // the larger sieve needs Σ log p / ν(p) > log N; a full interval occupies every class
    let (v, code) = json(&[
        "sieve-bound",
        "--method",
        "larger",
        "--set",
        "1..500",
        "--select",
        "interval:1,50",
    ]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["valid"], false);
}

#[test]
fn csv_has_a_header_row() {
    let out = run(&[
        "dickman", "--from", "0", "--to", "2", "--step", "1", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u,rho");
    assert_eq!(lines[1], "0.0,1.0");
    assert_eq!(lines.len(), 4);
}

#[test]
fn config_file_supplies_flags_and_is_echoed() {
    let mut f = tempfile();
    writeln!(f.1, "# smooth numbers\ncommand=smooth-count\nx=100\ny=5").unwrap();
    f.1.flush().unwrap();
    let (v, code) = json(&["--config", &f.0]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["count"], 34);
    assert_eq!(v["params"]["config"]["y"], "5");
    // the command line overrides the file
    let (v, _) = json(&["--config", &f.0, "smooth-count", "--y", "3"]);
    assert_eq!(v["result"]["count"], 20);
}

fn tempfile() -> (String, std::fs::File) {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static N: AtomicUsize = AtomicUsize::new(0);
    let path = std::env::temp_dir().join(format!(
        "sievekit-cli-{}-{}.txt",
        std::process::id(),
        N.fetch_add(1, Ordering::Relaxed)
    ));
    let f = std::fs::File::create(&path).unwrap();
    (path.to_string_lossy().into_owned(), f)
}
