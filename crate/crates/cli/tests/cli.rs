use std::path::PathBuf;
use std::process::Command;

use ic_capacity::expr::Expression;
use ic_capacity::oracle::brute_force_sum_capacity;
use ic_capacity_cli::spec::load;
use ic_capacity_cli::{run, Channel, ChannelSpec};

fn spec(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "specs", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["ic-capacity"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn value_line(out: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with("value = ")).unwrap();
    line["value = ".len()..]
        .trim_end_matches(" bits")
        .parse()
        .unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(cli(&["--help"]).0, 0);
    assert_eq!(cli(&[]).0, 1);
    assert_eq!(cli(&["frobnicate"]).0, 1);
    assert_eq!(cli(&["classify"]).0, 1);
    assert_eq!(cli(&["verify", "--samples", "0"]).0, 1);
    assert_eq!(cli(&["verify", "--tol", "-1"]).0, 1);
    let (code, _, err) = cli(&[
        "bound",
        "--theorem",
        "2",
        "--spec",
        &spec("three_user.json"),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("--theorem"), "{err}");
}

#[test]
fn classify_exit_codes() {
    let (code, out, _) = cli(&["classify", "--spec", &spec("no_regime.json")]);
    assert_eq!(code, 2);
    assert!(out.contains("None: no certified regime"));
    assert!(out.contains("heuristic values"));
    let (code, out, _) = cli(&["classify", "--spec", &spec("parallel.json")]);
    assert_eq!(code, 0);
    assert!(out.contains("C_sum = 3.000000 bits"), "{out}");
    let (code, _, err) = cli(&["classify", "--spec", &spec("degraded_chain.json")]);
    assert_eq!(code, 1);
    assert!(err.contains("gaussian"));
}

#[test]
fn malformed_spec_reports_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\n  \"kind\": \"gaussian\",\n  \"gains\": [[1, 0], [0, 1]],\n  \"powers\": [1, \"two\"]\n}\n").unwrap();
    let (code, _, err) = cli(&["classify", "--spec", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("powers[1]") && err.contains("line 4"), "{err}");

    std::fs::write(
        &p,
        r#"{"kind": "gaussian", "gains": [[1, 0], [0, 1]], "powers": [1, -2]}"#,
    )
    .unwrap();
    let (code, _, err) = cli(&["classify", "--spec", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("powers"), "{err}");

    let (code, _, err) = cli(&["classify", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("reading"), "{err}");
}

#[test]
fn renormalization_warns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("near.json");
    std::fs::write(
        &p,
        r#"{"kind": "discrete", "input_cards": [2, 2], "output_cards": [2, 2],
            "transition": [1, 0, 0, 0,  0, 1, 0, 0,  0, 0, 1.0000000005, 0,  0, 0, 0, 1]}"#,
    )
    .unwrap();
    let (code, _, err) = cli(&[
        "bound",
        "--theorem",
        "1",
        "--restarts",
        "4",
        "--samples",
        "50",
        "--spec",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("warning: transition row 2"), "{err}");
}

#[test]
fn spec_files_round_trip() {
    for name in [
        "three_user.json",
        "two_user_mixed.json",
        "parallel.json",
        "no_regime.json",
        "degraded_chain.json",
        "many_to_one.json",
    ] {
        let (ch, warnings) = load(spec(name).as_ref()).unwrap();
        assert!(warnings.is_empty(), "{name}");
        let text = ChannelSpec::from(&ch).to_json();
        let (again, _) = ChannelSpec::parse(&text).unwrap().build().unwrap();
        assert_eq!(ch, again, "{name}");
    }
}

#[test]
fn discrete_nested_chain_matches_grid() {
    let (code, out, err) = cli(&[
        "bound",
        "--theorem",
        "1",
        "--seed",
        "3",
        "--spec",
        &spec("degraded_chain.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(
        out.contains("certified: no counterexample in 10000 samples"),
        "{out}"
    );
    let (Channel::Discrete(ch), _) = load(spec("degraded_chain.json").as_ref()).unwrap() else {
        panic!("discrete spec expected");
    };
    let grid = brute_force_sum_capacity(&ch, &Expression::nested_chain(2), 16).unwrap();
    assert!((value_line(&out) - grid.value).abs() < 1e-4);
}

#[test]
fn output_groups_on_many_to_one() {
    let (code, out, err) = cli(&[
        "bound",
        "--theorem",
        "4",
        "--groups",
        "1,2|3",
        "--spec",
        &spec("many_to_one.json"),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("certified"), "{out}");
    let h = -(0.1f64 * 0.1f64.log2() + 0.9 * 0.9f64.log2());
    assert!((value_line(&out) - (2.0 - h)).abs() < 1e-6, "{out}");
}

#[test]
fn json_reports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("r.json");
    let (code, _, _) = cli(&[
        "classify",
        "--spec",
        &spec("three_user.json"),
        "--json",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["report"]["regime"], "ThreeUserSuccessive");
    assert_eq!(v["report"]["conditions"].as_array().unwrap().len(), 7);

    let (code, _, _) = cli(&[
        "bound",
        "--theorem",
        "3",
        "--perm",
        "3,2,1",
        "--cuts",
        "3",
        "--spec",
        &spec("three_user.json"),
        "--json",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["result"]["certified"], true);
    assert_eq!(v["structure"]["perm"], serde_json::json!([2, 1, 0]));
}

#[test]
fn verify_adversarial_exits_three() {
    let (code, out, _) = cli(&[
        "verify",
        "--suite",
        "conditioning",
        "--samples",
        "500",
        "--adversarial",
    ]);
    assert_eq!(code, 3);
    assert!(out.contains("counterexample found"));
    let (code, out, _) = cli(&["verify", "--suite", "falsify", "--samples", "500"]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn sweep_marks_the_power_boundary() {
    let (code, out, _) = cli(&[
        "sweep",
        "--spec",
        &spec("three_user.json"),
        "--param",
        "a21=0:2:41",
    ]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let cap = header
        .iter()
        .position(|h| h == "certified_capacity")
        .unwrap();
    let mut rows = 0;
    for r in rdr.records() {
        let r = r.unwrap();
        let a21: f64 = r[0].parse().unwrap();
        // P1 = a12 = 1 puts the boundary at a21 = 1
        assert_eq!(!r[cap].is_empty(), a21 <= 1.0, "a21 = {a21}");
        rows += 1;
    }
    assert_eq!(rows, 41);
}

#[test]
fn sweep_parallel_powers_gives_sum_of_psi() {
    let (code, out, _) = cli(&[
        "sweep",
        "--spec",
        &spec("parallel.json"),
        "--param",
        "p2=0:6:4",
    ]);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    let cap = rdr
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "certified_capacity")
        .unwrap();
    for r in rdr.records() {
        let r = r.unwrap();
        let p2: f64 = r[0].parse().unwrap();
        let expected = 0.5 * (2f64.log2() + (1.0 + p2).log2() + 8f64.log2());
        assert!((r[cap].parse::<f64>().unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn sweep_usage_errors() {
    let s = spec("three_user.json");
    assert_eq!(cli(&["sweep", "--spec", &s, "--param", "a21=0:2:0"]).0, 1);
    assert_eq!(cli(&["sweep", "--spec", &s, "--param", "q1=0:2:3"]).0, 1);
    assert_eq!(cli(&["sweep", "--spec", &s, "--param", "a41=0:2:3"]).0, 1);
    assert_eq!(cli(&["sweep", "--spec", &s, "--param", "p1=-2:-1:2"]).0, 1);
    assert_eq!(
        cli(&[
            "sweep",
            "--spec",
            &spec("degraded_chain.json"),
            "--param",
            "p1=0:1:2"
        ])
        .0,
        1
    );
}

#[test]
fn thread_variable_is_validated() {
    let bin = env!("CARGO_BIN_EXE_ic-capacity");
    let out = Command::new(bin)
        .env("IC_CAPACITY_THREADS", "zero")
        .args(["verify", "--suite", "sign"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin)
        .env("IC_CAPACITY_THREADS", "2")
        .args(["verify", "--suite", "sign"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
