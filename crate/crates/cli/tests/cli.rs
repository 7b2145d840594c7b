use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn frb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frb"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &[
            "construct",
            "--family",
            "td",
            "--ell",
            "3",
            "--h",
            "4",
            "--out",
            "td34",
        ][..],
        &[
            "construct",
            "--family",
            "td",
            "--ell",
            "2",
            "--h",
            "3",
            "--out",
            "td23",
        ],
        &[
            "construct",
            "--family",
            "affine",
            "--q",
            "3",
            "--out",
            "ap3",
        ],
    ] {
        assert_eq!(frb(dir.path(), args).status.code(), Some(0));
    }
    dir
}

#[test]
fn construct_writes_both_files() {
    let dir = setup();
    let text = std::fs::read_to_string(dir.path().join("td34.im")).unwrap();
    assert!(text.starts_with("12 16\n"));
    assert_eq!(text.lines().count(), 13);
    let design: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("td34.json")).unwrap())
            .unwrap();
    assert_eq!(design["blocks"].as_array().unwrap().len(), 16);
    let ap = std::fs::read_to_string(dir.path().join("ap3.im")).unwrap();
    assert!(ap.starts_with("9 12\n"));

    let out = frb(
        dir.path(),
        &[
            "construct",
            "--family",
            "td",
            "--ell",
            "3",
            "--h",
            "4",
            "--out",
            "again",
        ],
    );
    let r = report(&out);
    assert_eq!(
        (r["report"]["n"].as_u64(), r["report"]["theta"].as_u64()),
        (Some(12), Some(16))
    );
    assert_eq!(
        (r["report"]["alpha"].as_u64(), r["report"]["rho"].as_u64()),
        (Some(4), Some(3))
    );

    let bad = frb(
        dir.path(),
        &["construct", "--family", "td", "--ell", "5", "--h", "4"],
    );
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("ell exceeds h"));
}

#[test]
fn validate_designs() {
    let dir = setup();
    let out = frb(dir.path(), &["validate", "--in", "td34.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["passed"], true);

    // drop one block: coverage must fail
    let path = dir.path().join("td34.json");
    let mut design: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    design["blocks"].as_array_mut().unwrap().pop();
    std::fs::write(dir.path().join("broken.json"), design.to_string()).unwrap();
    let out = frb(dir.path(), &["validate", "--in", "broken.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        frb(dir.path(), &["validate", "--in", "missing.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn params_reports() {
    let dir = setup();
    let out = frb(
        dir.path(),
        &[
            "params", "--in", "td34.im", "--family", "td3", "--alpha", "4", "--k", "1..4",
            "--delta", "0..2",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["report"];
    assert_eq!(r["M_table"][3]["computed"], 11);
    assert_eq!(r["M_table"][3]["code"], "3-(12,11,4,4,11)");
    assert_eq!(r["t"]["computed"], 11);
    assert_eq!(r["ecbc"][2]["t"], 8);

    let out = frb(
        dir.path(),
        &[
            "params", "--in", "ap3.im", "--family", "affine", "--q", "3", "--delta", "2",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let e = &report(&out)["report"]["ecbc"][0];
    assert_eq!(
        (e["claimed"]["lo"].as_u64(), e["claimed"]["hi"].as_u64()),
        (Some(4), Some(6))
    );
    assert_eq!(e["t"], 6);
    assert_eq!(e["exact"], true);

    // wrong family parameter: report still written, exit 1
    let out = frb(
        dir.path(),
        &[
            "params", "--in", "td34.im", "--family", "td3", "--alpha", "5", "--k", "1..2",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);

    std::fs::write(dir.path().join("garbage.im"), "not a matrix").unwrap();
    assert_eq!(
        frb(dir.path(), &["params", "--in", "garbage.im"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        frb(dir.path(), &["params", "--in", "td34.im", "--k", "3..1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_agreement() {
    let dir = setup();
    let out = frb(dir.path(), &["oracle", "--in", "td23.im", "--max", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["report"];
    assert_eq!(
        (r["agree"].as_bool(), r["t"].as_u64()),
        (Some(true), Some(5))
    );

    let out = frb(
        dir.path(),
        &["oracle", "--in", "ap3.im", "--delta", "2", "--max", "12"],
    );
    assert_eq!(out.status.code(), Some(0));

    let out = frb(dir.path(), &["oracle", "--in", "td34.im", "--max", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["report"]["vacuous"], true);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn simulate_examples() {
    let dir = setup();
    let out = frb(
        dir.path(),
        &[
            "simulate", "--in", "td34.im", "--k", "4", "--t", "11", "--delta", "0", "--seed", "7",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = &report(&out)["report"];
    assert_eq!(r["reconstruction"]["cases_run"], 495);
    assert_eq!(r["repair"]["passed"], 12);
    assert_eq!(r["sweep"]["cases_run"], 4368);

    let out = frb(
        dir.path(),
        &[
            "simulate", "--in", "td34.im", "--k", "4", "--t", "8", "--delta", "2", "--seed", "7",
            "--budget", "100000",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["config"]["seed"], 7);

    let out = frb(
        dir.path(),
        &[
            "simulate", "--in", "td34.im", "--k", "3", "--t", "11", "--delta", "0",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let failure = &report(&out)["report"]["reconstruction"]["failures"][0];
    assert!(failure["error"].as_str().unwrap().contains("file needs 11"));

    let out = frb(
        dir.path(),
        &["simulate", "--in", "td34.im", "--k", "13", "--t", "11"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical() {
    let dir = setup();
    let args = [
        "simulate", "--in", "td34.im", "--k", "4", "--t", "9", "--delta", "2", "--budget", "3000",
        "--seed", "5",
    ];
    let (a, b) = (frb(dir.path(), &args), frb(dir.path(), &args));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["tool"], "frb");
    assert_eq!(r["config"]["args"]["m"], 9);
    assert_eq!(r["config"]["budget"], 3000);

    frb(
        dir.path(),
        &["params", "--in", "ap3.im", "--out", "p1.json"],
    );
    frb(
        dir.path(),
        &["params", "--in", "ap3.im", "--out", "p1b.json"],
    );
    let p1 = std::fs::read_to_string(dir.path().join("p1.json")).unwrap();
    let p2 = std::fs::read_to_string(dir.path().join("p1b.json")).unwrap();
    // only the echoed output path differs
    assert_eq!(p1.replace("p1.json", "X"), p2.replace("p1b.json", "X"));
}

#[test]
fn text_format_renders_the_json() {
    let dir = setup();
    let out = frb(
        dir.path(),
        &["oracle", "--in", "td23.im", "--format", "text"],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "report.agree: true"));
    assert!(text.lines().any(|l| l == "config.seed: 0"));
}
