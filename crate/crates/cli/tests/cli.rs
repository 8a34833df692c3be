use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn wcurve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcurve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

fn find<'a>(recs: &'a [Value], stage: &str, check: &str) -> &'a Value {
    recs.iter()
        .find(|r| r["stage"] == stage && r["check"] == check)
        .unwrap_or_else(|| panic!("no record {stage}/{check}"))
}

#[test]
fn semigroup_stage_on_pentagonal() {
    let s = spec("pentagonal.toml");
    let out = wcurve(&["--spec", s.to_str().unwrap(), "--stages", "semigroup", "--report", "-"]);
    assert!(out.status.success());
    let recs = records(&out);
    assert_eq!(
        find(&recs, "semigroup", "generators")["detail"],
        serde_json::json!([5, 7, 11])
    );
    assert_eq!(
        find(&recs, "semigroup", "gaps")["detail"],
        serde_json::json!([1, 2, 3, 4, 6, 8, 9, 13])
    );
    assert_eq!(
        find(&recs, "semigroup", "young")["detail"]["young"],
        serde_json::json!([6, 3, 3, 2, 1, 1, 1, 1])
    );
    let table = wcurve(&["--spec", s.to_str().unwrap(), "--stages", "semigroup"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert!(text.contains("(6,3,3,2,1,1,1,1)"), "{text}");
}

#[test]
fn basis_stage_on_example_three() {
    let s = spec("example-iii.toml");
    let out = wcurve(&["--spec", s.to_str().unwrap(), "--stages", "basis", "--report", "-"]);
    assert!(out.status.success());
    let recs = records(&out);
    let canon: Vec<(u64, String)> = find(&recs, "basis", "canonical")["detail"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| (v["weight"].as_u64().unwrap(), v["label"].as_str().unwrap().to_string()))
        .collect();
    let expected = [(7, "y"), (8, "w"), (10, "xy"), (11, "xw")];
    assert_eq!(canon, expected.map(|(w, l)| (w, l.to_string())));
    assert_eq!(find(&recs, "basis", "d1")["detail"], 5);
    for (w, label) in [
        (0, "1"),
        (3, "x"),
        (7, "y"),
        (8, "w"),
        (14, "y^2"),
        (16, "w^2"),
        (22, "x^2w^2"),
    ] {
        assert_eq!(find(&recs, "basis", &format!("weight {w}"))["text"], label);
    }
}

#[test]
fn invert_is_deterministic_and_passes() {
    let s = spec("genus-two.toml");
    let args = [
        "--spec",
        s.to_str().unwrap(),
        "--stages",
        "invert",
        "--seed",
        "42",
        "--samples",
        "5",
        "--report",
        "-",
    ];
    let a = wcurve(&args);
    let b = wcurve(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    let recs = records(&a);
    let gated: Vec<_> = recs.iter().filter(|r| r["value"].is_f64()).collect();
    assert_eq!(gated.len(), 5 * 4);
    for r in gated {
        assert!(r["value"].as_f64().unwrap() < 1e-6, "{r}");
        assert_eq!(r["status"], "pass");
    }
    let other = wcurve(&[
        "--spec",
        s.to_str().unwrap(),
        "--stages",
        "invert",
        "--seed",
        "7",
        "--samples",
        "5",
        "--report",
        "-",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn periods_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("periods.txt");
    let s = spec("trigonal.toml");
    let run = || {
        wcurve(&[
            "--spec",
            s.to_str().unwrap(),
            "--stages",
            "periods,invert",
            "--samples",
            "2",
            "--periods-cache",
            cache.to_str().unwrap(),
            "--report",
            "-",
        ])
    };
    let first = run();
    assert!(first.status.success());
    assert!(cache.exists());
    let second = run();
    let (r1, r2) = (records(&first), records(&second));
    assert_eq!(find(&r1, "periods", "source")["text"], "computed");
    assert_eq!(find(&r2, "periods", "source")["text"], "cache");
    let invert = |rs: &[Value]| {
        rs.iter()
            .filter(|r| r["stage"] == "invert")
            .cloned()
            .collect::<Vec<_>>()
    };
    assert_eq!(invert(&r1), invert(&r2));

    let wrong = wcurve(&[
        "--spec",
        spec("genus-two.toml").to_str().unwrap(),
        "--stages",
        "periods",
        "--periods-cache",
        cache.to_str().unwrap(),
        "--report",
        "-",
    ]);
    assert_eq!(wrong.status.code(), Some(1));
    let recs = records(&wrong);
    assert!(find(&recs, "periods", "setup")["text"]
        .as_str()
        .unwrap()
        .contains("shape mismatch"));
}

#[test]
fn report_file_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.jsonl");
    let out = wcurve(&[
        "--spec",
        spec("example-iii.toml").to_str().unwrap(),
        "--stages",
        "semigroup,periods",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = std::fs::read_to_string(&report).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["stage"], "periods");
    assert_eq!(last["status"], "fail");
    assert!(String::from_utf8(out.stdout).unwrap().contains("1 failed"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"cyclic\"\nr = 0\n").unwrap();
    let out = wcurve(&["--spec", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line"));
}
