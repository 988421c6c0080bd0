use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dgreen::cli::{ProblemFile, ResultFile};
use serde_json::json;
use tempfile::TempDir;

fn dgreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgreen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Self {
        Self(TempDir::new().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn demo(&self, name: &str) -> PathBuf {
        let path = self.path(&format!("{name}.json"));
        let out = dgreen(&["demo", name, "--output", s(&path)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        path
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> PathBuf {
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
        path
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn resonant_with(forcing: serde_json::Value) -> serde_json::Value {
    json!({
        "dim": 1, "window_lo": 0, "window_hi": 0,
        "tail_minus": [[0.5]], "tail_plus": [[2.0]],
        "forcing": forcing
    })
}

#[test]
fn demo_files_round_trip_byte_identically() {
    let dir = Scratch::new();
    for name in ["saddle", "resonant", "trichotomy"] {
        let text = std::fs::read_to_string(dir.demo(name)).unwrap();
        assert_eq!(ProblemFile::parse(&text).unwrap().canonical_json(), text);
    }
    let out = dgreen(&["demo", "saddle"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout(&out),
        std::fs::read_to_string(dir.demo("saddle")).unwrap()
    );
}

#[test]
fn unknown_demo_is_a_usage_error() {
    assert_eq!(code(&dgreen(&["demo", "pendulum"])), 1);
}

#[test]
fn analyze_reports_classification() {
    let dir = Scratch::new();
    let out = dgreen(&["analyze", s(&dir.demo("saddle"))]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(
        text.contains("P = [[1.000000, 0.000000], [0.000000, 0.000000]]"),
        "{text}"
    );
    assert!(
        text.contains("Q = [[1.000000, 0.000000], [0.000000, 0.000000]]"),
        "{text}"
    );
    assert!(text.contains("dichotomy_on_z = true"), "{text}");

    let result = dir.path("trichotomy.result.json");
    let out = dgreen(&[
        "analyze",
        s(&dir.demo("trichotomy")),
        "--output",
        s(&result),
    ]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("trichotomy = true"));
    let r = ResultFile::read(&result).unwrap();
    assert_eq!((r.classification.r, r.classification.d), (1, 0));
    assert!(r.solution.is_none());
}

#[test]
fn identity_system_has_no_dichotomy() {
    let dir = Scratch::new();
    let file = dir.write_json(
        "identity.json",
        &json!({"dim": 2, "window_lo": 0, "window_hi": 0,
                "tail_minus": [[1.0, 0.0], [0.0, 1.0]], "tail_plus": [[1.0, 0.0], [0.0, 1.0]]}),
    );
    for cmd in ["analyze", "solve"] {
        let out = dgreen(&[cmd, s(&file)]);
        assert_eq!(code(&out), 2, "{}", stderr(&out));
        assert!(stderr(&out).contains("unit circle"));
    }
}

#[test]
fn malformed_files_are_parse_errors() {
    let dir = Scratch::new();
    let garbage = dir.path("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(code(&dgreen(&["analyze", s(&garbage)])), 1);
    assert_eq!(code(&dgreen(&["analyze", s(&dir.path("missing.json"))])), 1);
    let mut v = resonant_with(json!({}));
    v["color"] = json!("blue");
    assert_eq!(
        code(&dgreen(&["analyze", s(&dir.write_json("extra.json", &v))])),
        1
    );
    let ragged = json!({"dim": 2, "window_lo": 0, "window_hi": 0,
        "tail_minus": [[0.5, 0.0], [0.0]], "tail_plus": [[2.0, 0.0], [0.0, 2.0]]});
    assert_eq!(
        code(&dgreen(&[
            "analyze",
            s(&dir.write_json("ragged.json", &ragged))
        ])),
        1
    );
    assert_eq!(code(&dgreen(&["frobnicate"])), 1);
}

#[test]
fn solve_resonant_variants() {
    let dir = Scratch::new();
    let solvable = dir.write_json("ok.json", &resonant_with(json!({"0": [1.0], "1": [-2.0]})));
    let result = dir.path("ok.result.json");
    let out = dgreen(&["solve", s(&solvable), "--output", s(&result)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = ResultFile::read(&result).unwrap();
    let sol = r.solution.unwrap();
    assert!(sol.basis.is_empty());
    let at = |n: i64| sol.particular[(n - sol.start) as usize][0];
    assert!((at(1) - 1.0).abs() < 1e-12);
    assert!(at(0).abs() < 1e-12 && at(2).abs() < 1e-12);

    let bad = dir.write_json("bad.json", &resonant_with(json!({"0": [1.0]})));
    let out = dgreen(&["solve", s(&bad)]);
    assert_eq!(code(&out), 3);
    assert!(
        stdout(&out).contains("solvability residual = 5e-1"),
        "{}",
        stdout(&out)
    );

    let quasi = dir.path("quasi.result.json");
    let out = dgreen(&["solve", s(&bad), "--quasi", "--output", s(&quasi)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("defect 5e-1"), "{}", stdout(&out));
    let r = ResultFile::read(&quasi).unwrap();
    assert!((r.solution.as_ref().unwrap().defect - 0.5).abs() < 1e-12);
    assert_eq!(code(&dgreen(&["verify", s(&quasi)])), 0);
}

#[test]
fn csv_output_has_documented_header() {
    let dir = Scratch::new();
    let csv = dir.path("x.csv");
    let out = dgreen(&["solve", s(&dir.demo("saddle")), "--csv", s(&csv)]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,x_1,x_2,norm"));
    assert_eq!(lines.count(), 41);
    assert!(text.contains("\n1,1,0,1\n"), "{text}");
}

#[test]
fn verify_detects_tampering() {
    let dir = Scratch::new();
    let result = dir.path("saddle.result.json");
    assert_eq!(
        code(&dgreen(&[
            "solve",
            s(&dir.demo("saddle")),
            "--output",
            s(&result)
        ])),
        0
    );
    assert_eq!(code(&dgreen(&["verify", s(&result)])), 0);

    let mut r = ResultFile::read(&result).unwrap();
    r.solution.as_mut().unwrap().particular[21][0] += 1e-3;
    let tampered = dir.path("tampered.json");
    std::fs::write(&tampered, r.to_json()).unwrap();
    let out = dgreen(&["verify", s(&tampered)]);
    assert_eq!(code(&out), 4);
    assert!(
        stderr(&out).contains("dynamics residual"),
        "{}",
        stderr(&out)
    );

    let analyze_only = dir.path("analyze.json");
    assert_eq!(
        code(&dgreen(&[
            "analyze",
            s(&dir.demo("saddle")),
            "--output",
            s(&analyze_only)
        ])),
        0
    );
    assert_eq!(code(&dgreen(&["verify", s(&analyze_only)])), 1);
}

#[test]
fn looser_rank_tolerance_gives_same_verdicts() {
    let dir = Scratch::new();
    let problem = dir.demo("saddle");
    let (a, b) = (dir.path("a.json"), dir.path("b.json"));
    assert_eq!(code(&dgreen(&["solve", s(&problem), "--output", s(&a)])), 0);
    assert_eq!(
        code(&dgreen(&[
            "solve",
            s(&problem),
            "--output",
            s(&b),
            "--rank-tol",
            "1e-6"
        ])),
        0
    );
    assert_eq!(code(&dgreen(&["verify", s(&b)])), 0);
    let (ra, rb) = (ResultFile::read(&a).unwrap(), ResultFile::read(&b).unwrap());
    assert_eq!(ra.classification, rb.classification);
    assert_eq!(
        ra.solution.unwrap().particular,
        rb.solution.unwrap().particular
    );
    assert_ne!(ra.problem_hash, rb.problem_hash);
}

#[test]
fn oracle_command() {
    let dir = Scratch::new();
    for name in ["saddle", "trichotomy"] {
        let out = dgreen(&["oracle", s(&dir.demo(name)), "--half-width", "15"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(stdout(&out).contains("distance modulo family"));
    }
    assert_eq!(code(&dgreen(&["oracle", s(&dir.demo("resonant"))])), 3);
    let ok = dir.write_json("ok.json", &resonant_with(json!({"0": [1.0], "1": [-2.0]})));
    assert_eq!(code(&dgreen(&["oracle", s(&ok)])), 0);
    assert_eq!(code(&dgreen(&["oracle", s(&ok), "--half-width", "1"])), 1);
}

#[test]
fn demo_analyze_solve_verify_pipeline() {
    let dir = Scratch::new();
    for (name, expected) in [("saddle", 0), ("trichotomy", 0), ("resonant", 3)] {
        let problem = dir.demo(name);
        assert_eq!(code(&dgreen(&["analyze", s(&problem)])), 0);
        let result = dir.path(&format!("{name}.result.json"));
        let out = dgreen(&["solve", s(&problem), "--output", s(&result)]);
        assert_eq!(code(&out), expected, "{name}: {}", stderr(&out));
        if expected == 0 {
            assert_eq!(code(&dgreen(&["verify", s(&result)])), 0, "{name}");
        }
    }
}
