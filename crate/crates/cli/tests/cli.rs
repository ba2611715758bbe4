use std::path::Path;
use std::process::{Command, Output};

fn fairdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdiv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const SCENARIO: &str = r#"{
  "name": "x",
  "items": ["a", "b"],
  "composition": [0.5, 0.5],
  "valuations": [{"label": "u", "weights": [1, 0]}, {"label": "v", "weights": [0, 1]}],
  "divisions": [{"label": "cut", "piece1": [PIECE, 0.5]}],
  "joint": [[0.3, 0.2], [0.2, JOINT]]
}"#;

#[test]
fn bundled_documents_validate() {
    for (name, kind) in [
        ("example1.json", "scenario"),
        ("sample1p.json", "scenario"),
        ("setup2.json", "scenario"),
        ("setup5.json", "scenario"),
        ("sample1p_game.json", "game"),
        ("two_members.json", "society"),
    ] {
        let o = fairdiv(&["validate", name]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
        assert_eq!(stdout(&o), format!("OK {kind}\n"));
    }
}

#[test]
fn validation_names_failing_field() {
    let dir = tempfile::tempdir().unwrap();
    let joint = write(dir.path(), "joint.json", &SCENARIO.replace("PIECE", "0.5").replace("JOINT", "0.29"));
    let o = fairdiv(&["validate", &joint]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("joint"), "{}", stderr(&o));

    let piece = write(dir.path(), "piece.json", &SCENARIO.replace("PIECE", "-0.5").replace("JOINT", "0.3"));
    let o = fairdiv(&["validate", &piece]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("divisions[0] (cut)"), "{}", stderr(&o));

    let ok = write(dir.path(), "ok.json", &SCENARIO.replace("PIECE", "0.5").replace("JOINT", "0.3"));
    assert!(fairdiv(&["validate", &ok]).status.success());
}

#[test]
fn reruns_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["dc-selfish-curve", "--scenario", "example1.json", "--rates", "0:1:0.1", "--step", "0.05"],
        &["repeated-verify", "--game", "sample1p_game.json", "--n", "3", "--samples", "200", "--seed", "5"],
        &["aw-spy", "--a", "0.4", "--b-min", "0.5", "--b-max", "1", "--k-max", "2"],
        &["nash-opt", "--society", "two_members.json"],
    ];
    for args in runs {
        let (a, b) = (fairdiv(args), fairdiv(args));
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn selfish_curve_endpoints_are_equitable() {
    let o = fairdiv(&["dc-selfish-curve", "--scenario", "example1.json", "--rates", "0:1:0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rate,g_sel_a,g_sel_b,delta_sel"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    for r in &rows {
        if r[0] == 0.0 || r[0] >= 0.919 {
            assert_eq!(r[3], 0.0, "{r:?}");
        }
        for c in &r[1..] {
            let digits = format!("{c}").trim_start_matches(['-', '0', '.']).replace('.', "").len();
            assert!(digits <= 9, "{c}");
        }
    }
}

#[test]
fn psi_curve_jumps_at_bob_valuation() {
    let o = fairdiv(&["aw-psi-curve", "--a", "0.1", "--b", "0.3", "--points", "99"]);
    assert!(o.status.success());
    let rows: Vec<(f64, f64)> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let (x, y) = l.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    let before = rows.iter().rfind(|r| r.0 < 0.3).unwrap();
    let after = rows.iter().find(|r| r.0 > 0.3).unwrap();
    assert!(before.1 - after.1 > 0.2, "{before:?} {after:?}");
}

#[test]
fn repeated_verify_passes_on_bundled_game() {
    let o = fairdiv(&["repeated-verify", "--game", "sample1p.json", "--n", "4", "--epsilons", "1e-2,1e-3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["epsilons"].as_array().unwrap().len(), 2);

    let o = fairdiv(&["repeated-verify", "--game", "sample1p_game.json", "--n", "4", "--normalize"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let alice = v["expected_gains"]["alice"].as_f64().unwrap();
    assert!(alice > 0.5 && alice < 1.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fairdiv(&["aw2", "--a", "0.3", "--b", "0.3"]).status.code(), Some(2));
    assert_eq!(fairdiv(&["aw2", "--a", "1.5", "--b", "0.3"]).status.code(), Some(2));
    assert_eq!(fairdiv(&["validate", "missing.json"]).status.code(), Some(2));
    assert_eq!(fairdiv(&["dc-selfish-curve", "--scenario", "example1", "--rates", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(fairdiv(&["no-such-command"]).status.code(), Some(2));

    // Alice's only type is sure T = 0, so the risk condition fails.
    let game = write(dir.path(), "g.json", r#"{"pairs": [{"gA": 0.9, "gB": 0.2, "p": 1}], "n": 2}"#);
    let o = fairdiv(&["repeated-verify", "--game", &game]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("risk condition"));

    // A split the information cannot justify is still checked, not rejected.
    let soc = write(
        dir.path(),
        "s.json",
        r#"{"items": 2, "members": [[0.5, 0.5], [0.5, 0.5]], "clusters": [[0, 1]]}"#,
    );
    let o = fairdiv(&["nash-refine-bound", "--society", &soc, "--cluster", "0", "--refinement", "0;1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = fairdiv(&["nash-refine-bound", "--society", &soc, "--cluster", "0", "--refinement", "0;2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("refinement"));
}

#[test]
fn output_file_and_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_fairdiv"))
        .args(["dc-region", "--scenario", "example1.json", "--rate", "0", "--step", "0.1", "-o"])
        .arg(&out)
        .env("FAIRDIV_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("g_a,g_b\n") && text.lines().count() >= 3);

    let o = Command::new(env!("CARGO_BIN_EXE_fairdiv"))
        .args(["aw2", "--a", "0.3", "--b", "0.6"])
        .env("FAIRDIV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("FAIRDIV_THREADS"));
}
