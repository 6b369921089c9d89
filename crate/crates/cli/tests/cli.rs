use std::path::Path;
use std::process::{Command, Output};

use ghmm_canon::io::read_model;
use ghmm_canon::zoo;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ghmm-canon"));
    c.env_remove("GHMM_CANON_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_word_has_probability_one() {
    for spelling in ["ε", "--empty"] {
        let o = run(&["prob", "zoo:tight_hmm", spelling]);
        assert!(o.status.success());
        assert_eq!(json(&o)["probability"], 1.0);
    }
    let o = run(&["--format", "table", "prob", "zoo:tight_hmm", "ε"]);
    assert_eq!(stdout(&o).trim(), "1");
}

#[test]
fn tight_pair_is_equal() {
    let o = run(&["equiv", "zoo:tight_hmm", "zoo:tight_qhmm", "--method", "canonical"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "equal");
    let o = run(&["--format", "table", "equiv", "zoo:tight_hmm", "zoo:tight_qhmm", "--method", "length"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "equal");
}

#[test]
fn loose_bound() {
    let o = run(&["bound", "zoo:loose_hmm"]);
    assert!(o.status.success());
    let compact: Value = json(&o);
    assert_eq!(serde_json::to_string(&compact).unwrap(), r#"{"ell_min":4,"d_min_lower":2}"#);
}

#[test]
fn different_processes_exit_three_with_witness() {
    for method in ["thm1", "length", "canonical"] {
        let o = run(&["equiv", "zoo:loose_hmm:0.3", "zoo:loose_hmm:0.31", "--method", method]);
        assert_eq!(o.status.code(), Some(3), "{method}");
        let r = json(&o);
        assert_eq!(r["verdict"], "not_equal");
        assert_eq!(r["witness"]["future"], serde_json::json!(["0"]));
        assert!(r["witness"]["delta"].as_f64().unwrap().abs() > 1e-3);
    }
}

#[test]
fn tolerance_from_environment_and_flag() {
    let args = ["equiv", "zoo:loose_hmm:0.3", "zoo:loose_hmm:0.31", "--method", "length"];
    let o = bin().args(args).env("GHMM_CANON_TOL", "0.1").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["tolerance"], 0.1);
    let o = bin().args(args).env("GHMM_CANON_TOL", "0.1").args(["--tol", "1e-8"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin().args(args).env("GHMM_CANON_TOL", "lots").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn convert_and_reimport() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["bloch", "liouville"] {
        let o = run(&["convert", "zoo:tight_qhmm", "--method", method]);
        assert!(o.status.success());
        let v = json(&o);
        assert_eq!(v["derived_from"], "qhmm");
        assert_eq!(v["method"], method);
        let path = write(dir.path(), &format!("{method}.json"), &stdout(&o));
        let o = run(&["equiv", &path, "zoo:tight_hmm", "--method", "canonical"]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", stdout(&o));
        let o = run(&["prob", &path, "0123"]);
        let expect = 1.0 / 4.0 / 27.0;
        assert!((json(&o)["probability"].as_f64().unwrap() - expect).abs() < 1e-12);
    }
    assert_eq!(run(&["convert", "zoo:tight_hmm"]).status.code(), Some(2));
}

#[test]
fn zoo_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["zoo", "list"]);
    let names: Vec<String> = json(&o).as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap().to_string()).collect();
    assert_eq!(names.len(), zoo::ENTRY_NAMES.len());
    for name in names {
        let o = run(&["zoo", "export", &name]);
        assert!(o.status.success());
        let path = write(dir.path(), &format!("{name}.json"), &stdout(&o));
        let back = read_model(&path).unwrap();
        let orig = zoo::entry(&name).unwrap().model;
        for len in 0..=5 {
            for w in orig.alphabet().words_of_length(len) {
                let d = orig.word_probability(&w).unwrap() - back.word_probability(&w).unwrap();
                assert!(d.abs() <= 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn canonical_export_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["canonical", "zoo:tight_qhmm"]);
    let v = json(&o);
    assert_eq!(v["kind"], "standard_ghmm");
    assert_eq!(v["history_words"], serde_json::json!([[], ["0"], ["1"], ["2"]]));
    let path = write(dir.path(), "std.json", &stdout(&o));
    assert_eq!(run(&["equiv", &path, "zoo:tight_hmm", "--method", "thm1"]).status.code(), Some(0));
}

#[test]
fn samples_are_reproducible() {
    let a = run(&["sample", "zoo:tight_qhmm", "-n", "500", "-s", "17"]);
    let b = run(&["sample", "zoo:tight_qhmm", "-n", "500", "-s", "17"]);
    let c = run(&["sample", "zoo:tight_qhmm", "-n", "500", "-s", "18"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json(&a)["symbols"].as_array().unwrap().len(), 500);
}

#[test]
fn wordlists_and_steady_state() {
    let o = run(&["wordlist", "zoo:loose_hmm_a"]);
    let v = json(&o);
    assert_eq!(v["history_words"], serde_json::json!([[], ["1"], ["1", "1"], ["1", "1", "1"]]));
    assert_eq!(v["future_words"], serde_json::json!([[], ["0"], ["1", "0"], ["1", "1", "0"]]));
    let o = run(&["steady", "zoo:loose_hmm:0.1"]);
    let pi: Vec<f64> = serde_json::from_value(json(&o)["pi"].clone()).unwrap();
    let z = 4.0 - 0.3;
    for (p, e) in pi.iter().zip([1.0 / z, 0.9 / z, 0.9 / z, 0.9 / z]) {
        assert!((p - e).abs() < 1e-10);
    }
    let o = run(&["steady", "zoo:tight_qhmm"]);
    let sigma = &json(&o)["sigma"];
    assert!((sigma[0][0][0].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn multi_character_labels_need_a_separator() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "m.json",
        r#"{"kind":"hmm","alphabet":["up","down"],"eta0":[1.0],"transitions":{"up":[[0.25]],"down":[[0.75]]}}"#,
    );
    let o = run(&["--sep", ",", "prob", &path, "up,down,up"]);
    assert!((json(&o)["probability"].as_f64().unwrap() - 0.25 * 0.75 * 0.25).abs() < 1e-15);
    let o = run(&["--sep", ",", "cond", &path, "up", "down"]);
    assert!((json(&o)["probability"].as_f64().unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["prob", "/nonexistent.json", "0"]).status.code(), Some(2));
    assert_eq!(run(&["prob", "zoo:tight_hmm", "7"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    // Two absorbing states: the unit eigenvalue is degenerate.
    let degenerate = write(
        dir.path(),
        "d.json",
        r#"{"kind":"hmm","alphabet":["0"],"eta0":[0.5,0.5],"transitions":{"0":[[1,0],[0,1]]}}"#,
    );
    assert_eq!(run(&["steady", &degenerate]).status.code(), Some(4));
    // Ten states on three symbols: the length test would enumerate 3^31 words.
    let big = zoo::random_hmm(10, 3, 1).unwrap();
    let file = ghmm_canon::io::to_json_string(&ghmm_canon::io::ghmm_file(&big, None));
    let big = write(dir.path(), "big.json", &file);
    let o = run(&["equiv", &big, &big, "--method", "length"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("thm1"));
    assert_eq!(run(&["equiv", &big, &big, "--method", "thm1"]).status.code(), Some(0));
}

#[test]
fn validate_reports_negative_probabilities() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"kind":"ghmm","alphabet":["x","y"],"eta0":[1.0],"ones":[1.0],"transitions":{"x":[[-0.5]],"y":[[1.5]]}}"#,
    );
    let o = run(&["validate", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["first_violation"]["word"], serde_json::json!(["x"]));
    let o = run(&["validate", "zoo:tight_hmm"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["max_len"], 7);
}

#[test]
fn config_file_sets_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"format": "table", "seed": 5}"#);
    let o = run(&["--config", &cfg, "prob", "zoo:iid_bit:0.25", "0"]);
    assert_eq!(stdout(&o).trim(), "0.25");
    let a = run(&["--config", &cfg, "sample", "zoo:iid_bit", "-n", "50"]);
    let b = run(&["sample", "zoo:iid_bit", "-n", "50", "-s", "5", "--format", "table"]);
    assert_eq!(a.stdout, b.stdout);
}
