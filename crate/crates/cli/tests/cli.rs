use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_slotqa");

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(rel)
}

fn run<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(BIN).args(args).env_remove("SLOTQA_ENDPOINT").output().expect("binary runs")
}

fn ok<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn convert_matches_the_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("atis_visual.json");
    let bio = data("corpora/atis_sample.conll");
    let schema = data("schemas/atis.tsv");
    ok(&["convert", "--bio", p(&bio), "--schema", p(&schema), "--negatives", "all", "--out", p(&out)]);
    let produced = std::fs::read_to_string(&out).unwrap();

    let golden = fixture("golden/atis_sample.squad.json");
    if std::env::var_os("SLOTQA_BLESS").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &produced).unwrap();
    }
    assert!(produced == std::fs::read_to_string(&golden).unwrap(), "rerun with SLOTQA_BLESS=1 after checking the diff");

    // Same bytes on a second run.
    ok(&["convert", "--bio", p(&bio), "--schema", p(&schema), "--out", p(&dir.path().join("again.json"))]);
    assert_eq!(std::fs::read_to_string(dir.path().join("again.json")).unwrap(), produced);

    // 50 utterances, one question per schema slot each.
    let v: Value = serde_json::from_str(&produced).unwrap();
    let qas: Vec<&Value> = v["data"][0]["paragraphs"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|para| para["qas"].as_array().unwrap())
        .collect();
    let n_schema = std::fs::read_to_string(&schema).unwrap().lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count();
    assert_eq!(qas.len(), 50 * n_schema);
}

#[test]
fn genq_prints_one_question_per_slot() {
    let out = ok(&["genq", "--screen", p(&data("screens/vehicle_logger.screen")), "--mode", "full"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.contains(&"Is this Business, Personal or Other?"));
    assert!(lines.contains(&"What is the odometer value?"));

    let novis = ok(&["genq", "--screen", "vehicle_logger", "--mode", "novis"]);
    assert_eq!(novis.lines().next(), Some("XYZ0"));
}

#[test]
fn fill_with_oracle_gold() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.json");
    let screen = data("screens/vehicle_logger.screen");
    ok(&["convert", "--bio", p(&fixture("fixtures/trip.conll")), "--screen", p(&screen), "--out", p(&gold)]);
    let out = ok(&[
        "fill",
        "--screen",
        p(&screen),
        "--utterance",
        "Please log this trip as Personal",
        "--backend",
        "oracle",
        "--gold",
        p(&gold),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["fills"]["trip_type"]["surface"], "Personal");
    assert_eq!(v["fills"].as_object().unwrap().len(), 1);
    assert_eq!(v["rejections"].as_object().unwrap().len(), 9);

    // A distractor screen adds questions but not fills.
    let out = ok(&[
        "fill", "--screen", p(&screen), "--screen", "united", "--utterance", "Please log this trip as Personal", "--bio",
        p(&fixture("fixtures/trip.conll")),
    ]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["fills"]["trip_type"]["surface"], "Personal");
    assert!(v["distractor_count"].as_u64().unwrap() > 0);
}

#[test]
fn lexical_fill() {
    let out = ok(&[
        "fill", "--screen", "vehicle_logger", "--backend", "lexical", "--utterance", "log this as a personal trip", "--table",
    ]);
    assert!(out.lines().any(|l| l.starts_with("trip_type") && l.contains("personal")), "{out}");
}

#[test]
fn eval_with_the_oracle_is_perfect() {
    let out = ok(&["eval", "--bio", p(&data("corpora/united.conll")), "--screen", "united"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["weighted_f1"], 1.0);
    assert_eq!(v["rejection_accuracy"], 1.0);

    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("p.json");
    ok(&["eval", "--bio", p(&data("corpora/united.conll")), "--screen", "united", "--save-predictions", p(&preds)]);
    let table = ok(&["eval", "--bio", p(&data("corpora/united.conll")), "--predictions", p(&preds), "--table"]);
    assert!(table.lines().any(|l| l.starts_with("weighted") && l.contains("1.0000")), "{table}");
}

#[test]
fn sample_is_seeded() {
    let bio = data("corpora/trip_advisor.conll");
    let a = ok(&["sample", "--bio", p(&bio), "--k", "7", "--seed", "3"]);
    assert_eq!(a, ok(&["sample", "--bio", p(&bio), "--k", "7", "--seed", "3"]));
    assert_ne!(a, ok(&["sample", "--bio", p(&bio), "--k", "7", "--seed", "4"]));
    assert_eq!(a.matches("# id:").count(), 7);
}

#[test]
fn plan_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("plan.json");
    ok(&["plan", "--aux", "atis_visual.json", "--target", "vl/k5.json", "--out", p(&m)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(v["stages"].as_array().unwrap().len(), 3);
    assert_eq!(v["serve_stage"], 3);
    assert_eq!(v["stages"][0]["kind"], "general_qa");
    assert!(ok(&["plan", "--check", p(&m)]).starts_with("ok: 3 stages, serving stage 3"));

    ok(&["plan", "--target", "vl/k0.json", "--zero-shot", "--out", p(&m)]);
    assert!(ok(&["plan", "--check", p(&m)]).contains("zero-shot"));

    std::fs::write(&m, r#"{"stages":[],"serve_stage":0}"#).unwrap();
    assert_eq!(run(&["plan", "--check", p(&m)]).status.code(), Some(1));
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "--domain", "trip_advisor", "--sizes", "0,5", "--seeds", "2", "--jobs", "3"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(v["runs"].as_array().unwrap().iter().all(|r| r["weighted_f1"] == 1.0 && r["trained"] == false));

    let table = ok(&["sweep", "--domain", "vehicle_logger", "--distractors", "3", "--table"]);
    assert_eq!(table.lines().count(), 4);
}

#[test]
fn sweep_exports_training_material() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep", "--domain", "united", "--sizes", "0,5", "--work-dir", p(dir.path()), "--tsv"]);
    let data = dir.path().join("united/k5/seed0.json");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&data).unwrap()).unwrap();
    assert!(!v["data"][0]["paragraphs"].as_array().unwrap().is_empty());
    let manifest = std::fs::read_to_string(dir.path().join("united/k5/seed0.plan.json")).unwrap();
    assert!(manifest.contains("\"united/k5/seed0.json\""));
    assert!(!dir.path().join("united/k0").exists());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["nope"]).status.code(), Some(2));
    assert_eq!(run(&["genq", "--screen", "x", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["genq", "--screen", "no_such_screen"]).status.code(), Some(1));
    assert_eq!(run(&["fill", "--screen", "united", "--utterance", "x"]).status.code(), Some(2));
    assert_eq!(run(&["fill", "--screen", "united", "--utterance", "x", "--backend", "remote"]).status.code(), Some(2));
    assert_eq!(run(&["fill", "--screen", "united", "--utterance", "x", "--backend", "lexical", "--tau", "2"]).status.code(), Some(2));
    assert_eq!(run(&["sample", "--bio", "/nonexistent.conll", "--k", "1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--mode", "fancy"]).status.code(), Some(2));
}

#[test]
fn help_documents_every_flag() {
    let contract = [
        ("convert", &["--bio", "--schema", "--screen", "--mode", "--negatives", "--seed", "--out"][..]),
        ("genq", &["--screen", "--mode", "--out"]),
        ("fill", &["--screen", "--utterance", "--backend", "--endpoint", "--tau", "--gold", "--mode", "--out"]),
        ("sample", &["--bio", "--seed", "--out"]),
        ("plan", &["--out"]),
        ("eval", &["--bio", "--screen", "--backend", "--endpoint", "--tau", "--out"]),
        ("sweep", &["--sizes", "--seed", "--distractors", "--jobs", "--backend", "--endpoint", "--tau", "--mode", "--negatives", "--out"]),
    ];
    for (cmd, flags) in contract {
        let out = run(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let text = String::from_utf8(out.stdout).unwrap();
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    assert!(ok(&["fill", "--help"]).contains("SLOTQA_ENDPOINT"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
