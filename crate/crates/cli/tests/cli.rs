use std::path::Path;
use std::process::{Command, Output};

fn ascprobe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ascprobe"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn labels_of(corpus: &Path) -> Vec<String> {
    std::fs::read_to_string(corpus)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["label"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn default_generate_writes_balanced_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let o = ascprobe(&["generate", "--out", path(dir.path()), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let labels = labels_of(&dir.path().join("corpus.jsonl"));
    assert_eq!(labels.len(), 2000);
    for class in ["transitive", "ditransitive", "caused_motion", "resultative"] {
        assert_eq!(labels.iter().filter(|l| *l == class).count(), 500);
    }
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["sentences"], 2000);
    assert!(dir.path().join("vocab.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn zero_per_class_is_an_empty_success() {
    let dir = tempfile::tempdir().unwrap();
    let o = ascprobe(&["generate", "--out", path(dir.path()), "--n-per-class", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("corpus.jsonl")).unwrap(), "");
}

#[test]
fn unwritable_output_exits_one_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("run");
    let o = ascprobe(&["generate", "--out", path(&target), "--n-per-class", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(path(&blocker)), "{}", stderr(&o));
}

#[test]
fn impossible_request_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = ascprobe(&["generate", "--out", path(dir.path()), "--n-per-class", "100000000"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn custom_grammar_round_trips_through_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = ascprobe(&["dump-grammar"]);
    assert!(dump.status.success());
    let grammar = dir.path().join("g.json");
    std::fs::write(&grammar, &dump.stdout).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(ascprobe(&["generate", "--out", path(&a), "--n-per-class", "5", "--grammar", path(&grammar)]).status.success());
    assert!(ascprobe(&["generate", "--out", path(&b), "--n-per-class", "5"]).status.success());
    assert_eq!(std::fs::read(a.join("corpus.jsonl")).unwrap(), std::fs::read(b.join("corpus.jsonl")).unwrap());
    std::fs::write(&grammar, "{not json").unwrap();
    let o = ascprobe(&["generate", "--out", path(&a), "--grammar", path(&grammar)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn training_is_deterministic_and_logs_each_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ascprobe(&["generate", "--out", path(d), "--n-per-class", "20"]).status.success());
    let hash = |o: &Output| -> String {
        assert!(o.status.success(), "{}", stderr(o));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["checkpoint_sha256"].as_str().unwrap().to_string()
    };
    let first = hash(&ascprobe(&["train", "--out", path(d), "--epochs", "1", "--json"]));
    let log = std::fs::read_to_string(d.join("train_log.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "epoch,train_loss,val_loss,val_accuracy");
    assert_eq!(log.lines().count(), 2);
    let second = hash(&ascprobe(&["train", "--out", path(d), "--epochs", "1", "--json"]));
    assert_eq!(first, second);
}

#[test]
fn analyze_report_contract() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = ascprobe(&["run", "--out", path(d), "--n-per-class", "15", "--epochs", "2", "--method", "mds"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("<- most negative"));
    assert!(text.contains("matches reference pattern: "));

    let proj: Vec<String> = std::fs::read_dir(d.join("projections"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(proj.iter().filter(|f| f.ends_with(".csv")).count(), 4);
    assert!(proj.iter().all(|f| f.contains("_mds.")));
    let csv = std::fs::read_to_string(d.join("projections/lstm2_mds.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "index,label,x,y");
    assert_eq!(csv.lines().count(), 61);

    let gdv: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("gdv.json")).unwrap()).unwrap();
    let entries = gdv.as_array().unwrap();
    assert_eq!(entries.len(), 4);
    for e in entries {
        for key in ["layer", "gdv", "intra", "inter", "d_eff", "dropped_dims"] {
            assert!(e.get(key).is_some(), "missing {key}");
        }
    }

    let json = ascprobe(&["report", "--out", path(d), "--json"]);
    assert!(json.status.success());
    let r: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(r["layers"].as_array().unwrap().len(), 4);
    assert!(r["matches_reference_pattern"].is_boolean());

    std::fs::remove_file(d.join("projections/lstm1_mds.csv")).unwrap();
    let o = ascprobe(&["report", "--out", path(d)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lstm1_mds.csv"), "{}", stderr(&o));
}

#[test]
fn mismatched_vocabulary_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(ascprobe(&["generate", "--out", path(&a), "--n-per-class", "10", "--seed", "1"]).status.success());
    assert!(ascprobe(&["train", "--out", path(&a), "--epochs", "1"]).status.success());
    assert!(ascprobe(&["generate", "--out", path(&b), "--n-per-class", "3", "--seed", "2"]).status.success());
    let ckpt = a.join("model.ckpt");
    let o = ascprobe(&["analyze", "--out", path(&b), "--checkpoint", path(&ckpt), "--method", "mds"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("vocabulary"));
}

#[test]
fn untrained_checkpoint_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ascprobe(&["generate", "--out", path(d), "--n-per-class", "10"]).status.success());
    assert!(ascprobe(&["train", "--out", path(d), "--untrained"]).status.success());
    assert!(!d.join("train_log.csv").exists());
    let o = ascprobe(&["analyze", "--out", path(d), "--method", "mds", "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn missing_corpus_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = ascprobe(&["train", "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("corpus.jsonl"));
}

#[test]
fn config_file_is_honoured_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 3\n[corpus]\nn_per_class = 7\n").unwrap();
    let out = dir.path().join("r");
    let o = ascprobe(&["generate", "--out", path(&out), "--config", path(&cfg), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(labels_of(&out.join("corpus.jsonl")).len(), 28);
    let o = ascprobe(&["generate", "--out", path(&out), "--config", path(&cfg), "--n-per-class", "2"]);
    assert!(o.status.success());
    assert_eq!(labels_of(&out.join("corpus.jsonl")).len(), 8);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 3);
    assert_eq!(manifest["config"]["corpus"]["n_per_class"], 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut hashes = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = Command::new(env!("CARGO_BIN_EXE_ascprobe"))
            .args(["run", "--out", path(&out), "--n-per-class", "10", "--epochs", "1", "--method", "mds"])
            .env("ASCPROBE_THREADS", threads)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        hashes.push((std::fs::read(out.join("model.ckpt")).unwrap(), std::fs::read(out.join("gdv.json")).unwrap()));
    }
    assert!(hashes[0] == hashes[1]);
}
