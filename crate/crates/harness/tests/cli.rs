use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn traitlens(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traitlens"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn run_id(out: &Output) -> String {
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "stdout:\n{stdout}\nstderr:\n{}", String::from_utf8_lossy(&out.stderr));
    stdout
        .lines()
        .find_map(|l| l.strip_prefix("run "))
        .map(|s| s.split_whitespace().next().unwrap().to_string())
        .expect("run id printed")
}

fn read_dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = traitlens(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_api_key_fails_before_creating_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("endpoints.json");
    fs::write(
        &config,
        r#"{"endpoints": {"remote": {"base_url": "http://127.0.0.1:9", "model_id": "m", "api_key_ref": "TRAITLENS_CLI_TEST_KEY"}}}"#,
    )
    .unwrap();
    let store = dir.path().join("runs");
    let out = Command::new(env!("CARGO_BIN_EXE_traitlens"))
        .arg("--store")
        .arg(&store)
        .arg("--config")
        .arg(&config)
        .args(["administer", "--model", "remote"])
        .env_remove("TRAITLENS_CLI_TEST_KEY")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TRAITLENS_CLI_TEST_KEY"));
    assert!(!store.exists());
}

#[test]
fn dry_run_prints_prompts_and_stores_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("runs");
    let out = traitlens(&store, &["--dry-run", "administer", "--model", "m", "--variant", "reversed"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("(never, rarely, sometimes, often, always)"));
    assert!(stdout.contains("Statement:To what extent do you produce lengthy responses?"));
    assert!(!store.exists());
}

#[test]
fn icc_over_model_and_human_raters() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("runs");
    let run = run_id(&traitlens(&store, &["--mock", "administer", "--model", "t"]));
    for args in [["--rater-model", "r1", "--rater", "decoder"], ["--rater-model", "r2", "--rater", "zsc"]] {
        let out = traitlens(&store, &[&["--mock", "rate", "--run", &run][..], &args[..]].concat());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }

    // Humans agree with the keyword scores except for a few off-by-one items.
    let plan = traitlens::scripted::default_item_plan();
    let mut human = String::from("item_id,rater_name,score\n");
    for (i, (id, s)) in plan.iter().enumerate() {
        human.push_str(&format!("{id},ann,{s}\n"));
        let b = if i % 7 == 0 { if *s == 5 { 4 } else { s + 1 } } else { *s };
        human.push_str(&format!("{id},ben,{b}\n"));
    }
    let csv = dir.path().join("humans.csv");
    fs::write(&csv, human).unwrap();

    let out = traitlens(&store, &["stats", "--run", &run, "--what", "icc", "--human", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let interrater: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(store.join(&run).join("reports/interrater.json")).unwrap()).unwrap();
    let raters: Vec<&str> = interrater["raters"].as_array().unwrap().iter().map(|r| r.as_str().unwrap()).collect();
    assert_eq!(raters, ["decoder:r1", "human:ann", "human:ben", "keyword", "zsc:r2"]);
    assert_eq!(interrater["items"].as_array().unwrap().len(), 44);
    let all = interrater["icc"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e[0] == "all raters")
        .expect("pooled ICC");
    let single = all[1]["icc_single"].as_f64().unwrap();
    assert!(single > 0.9 && single < 1.0, "{single}");
}

#[test]
fn report_rebuild_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("runs");
    let run = run_id(&traitlens(&store, &["--mock", "reverse-items", "--model", "t", "--embed-model", "e"]));
    let reports = store.join(&run).join("reports");
    let first = read_dir_contents(&reports);
    assert!(first.contains_key("keyword_reversal.json"));
    assert!(first.contains_key("keyword_reversal_scatter.svg"));
    fs::remove_dir_all(&reports).unwrap();
    let out = traitlens(&store, &["report", "--run", &run]);
    assert!(out.status.success());
    assert_eq!(read_dir_contents(&reports), first);
}

#[test]
fn temperature_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("runs");
    let run = run_id(&traitlens(&store, &["--mock", "--temperature", "0.7", "administer", "--model", "t", "--final-set"]));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(store.join(&run).join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["temperature_override"], 0.7);
    assert_eq!(manifest["endpoints"][0]["temperature"], 0.7);
    assert_eq!(manifest["status"], "complete");
}
