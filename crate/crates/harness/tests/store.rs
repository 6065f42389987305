mod common;

use std::fs;
use std::io::Write;

use common::new_run;
use serde_json::json;
use traitlens::error::HarnessError;
use traitlens::store::{content_hash, RecordBody, RunStore, StatsRecord};

fn stats(v: i64) -> RecordBody {
    RecordBody::Stats(StatsRecord {
        name: "n".into(),
        value: json!(v),
    })
}

#[test]
fn reopening_rebuilds_the_index() {
    let dir = tempfile::tempdir().unwrap();
    let (run, hash) = {
        let store = RunStore::open(dir.path()).unwrap();
        let run = new_run(&store, "exp");
        let hash = content_hash(&json!({"q": 1}));
        store.append_record(&run, &hash, stats(1)).unwrap();
        (run, hash)
    };
    let store = RunStore::open(dir.path()).unwrap();
    assert_eq!(store.runs().len(), 1);
    assert!(store.run_has(&run, &hash));
    let cached = store.lookup_cached(&hash).unwrap();
    assert_eq!(cached.body, stats(1));
    assert_eq!(store.run_records(&run).unwrap().len(), 1);
    assert!(store.quarantined().is_empty());
}

#[test]
fn first_record_for_a_hash_wins() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::open(dir.path()).unwrap();
    let a = new_run(&store, "a");
    let b = new_run(&store, "b");
    store.append_record(&a, "h", stats(1)).unwrap();
    store.append_record(&b, "h", stats(2)).unwrap();
    assert_eq!(store.lookup_cached("h").unwrap().run_id, a);
    assert!(store.run_has(&b, "h"));
    drop(store);
    let store = RunStore::open(dir.path()).unwrap();
    assert_eq!(store.lookup_cached("h").unwrap().body, stats(1));
}

#[test]
fn unwritable_root_is_a_store_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    fs::write(&file, "x").unwrap();
    // A directory cannot be created beneath a regular file, even as root.
    assert!(matches!(RunStore::open(file.join("store")), Err(HarnessError::Store(_))));
}

#[test]
fn truncated_last_line_is_quarantined_and_appends_continue() {
    let dir = tempfile::tempdir().unwrap();
    let run = {
        let store = RunStore::open(dir.path()).unwrap();
        let run = new_run(&store, "exp");
        store.append_record(&run, "h1", stats(1)).unwrap();
        run
    };
    let log = dir.path().join(&run).join("records.jsonl");
    let mut f = fs::OpenOptions::new().append(true).open(&log).unwrap();
    f.write_all(br#"{"schema":"traitlens.record.v1","run_id":"#).unwrap();
    drop(f);

    let store = RunStore::open(dir.path()).unwrap();
    let q = store.quarantined();
    assert_eq!(q.len(), 1);
    assert_eq!(q[0].line_number, 2);
    assert_eq!(store.run_records(&run).unwrap().len(), 1);

    store.append_record(&run, "h2", stats(2)).unwrap();
    drop(store);
    let store = RunStore::open(dir.path()).unwrap();
    assert_eq!(store.run_records(&run).unwrap().len(), 2);
    assert!(store.lookup_cached("h2").is_some());
    assert_eq!(store.quarantined().len(), 1);
}

#[test]
fn unknown_runs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::open(dir.path()).unwrap();
    assert!(matches!(store.append_record("nope", "h", stats(1)), Err(HarnessError::Store(_))));
    assert!(store.run_records("nope").is_err());
}

#[test]
fn stats_records_are_not_duplicated() {
    let dir = tempfile::tempdir().unwrap();
    let store = RunStore::open(dir.path()).unwrap();
    let run = new_run(&store, "exp");
    store.record_stats(&run, "k", json!({"a": 1})).unwrap();
    store.record_stats(&run, "k", json!({"a": 1})).unwrap();
    store.record_stats(&run, "k", json!({"a": 2})).unwrap();
    assert_eq!(store.run_records(&run).unwrap().len(), 2);
}
