use chrono::{DateTime, Duration};
use framing_core::session::record_id_for;
use framing_core::store::{
    export_collections, parse_records, read_store, JsonlStore, ResponseRecord, ResponseStore,
    StoreError, VersionFilter,
};
use framing_core::{SessionId, Version};
use proptest::prelude::*;
use serde_json::Value;

fn record(
    session: String,
    version: u8,
    answers: Vec<u8>,
    age: Option<u32>,
    secs: i64,
) -> ResponseRecord {
    let session_id = SessionId::new(session);
    ResponseRecord {
        record_id: record_id_for(&session_id),
        session_id,
        version,
        gender: "f".into(),
        age,
        education: "BSc".into(),
        answers,
        response_times_ms: vec![Some(1200); 7],
        created_at: DateTime::UNIX_EPOCH + Duration::seconds(secs),
    }
}

fn arb_record() -> impl Strategy<Value = ResponseRecord> {
    (
        "[a-z0-9]{1,16}",
        1u8..=2,
        prop::collection::vec(1u8..=2, 7),
        prop::option::of(0u32..=130),
        0i64..2_000_000_000,
    )
        .prop_map(|(s, v, a, age, t)| record(s, v, a, age, t))
}

/// Checks a collection document without going through the crate's types.
fn check_document(line: &str) {
    let doc: Value = serde_json::from_str(line).unwrap();
    let obj = doc.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort_unstable();
    let expected: &[&str] = if obj.contains_key("age") {
        &["_id", "age", "answers", "education", "gender"]
    } else {
        &["_id", "answers", "education", "gender"]
    };
    assert_eq!(keys, expected);
    let id = obj["_id"].as_str().unwrap();
    assert_eq!(id.len(), 24);
    assert!(id.chars().all(|c| c.is_ascii_hexdigit()));
    assert!(obj["gender"].is_string());
    assert!(obj["education"].is_string());
    if let Some(age) = obj.get("age") {
        assert!(age.as_u64().unwrap() <= 130);
    }
    let answers = obj["answers"].as_array().unwrap();
    assert_eq!(answers.len(), 7);
    assert!(answers.iter().all(|a| matches!(a.as_u64(), Some(1 | 2))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn append_then_load_round_trips(records in prop::collection::vec(arb_record(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        let mut store = JsonlStore::open(&path).unwrap();
        let mut expected: Vec<ResponseRecord> = Vec::new();
        for r in &records {
            store.append(r).unwrap();
            if !expected.iter().any(|e| e.session_id == r.session_id) {
                expected.push(r.clone());
            }
        }
        prop_assert_eq!(store.len(), expected.len());
        prop_assert_eq!(&store.load(VersionFilter::All).unwrap(), &expected);
        let v2: Vec<_> = expected.iter().filter(|r| r.version == 2).cloned().collect();
        prop_assert_eq!(store.load(VersionFilter::Only(Version::V2)).unwrap(), v2);
        drop(store);
        let reopened = JsonlStore::open(&path).unwrap();
        prop_assert_eq!(reopened.len(), expected.len());
    }

    #[test]
    fn repeated_appends_do_not_grow_the_file(r in arb_record(), repeats in 1usize..5) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.jsonl");
        let mut store = JsonlStore::open(&path).unwrap();
        let id = store.append(&r).unwrap();
        let size = std::fs::metadata(&path).unwrap().len();
        for _ in 0..repeats {
            let mut again = r.clone();
            again.created_at += Duration::seconds(5);
            prop_assert_eq!(store.append(&again).unwrap(), id.clone());
        }
        prop_assert_eq!(std::fs::metadata(&path).unwrap().len(), size);
    }

    #[test]
    fn export_is_deterministic_and_well_formed(records in prop::collection::vec(arb_record(), 0..20)) {
        let a = export_collections(&records);
        let b = export_collections(&records);
        prop_assert_eq!(&a, &b);
        let n1 = records.iter().filter(|r| r.version == 1).count();
        prop_assert_eq!(a.v1.lines().count(), n1);
        prop_assert_eq!(a.v2.lines().count(), records.len() - n1);
        for line in a.v1.lines().chain(a.v2.lines()) {
            check_document(line);
        }
    }
}

#[test]
fn second_writer_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    let _first = JsonlStore::open(&path).unwrap();
    assert!(matches!(
        JsonlStore::open(&path),
        Err(StoreError::Locked(_))
    ));
    // readers do not need the lock
    assert!(read_store(&path, VersionFilter::All).unwrap().is_empty());
}

#[test]
fn truncated_tail_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    {
        let mut store = JsonlStore::open(&path).unwrap();
        store
            .append(&record("a".into(), 1, vec![1; 7], None, 0))
            .unwrap();
        store
            .append(&record("b".into(), 2, vec![2; 7], Some(30), 1))
            .unwrap();
    }
    let content = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &content[..content.len() - 10]).unwrap();
    match JsonlStore::open(&path) {
        Err(StoreError::Corrupt { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected corruption, got {other:?}"),
    }
}

#[test]
fn unknown_fields_and_bad_answers_are_corruption() {
    let good = serde_json::to_string(&record("a".into(), 1, vec![1; 7], None, 0)).unwrap();
    let extra = good.replacen('{', r#"{"extra":1,"#, 1);
    assert!(matches!(
        parse_records(&format!("{extra}\n")),
        Err(StoreError::Corrupt { line: 1, .. })
    ));
    let zero =
        serde_json::to_string(&record("b".into(), 1, vec![1, 0, 1, 1, 1, 1, 1], None, 0)).unwrap();
    let err = parse_records(&format!("{good}\n{zero}\n")).unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(err.to_string().contains("unanswered slot 2"), "{err}");
}
