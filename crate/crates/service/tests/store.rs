use std::fs::OpenOptions;
use std::io::Write;

use serde_json::Value;

use reu_core::frame::Frame;
use reu_core::procedure::{ProcedureConfig, RiskGridConfig};
use reu_core::Preference;
use reu_service::{SessionState, SessionStore};

fn config() -> ProcedureConfig {
    ProcedureConfig::RiskGrid(RiskGridConfig {
        frame: Frame::lottery_only(4).unwrap(),
        denominators: vec![2, 4],
        prizes: Default::default(),
        utility: None,
        epsilon: 1e-3,
        interpolation: Default::default(),
    })
}

#[test]
fn layout_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let id = store.create(config()).unwrap();
    store.answer(&id, 1, Preference::Indifferent).unwrap();

    let session_dir = dir.path().join("sessions").join(&id);
    let manifest: Value = serde_json::from_slice(&std::fs::read(session_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["id"], id.as_str());
    assert_eq!(manifest["procedure"], "risk_grid");
    assert_eq!(manifest["state"], "awaiting_answer");
    assert_eq!(manifest["config"]["denominators"], serde_json::json!([2, 4]));
    let transcript = std::fs::read_to_string(session_dir.join("transcript.jsonl")).unwrap();
    assert_eq!(transcript.lines().count(), 1);
    assert!(transcript.starts_with(r#"{"id":1,"#));
}

#[test]
fn torn_final_line_is_dropped_on_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let store = SessionStore::open(dir.path()).unwrap();
        let id = store.create(config()).unwrap();
        store.answer(&id, 1, Preference::Indifferent).unwrap();
        id
    };
    let path = dir.path().join("sessions").join(&id).join("transcript.jsonl");
    OpenOptions::new().append(true).open(&path).unwrap().write_all(br#"{"id":2,"left":{"bra"#).unwrap();

    let store = SessionStore::open(dir.path()).unwrap();
    let (state, pending, answered) =
        store.with(&id, |s| (s.state(), s.pending.as_ref().map(|q| q.id), s.entries.len())).unwrap();
    assert_eq!((state, pending, answered), (SessionState::AwaitingAnswer, Some(2), 1));
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
    assert_eq!(store.answer(&id, 2, Preference::PreferLeft).unwrap(), SessionState::AwaitingAnswer);
}
