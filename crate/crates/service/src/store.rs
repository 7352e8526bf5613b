//! Sessions and their on-disk form.
//!
//! Each session lives in `<data-dir>/sessions/<id>/` as a `manifest.json` and
//! an append-only `transcript.jsonl`. The procedure itself keeps no state:
//! after every answer it is re-run on the recorded answers until it either
//! finishes or needs the next one, which is also how sessions come back
//! after a restart.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use reu_core::oracle::{PreferenceQuery, ReplayMode, ReplayOracle, SystemClock, TranscriptEntry};
use reu_core::procedure::{drive, Drive, FieldIssue, ProcedureConfig, ResultBundle};
use reu_core::Preference;

use crate::error::{ServiceError, ServiceResult};

/// Oracle label recorded for answers given through the service.
pub const ORACLE_LABEL: &str = "human";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    AwaitingAnswer,
    Done,
    /// The answers contradict the procedure's assumptions.
    Failed,
    Aborted,
}

impl SessionState {
    pub fn is_terminal(self) -> bool {
        self != SessionState::AwaitingAnswer
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub oracle: String,
    pub state: SessionState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten)]
    pub config: ProcedureConfig,
}

#[derive(Debug)]
pub struct Session {
    pub manifest: Manifest,
    pub entries: Vec<TranscriptEntry>,
    pub pending: Option<PreferenceQuery>,
    /// Final results when done, what is finished so far otherwise.
    pub results: ResultBundle,
    dir: PathBuf,
}

fn empty_bundle(cfg: &ProcedureConfig) -> ResultBundle {
    ResultBundle {
        procedure: cfg.name().into(),
        config_hash: cfg.hash(),
        samples: Vec::new(),
        risk_curve: None,
        estimates: Vec::new(),
        query_count: 0,
    }
}

impl Session {
    pub fn id(&self) -> &str {
        &self.manifest.id
    }

    pub fn state(&self) -> SessionState {
        self.manifest.state
    }

    pub fn config(&self) -> &ProcedureConfig {
        &self.manifest.config
    }

    /// Re-runs the procedure on the recorded answers.
    fn advance(&mut self) {
        if self.manifest.state == SessionState::Aborted {
            self.pending = None;
            return;
        }
        let mut oracle = ReplayOracle::new(self.entries.clone(), ReplayMode::Resume).labelled(ORACLE_LABEL);
        match drive(&self.manifest.config, &mut oracle, &SystemClock) {
            Ok(Drive::Done(out)) => {
                self.manifest.state = SessionState::Done;
                self.manifest.error = None;
                self.pending = None;
                self.results = out.bundle;
            }
            Ok(Drive::Pending { query, partial, .. }) => {
                self.manifest.state = SessionState::AwaitingAnswer;
                self.manifest.error = None;
                self.pending = Some(query);
                self.results = partial;
            }
            Err(e) => {
                self.manifest.state = SessionState::Failed;
                self.manifest.error = Some(e.to_string());
                self.pending = None;
                self.results.query_count = self.entries.len() as u64;
            }
        }
    }

    fn write_manifest(&self) -> ServiceResult<()> {
        let tmp = self.dir.join("manifest.json.tmp");
        let mut f = File::create(&tmp)?;
        serde_json::to_writer_pretty(&mut f, &self.manifest)?;
        f.write_all(b"\n")?;
        f.sync_all()?;
        fs::rename(tmp, self.dir.join("manifest.json"))?;
        Ok(())
    }

    fn append_entry(&self, entry: &TranscriptEntry) -> ServiceResult<()> {
        let mut line = serde_json::to_vec(entry)?;
        line.push(b'\n');
        let mut f = OpenOptions::new().create(true).append(true).open(self.dir.join("transcript.jsonl"))?;
        f.write_all(&line)?;
        f.sync_data()?;
        Ok(())
    }

    pub fn transcript_jsonl(&self) -> ServiceResult<Vec<u8>> {
        let mut out = Vec::new();
        reu_core::oracle::write_jsonl(&self.entries, &mut out)?;
        Ok(out)
    }
}

/// Reads a transcript, dropping a final line cut short by a crash.
fn read_transcript(path: &Path) -> ServiceResult<Vec<TranscriptEntry>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut raw = Vec::new();
    File::open(path)?.read_to_end(&mut raw)?;
    let complete = raw.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    if complete < raw.len() {
        tracing::warn!(path = %path.display(), "dropping incomplete final transcript line");
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(complete as u64)?;
        f.sync_all()?;
    }
    Ok(reu_core::oracle::read_jsonl(BufReader::new(&raw[..complete]))?)
}

pub struct SessionStore {
    root: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    /// Opens `data_dir`, creating it if needed, and rehydrates every stored session.
    pub fn open(data_dir: impl AsRef<Path>) -> ServiceResult<Self> {
        let root = data_dir.as_ref().join("sessions");
        fs::create_dir_all(&root)?;
        let mut sessions = HashMap::new();
        for dir in fs::read_dir(&root)? {
            let dir = dir?.path();
            let manifest_path = dir.join("manifest.json");
            if !manifest_path.is_file() {
                continue;
            }
            let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(&manifest_path)?))?;
            let entries = read_transcript(&dir.join("transcript.jsonl"))?;
            let mut session =
                Session { results: empty_bundle(&manifest.config), manifest, entries, pending: None, dir };
            let before = session.manifest.state;
            session.advance();
            if session.manifest.state != before {
                session.write_manifest()?;
            }
            tracing::info!(id = session.id(), state = ?session.state(), answers = session.entries.len(), "rehydrated session");
            sessions.insert(session.manifest.id.clone(), Arc::new(Mutex::new(session)));
        }
        Ok(SessionStore { root, sessions: RwLock::new(sessions) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn create(&self, config: ProcedureConfig) -> ServiceResult<String> {
        let issues: Vec<FieldIssue> = config.diagnostics();
        if !issues.is_empty() {
            return Err(ServiceError::InvalidConfig(issues));
        }
        let id = uuid::Uuid::new_v4().simple().to_string();
        let dir = self.root.join(&id);
        fs::create_dir_all(&dir)?;
        File::create(dir.join("transcript.jsonl"))?.sync_all()?;
        let manifest = Manifest {
            id: id.clone(),
            created_at: Utc::now(),
            oracle: ORACLE_LABEL.into(),
            state: SessionState::AwaitingAnswer,
            error: None,
            config,
        };
        let mut session =
            Session { results: empty_bundle(&manifest.config), manifest, entries: Vec::new(), pending: None, dir };
        session.advance();
        session.write_manifest()?;
        tracing::info!(id = %id, procedure = session.config().name(), "created session");
        self.sessions.write().expect("session map poisoned").insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn get(&self, id: &str) -> ServiceResult<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("session map poisoned").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Runs `f` with the session locked.
    pub fn with<T>(&self, id: &str, f: impl FnOnce(&Session) -> T) -> ServiceResult<T> {
        let session = self.get(id)?;
        let guard = session.lock().expect("session poisoned");
        Ok(f(&guard))
    }

    /// Records the answer to the pending query and advances the procedure.
    pub fn answer(&self, id: &str, query_id: u64, answer: Preference) -> ServiceResult<SessionState> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session poisoned");
        if s.state().is_terminal() {
            return Err(ServiceError::InvalidState { id: id.into(), state: s.state() });
        }
        let pending = s.pending.clone().expect("awaiting sessions hold a query");
        if pending.id != query_id {
            return Err(ServiceError::Conflict { expected: pending.id, got: query_id });
        }
        let entry = TranscriptEntry { id: pending.id, left: pending.left, right: pending.right, answer, t: Utc::now() };
        s.append_entry(&entry)?;
        s.entries.push(entry);
        s.advance();
        s.write_manifest()?;
        Ok(s.state())
    }

    pub fn abort(&self, id: &str) -> ServiceResult<SessionState> {
        let session = self.get(id)?;
        let mut s = session.lock().expect("session poisoned");
        if s.state().is_terminal() {
            return Err(ServiceError::InvalidState { id: id.into(), state: s.state() });
        }
        s.manifest.state = SessionState::Aborted;
        s.pending = None;
        s.write_manifest()?;
        Ok(s.state())
    }
}
