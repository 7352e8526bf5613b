//! Sources of answers to preference queries.

mod interview;
mod transcript;

use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Agent, Gamble};
use crate::error::{Error, OracleError, Result};
use crate::reu::{compare, Preference};

pub use interview::{AtomLabels, Describe, Interview};
pub use transcript::{
    read_jsonl, write_jsonl, Clock, LogicalClock, SystemClock, Transcript, TranscriptEntry, TranscriptMeta,
};

/// Indifference band used by simulated agents.
pub const SIMULATED_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreferenceQuery {
    pub id: u64,
    pub left: Gamble,
    pub right: Gamble,
    pub human_text: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub query_count: u64,
    pub repeats_used: u64,
}

pub trait Oracle {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError>;

    fn kind(&self) -> String;

    /// Extra answers drawn beyond one per query.
    fn repeats_used(&self) -> u64 {
        0
    }

    /// Wall time recorded for the last answer, when replaying a transcript.
    fn recorded_at(&self) -> Option<DateTime<Utc>> {
        None
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        (**self).ask(query)
    }
    fn kind(&self) -> String {
        (**self).kind()
    }
    fn repeats_used(&self) -> u64 {
        (**self).repeats_used()
    }
    fn recorded_at(&self) -> Option<DateTime<Utc>> {
        (**self).recorded_at()
    }
}

/// Answers by evaluating both gambles for a known agent.
#[derive(Clone, Debug)]
pub struct SimulatedOracle {
    pub agent: Agent,
    pub tol: f64,
}

impl SimulatedOracle {
    pub fn new(agent: Agent) -> Self {
        SimulatedOracle { agent, tol: SIMULATED_TOL }
    }

    pub fn truth(&self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        compare(&self.agent, &query.left, &query.right, self.tol).map_err(|e| OracleError::Evaluation(e.to_string()))
    }
}

impl Oracle for SimulatedOracle {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        self.truth(query)
    }

    fn kind(&self) -> String {
        "simulated".into()
    }
}

/// A simulated agent whose strict answers are each flipped with probability
/// `epsilon`; every strict query is put `2 * repeats + 1` times and the
/// majority wins. Indifference is reported as is.
#[derive(Clone, Debug)]
pub struct NoisyOracle {
    inner: SimulatedOracle,
    epsilon: f64,
    repeats: u32,
    rng: ChaCha8Rng,
    used: u64,
}

impl NoisyOracle {
    pub fn new(agent: Agent, epsilon: f64, repeats: u32, seed: u64) -> Result<Self> {
        if !(0.0..=0.5).contains(&epsilon) {
            return Err(Error::Validation(format!("noise rate must lie in [0, 0.5], got {epsilon}")));
        }
        Ok(NoisyOracle {
            inner: SimulatedOracle::new(agent),
            epsilon,
            repeats,
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: 0,
        })
    }
}

impl Oracle for NoisyOracle {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        let truth = self.inner.truth(query)?;
        if !truth.is_strict() {
            return Ok(truth);
        }
        let draws = 2 * self.repeats + 1;
        let flips = (0..draws).filter(|_| self.rng.random_bool(self.epsilon)).count() as u32;
        self.used += u64::from(draws - 1);
        Ok(if flips > self.repeats { truth.flipped() } else { truth })
    }

    fn kind(&self) -> String {
        format!("noisy(epsilon={}, repeats={})", self.epsilon, self.repeats)
    }

    fn repeats_used(&self) -> u64 {
        self.used
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplayMode {
    /// Running past the end of the transcript is a divergence.
    Strict,
    /// Running past the end yields [`OracleError::AnswerPending`].
    Resume,
}

/// Feeds back the answers of a recorded transcript, checking that each query
/// matches the one originally asked.
#[derive(Clone, Debug)]
pub struct ReplayOracle {
    entries: Vec<TranscriptEntry>,
    pos: usize,
    mode: ReplayMode,
    kind: String,
}

impl ReplayOracle {
    pub fn new(entries: Vec<TranscriptEntry>, mode: ReplayMode) -> Self {
        ReplayOracle { entries, pos: 0, mode, kind: "replay".into() }
    }

    /// Reports `kind` instead of "replay", so a resumed session keeps its label.
    pub fn labelled(mut self, kind: impl Into<String>) -> Self {
        self.kind = kind.into();
        self
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.entries.len() - self.pos
    }
}

impl Oracle for ReplayOracle {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        let step = self.pos as u64 + 1;
        let Some(entry) = self.entries.get(self.pos) else {
            return match self.mode {
                ReplayMode::Strict => Err(OracleError::ReplayDivergence {
                    step,
                    reason: format!("transcript ends after {} answers but query {} was asked", self.pos, query.id),
                }),
                ReplayMode::Resume => Err(OracleError::AnswerPending(Box::new(query.clone()))),
            };
        };
        if entry.id != query.id {
            return Err(OracleError::ReplayDivergence {
                step,
                reason: format!("recorded id {} but procedure asked id {}", entry.id, query.id),
            });
        }
        if entry.left != query.left || entry.right != query.right {
            return Err(OracleError::ReplayDivergence {
                step,
                reason: format!("query {} asks about different gambles than recorded", query.id),
            });
        }
        self.pos += 1;
        Ok(entry.answer)
    }

    fn kind(&self) -> String {
        self.kind.clone()
    }

    fn recorded_at(&self) -> Option<DateTime<Utc>> {
        self.pos.checked_sub(1).map(|i| self.entries[i].t)
    }
}

/// An oracle answered from another thread, typically by a person.
pub struct SessionOracle {
    queries: Sender<PreferenceQuery>,
    answers: Receiver<(u64, Preference)>,
    timeout: Option<Duration>,
}

/// The answering end of a [`SessionOracle`].
pub struct SessionHandle {
    pub queries: Receiver<PreferenceQuery>,
    pub answers: Sender<(u64, Preference)>,
}

impl SessionOracle {
    pub fn channel(timeout: Option<Duration>) -> (SessionOracle, SessionHandle) {
        let (qtx, qrx) = mpsc::channel();
        let (atx, arx) = mpsc::channel();
        (SessionOracle { queries: qtx, answers: arx, timeout }, SessionHandle { queries: qrx, answers: atx })
    }
}

impl Oracle for SessionOracle {
    fn ask(&mut self, query: &PreferenceQuery) -> Result<Preference, OracleError> {
        self.queries.send(query.clone()).map_err(|_| OracleError::SessionTerminated)?;
        loop {
            let (id, answer) = match self.timeout {
                Some(t) => self.answers.recv_timeout(t).map_err(|e| match e {
                    RecvTimeoutError::Timeout => OracleError::Timeout,
                    RecvTimeoutError::Disconnected => OracleError::SessionTerminated,
                })?,
                None => self.answers.recv().map_err(|_| OracleError::SessionTerminated)?,
            };
            // Late answers to earlier queries are dropped.
            if id == query.id {
                return Ok(answer);
            }
        }
    }

    fn kind(&self) -> String {
        "session".into()
    }
}
