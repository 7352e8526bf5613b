use crate::domain::{Event, Gamble};
use crate::elicit::Progress;
use crate::error::Result;
use crate::reu::Preference;

use super::transcript::{Clock, TranscriptEntry};
use super::{Oracle, PreferenceQuery};

/// Renders events for people answering queries.
pub trait Describe {
    fn describe(&self, event: &Event) -> String;
}

/// Fallback that names atoms by index.
#[derive(Clone, Copy, Debug, Default)]
pub struct AtomLabels;

impl Describe for AtomLabels {
    fn describe(&self, event: &Event) -> String {
        if event.is_empty() {
            "never".into()
        } else {
            format!("atom {event}")
        }
    }
}

/// Serial query loop against one oracle: numbers queries, records the
/// transcript and collects finished measurements as they come in.
pub struct Interview<'a> {
    oracle: &'a mut dyn Oracle,
    clock: &'a dyn Clock,
    describe: &'a dyn Describe,
    n_atoms: usize,
    entries: Vec<TranscriptEntry>,
    pub progress: Progress,
}

impl<'a> Interview<'a> {
    pub fn new(oracle: &'a mut dyn Oracle, clock: &'a dyn Clock, describe: &'a dyn Describe, n_atoms: usize) -> Self {
        Interview { oracle, clock, describe, n_atoms, entries: Vec::new(), progress: Progress::default() }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Id the next query will carry. Ids start at 1.
    pub fn next_id(&self) -> u64 {
        self.entries.len() as u64 + 1
    }

    pub fn query_count(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<TranscriptEntry> {
        self.entries
    }

    pub fn oracle_kind(&self) -> String {
        self.oracle.kind()
    }

    pub fn repeats_used(&self) -> u64 {
        self.oracle.repeats_used()
    }

    pub fn render(&self, g: &Gamble) -> String {
        match g.branches.as_slice() {
            [only] => format!("{} for certain", only.outcome),
            [a, b] => format!("{} if {}, otherwise {}", a.outcome, self.describe.describe(&a.event), b.outcome),
            many => many
                .iter()
                .map(|b| format!("{} if {}", b.outcome, self.describe.describe(&b.event)))
                .collect::<Vec<_>>()
                .join("; "),
        }
    }

    pub fn ask(&mut self, left: Gamble, right: Gamble) -> Result<Preference> {
        left.validate(self.n_atoms)?;
        right.validate(self.n_atoms)?;
        let human_text = format!("Left: {}. Right: {}.", self.render(&left), self.render(&right));
        let query = PreferenceQuery { id: self.next_id(), left, right, human_text };
        let answer = self.oracle.ask(&query)?;
        let t = self.oracle.recorded_at().unwrap_or_else(|| self.clock.stamp(query.id));
        self.entries.push(TranscriptEntry { id: query.id, left: query.left, right: query.right, answer, t });
        Ok(answer)
    }
}
