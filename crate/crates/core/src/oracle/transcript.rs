use std::io::{BufRead, Write};

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::domain::Gamble;
use crate::error::{Error, Result};
use crate::reu::Preference;

/// One line of a JSON Lines transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub id: u64,
    pub left: Gamble,
    pub right: Gamble,
    pub answer: Preference,
    pub t: DateTime<Utc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptMeta {
    pub oracle: String,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub meta: TranscriptMeta,
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, out: W) -> Result<()> {
        write_jsonl(&self.entries, out)
    }
}

pub fn write_jsonl<W: Write>(entries: &[TranscriptEntry], mut out: W) -> Result<()> {
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Parses JSON Lines, skipping blank lines, and checks ids increase.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<TranscriptEntry>> {
    let mut entries: Vec<TranscriptEntry> = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: TranscriptEntry = serde_json::from_str(&line)
            .map_err(|err| Error::Validation(format!("transcript line {}: {err}", lineno + 1)))?;
        if let Some(prev) = entries.last() {
            if e.id <= prev.id {
                return Err(Error::Validation(format!(
                    "transcript line {}: id {} does not follow {}",
                    lineno + 1,
                    e.id,
                    prev.id
                )));
            }
        }
        entries.push(e);
    }
    Ok(entries)
}

/// Source of answer timestamps.
pub trait Clock: Send + Sync {
    fn stamp(&self, query_id: u64) -> DateTime<Utc>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn stamp(&self, _query_id: u64) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Query `i` is stamped `epoch + i` seconds, so simulated runs write
/// byte-identical transcripts.
#[derive(Clone, Copy, Debug)]
pub struct LogicalClock {
    pub epoch: DateTime<Utc>,
}

impl Default for LogicalClock {
    fn default() -> Self {
        LogicalClock { epoch: DateTime::UNIX_EPOCH }
    }
}

impl Clock for LogicalClock {
    fn stamp(&self, query_id: u64) -> DateTime<Utc> {
        self.epoch + TimeDelta::seconds(query_id as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Event, Outcome};

    fn sample() -> Vec<TranscriptEntry> {
        let clock = LogicalClock::default();
        (1..=3)
            .map(|id| TranscriptEntry {
                id,
                left: Gamble::constant(Outcome::Money(0.1 * id as f64 + 1e-17), 4),
                right: Gamble::binary(&Event::span(0..2), Outcome::Money(1.0), Outcome::Money(0.0), 4),
                answer: [Preference::PreferLeft, Preference::PreferRight, Preference::Indifferent][id as usize - 1],
                t: clock.stamp(id),
            })
            .collect()
    }

    #[test]
    fn jsonl_round_trip_is_lossless() {
        let mut buf = Vec::new();
        write_jsonl(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        let keys: Vec<&str> = first.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["answer", "id", "left", "right", "t"]);
        assert_eq!(first["answer"], "left");
        assert_eq!(first["t"], "1970-01-01T00:00:01Z");
        assert_eq!(read_jsonl(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn rejects_out_of_order_ids() {
        let mut entries = sample();
        entries.swap(0, 1);
        let mut buf = Vec::new();
        write_jsonl(&entries, &mut buf).unwrap();
        assert!(read_jsonl(&buf[..]).is_err());
    }
}
