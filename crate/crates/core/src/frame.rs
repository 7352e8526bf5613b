//! A world of named cells crossed with a ticket lottery.
//!
//! Atom `c * tickets + t` is "cell `c` obtains and ticket `t` is drawn". The
//! cells carry whatever the agent is uncertain about; the tickets supply fair
//! lotteries of every denominator dividing `tickets`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::domain::{Event, ProbabilityModel};
use crate::error::{Error, Result};
use crate::oracle::Describe;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    cells: Vec<String>,
    tickets: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FrameRepr {
    cells: Vec<String>,
    tickets: u32,
}

/// A partition of the space into `n` events, each offered as one ticket block.
#[derive(Clone, Debug, PartialEq)]
pub struct Lottery {
    pub n: u32,
    pub events: Vec<Event>,
}

pub trait LotteryProvider {
    /// Candidate `n`-way partitions, in the order they should be tried.
    fn candidates(&self, n: u32) -> Vec<Lottery>;
}

impl Frame {
    pub fn new(cells: Vec<String>, tickets: u32) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Validation("frame needs at least one cell".into()));
        }
        if tickets == 0 {
            return Err(Error::Validation("frame needs at least one ticket".into()));
        }
        for (i, c) in cells.iter().enumerate() {
            if cells[..i].contains(c) {
                return Err(Error::Validation(format!("duplicate cell `{c}`")));
            }
        }
        Ok(Frame { cells, tickets })
    }

    /// A single cell, for measuring risk attitudes alone.
    pub fn lottery_only(tickets: u32) -> Result<Self> {
        Frame::new(vec!["world".into()], tickets)
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn tickets(&self) -> u32 {
        self.tickets
    }

    pub fn n_atoms(&self) -> usize {
        self.cells.len() * self.tickets as usize
    }

    pub fn cell_index(&self, label: &str) -> Result<usize> {
        self.cells.iter().position(|c| c == label).ok_or_else(|| Error::Validation(format!("unknown cell `{label}`")))
    }

    /// The event that one of the named cells obtains.
    pub fn cells_event<S: AsRef<str>>(&self, labels: &[S]) -> Result<Event> {
        let m = self.tickets as usize;
        let mut ranges = Vec::with_capacity(labels.len());
        for label in labels {
            let c = self.cell_index(label.as_ref())?;
            ranges.push(c * m..(c + 1) * m);
        }
        Ok(Event::from_ranges(ranges))
    }

    /// The event that the drawn ticket lies in `block`, whatever the cell.
    pub fn tickets_event(&self, block: Range<u32>) -> Event {
        let m = self.tickets as usize;
        let (a, b) = (block.start as usize, (block.end.min(self.tickets)) as usize);
        if a >= b {
            return Event::empty();
        }
        Event::from_ranges((0..self.cells.len()).map(|c| c * m + a..c * m + b))
    }

    /// Tickets split into `n` equal consecutive blocks.
    pub fn lottery(&self, n: u32) -> Result<Lottery> {
        if n == 0 || !self.tickets.is_multiple_of(n) {
            return Err(Error::Validation(format!("{n} does not divide the {} tickets", self.tickets)));
        }
        let size = self.tickets / n;
        Ok(Lottery { n, events: (0..n).map(|i| self.tickets_event(i * size..(i + 1) * size)).collect() })
    }

    /// Product measure: cell probabilities times ticket weights (uniform by default).
    pub fn model(&self, cell_probs: &[f64], ticket_weights: Option<&[f64]>) -> Result<ProbabilityModel> {
        if cell_probs.len() != self.cells.len() {
            return Err(Error::InvalidModel(format!(
                "{} cell probabilities for {} cells",
                cell_probs.len(),
                self.cells.len()
            )));
        }
        let m = self.tickets as usize;
        let uniform = vec![1.0 / m as f64; m];
        let tw = ticket_weights.unwrap_or(&uniform);
        if tw.len() != m {
            return Err(Error::InvalidModel(format!("{} ticket weights for {m} tickets", tw.len())));
        }
        let weights = cell_probs.iter().flat_map(|p| tw.iter().map(move |w| p * w)).collect();
        ProbabilityModel::new(weights)
    }

    /// Tickets (0-based) the event contains in every cell, if it has that shape.
    fn ticket_pattern(&self, event: &Event) -> Option<Event> {
        let m = self.tickets as usize;
        let first = event.intersection(&Event::span(0..m));
        if first.is_empty() {
            return None;
        }
        let replicated = Event::from_ranges(
            (0..self.cells.len()).flat_map(|c| first.ranges().iter().map(move |r| c * m + r.start..c * m + r.end)),
        );
        (replicated == *event).then_some(first)
    }

    /// Cells wholly inside the event, if the event is a union of cells.
    fn cell_pattern(&self, event: &Event) -> Option<Vec<&str>> {
        let m = self.tickets as usize;
        let mut cells = Vec::new();
        for r in event.ranges() {
            if r.start % m != 0 || r.end % m != 0 {
                return None;
            }
            cells.extend((r.start / m..r.end / m).map(|c| self.cells[c].as_str()));
        }
        Some(cells)
    }
}

impl TryFrom<FrameRepr> for Frame {
    type Error = Error;
    fn try_from(repr: FrameRepr) -> Result<Self> {
        Frame::new(repr.cells, repr.tickets)
    }
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> Self {
        FrameRepr { cells: f.cells, tickets: f.tickets }
    }
}

impl LotteryProvider for Frame {
    fn candidates(&self, n: u32) -> Vec<Lottery> {
        self.lottery(n).into_iter().collect()
    }
}

/// Fixed candidate list, tried in order. Useful for offering biased partitions.
#[derive(Clone, Debug, Default)]
pub struct CandidatePool {
    pub lotteries: Vec<Lottery>,
}

impl LotteryProvider for CandidatePool {
    fn candidates(&self, n: u32) -> Vec<Lottery> {
        self.lotteries.iter().filter(|l| l.n == n).cloned().collect()
    }
}

impl Describe for Frame {
    fn describe(&self, event: &Event) -> String {
        if event.is_empty() {
            return "never".into();
        }
        if *event == Event::full(self.n_atoms()) {
            return "always".into();
        }
        if self.tickets > 1 || self.cells.len() == 1 {
            if let Some(t) = self.ticket_pattern(event) {
                let blocks: Vec<String> = t
                    .ranges()
                    .iter()
                    .map(|r| {
                        if r.end - r.start == 1 {
                            format!("{}", r.start + 1)
                        } else {
                            format!("{}\u{2013}{}", r.start + 1, r.end)
                        }
                    })
                    .collect();
                let noun = if t.len() == 1 { "ticket" } else { "one of tickets" };
                return format!("{noun} {} of {} is drawn", blocks.join(", "), self.tickets);
            }
        }
        if let Some(cells) = self.cell_pattern(event) {
            return cells.join(" or ");
        }
        format!("atom {event}")
    }
}
