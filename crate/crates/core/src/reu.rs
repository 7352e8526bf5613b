//! Expected utility and risk-weighted expected utility of gambles.

use serde::{Deserialize, Serialize};

use crate::domain::{Agent, Event, Gamble, Outcome, UtilityFunction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preference {
    #[serde(rename = "left")]
    PreferLeft,
    #[serde(rename = "right")]
    PreferRight,
    #[serde(rename = "indifferent")]
    Indifferent,
}

impl Preference {
    pub fn flipped(self) -> Self {
        match self {
            Preference::PreferLeft => Preference::PreferRight,
            Preference::PreferRight => Preference::PreferLeft,
            Preference::Indifferent => Preference::Indifferent,
        }
    }

    pub fn is_strict(self) -> bool {
        self != Preference::Indifferent
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalEntry {
    pub outcome: Outcome,
    pub event: Event,
    pub utility: f64,
}

/// Branches sorted by strictly increasing utility, ties merged.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalGamble {
    pub entries: Vec<CanonicalEntry>,
}

pub fn canonicalize(g: &Gamble, u: &UtilityFunction) -> Result<CanonicalGamble> {
    let mut entries = g
        .branches
        .iter()
        .map(|b| {
            Ok(CanonicalEntry { outcome: b.outcome.clone(), event: b.event.clone(), utility: u.utility(&b.outcome)? })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| a.utility.total_cmp(&b.utility));
    let mut merged: Vec<CanonicalEntry> = Vec::with_capacity(entries.len());
    for e in entries {
        match merged.last_mut() {
            Some(last) if last.utility == e.utility => last.event = last.event.union(&e.event),
            _ => merged.push(e),
        }
    }
    Ok(CanonicalGamble { entries: merged })
}

pub fn eu(agent: &Agent, g: &Gamble) -> Result<f64> {
    g.validate(agent.n_atoms())?;
    g.branches
        .iter()
        .try_fold(0.0, |acc, b| Ok(acc + agent.p.event_probability(&b.event)? * agent.u.utility(&b.outcome)?))
}

/// Rank-dependent evaluation in telescoped form:
/// `u(o_1) + sum_{j>=2} r(P(E_j or better)) * (u(o_j) - u(o_{j-1}))`.
pub fn reu(agent: &Agent, g: &Gamble) -> Result<f64> {
    g.validate(agent.n_atoms())?;
    let c = canonicalize(g, &agent.u)?;
    let probs = c.entries.iter().map(|e| agent.p.event_probability(&e.event)).collect::<Result<Vec<f64>>>()?;
    let mut value = c.entries[0].utility;
    let mut tail = 0.0;
    // Walk from the best outcome down so `tail` is P(outcome j or better).
    for j in (1..c.entries.len()).rev() {
        tail += probs[j];
        let step = c.entries[j].utility - c.entries[j - 1].utility;
        value += agent.r.eval(tail.min(1.0)) * step;
    }
    Ok(value)
}

pub fn compare(agent: &Agent, f: &Gamble, g: &Gamble, tol: f64) -> Result<Preference> {
    if !(tol >= 0.0) {
        return Err(Error::Validation(format!("indifference tolerance must be non-negative, got {tol}")));
    }
    let (a, b) = (reu(agent, f)?, reu(agent, g)?);
    Ok(if (a - b).abs() <= tol {
        Preference::Indifferent
    } else if a > b {
        Preference::PreferLeft
    } else {
        Preference::PreferRight
    })
}
