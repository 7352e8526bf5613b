use std::fmt;

use serde::{Deserialize, Serialize};

use super::space::Event;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Money(f64),
    Label(String),
}

impl Outcome {
    pub fn money(&self) -> Option<f64> {
        match self {
            Outcome::Money(x) => Some(*x),
            Outcome::Label(_) => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Money(x) if *x < 0.0 => write!(f, "-${:.2}", -x),
            Outcome::Money(x) => write!(f, "${x:.2}"),
            Outcome::Label(name) => f.write_str(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub event: Event,
    pub outcome: Outcome,
}

/// Outcomes assigned to the cells of a partition of the sample space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gamble {
    pub branches: Vec<Branch>,
}

impl Gamble {
    pub fn new(branches: Vec<Branch>, n_atoms: usize) -> Result<Self> {
        let g = Gamble { branches };
        g.validate(n_atoms)?;
        Ok(g)
    }

    /// `o` no matter what.
    pub fn constant(outcome: Outcome, n_atoms: usize) -> Self {
        Gamble { branches: vec![Branch { event: Event::full(n_atoms), outcome }] }
    }

    /// `best` if `event` obtains, `worst` otherwise.
    pub fn binary(event: &Event, best: Outcome, worst: Outcome, n_atoms: usize) -> Self {
        Gamble {
            branches: vec![
                Branch { event: event.clone(), outcome: best },
                Branch { event: event.complement(n_atoms), outcome: worst },
            ],
        }
    }

    pub fn validate(&self, n_atoms: usize) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::InvalidGamble("no branches".into()));
        }
        let mut covered = 0usize;
        for (i, b) in self.branches.iter().enumerate() {
            b.event.check(n_atoms)?;
            if let Outcome::Money(x) = b.outcome {
                if !x.is_finite() {
                    return Err(Error::InvalidGamble(format!("branch {i}: non-finite amount")));
                }
            }
            for (j, other) in self.branches[..i].iter().enumerate() {
                if !b.event.is_disjoint(&other.event) {
                    return Err(Error::InvalidGamble(format!("branches {j} and {i} overlap")));
                }
            }
            covered += b.event.len();
        }
        if covered != n_atoms {
            return Err(Error::InvalidGamble(format!("branches cover {covered} of {n_atoms} atoms")));
        }
        Ok(())
    }
}
