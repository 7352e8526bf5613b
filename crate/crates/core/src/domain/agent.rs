use std::path::Path;

use serde::{Deserialize, Serialize};

use super::probability::ProbabilityModel;
use super::risk::RiskFunction;
use super::space::SampleSpace;
use super::utility::UtilityFunction;
use crate::error::{Error, Result};

/// A risk-weighted expected-utility maximizer.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub p: ProbabilityModel,
    pub u: UtilityFunction,
    pub r: RiskFunction,
}

impl Agent {
    pub fn new(p: ProbabilityModel, u: UtilityFunction, r: RiskFunction) -> Self {
        Agent { p, u, r }
    }

    pub fn n_atoms(&self) -> usize {
        self.p.n_atoms()
    }

    pub fn with_risk(&self, r: RiskFunction) -> Self {
        Agent { r, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Atoms {
    Count(usize),
    Labels(Vec<String>),
}

/// On-disk agent description. `atoms` may be a label list or a count
/// (labels `1..=n`); `weights` defaults to uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentFile {
    pub atoms: Atoms,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub utility: UtilityFunction,
    pub risk: RiskFunction,
}

impl AgentFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn space(&self) -> Result<SampleSpace> {
        match &self.atoms {
            Atoms::Count(n) => SampleSpace::numbered(*n),
            Atoms::Labels(labels) => SampleSpace::new(labels.clone()),
        }
    }

    pub fn model(&self) -> Result<ProbabilityModel> {
        let n = self.space()?.n_atoms();
        match &self.weights {
            None => ProbabilityModel::uniform(n),
            Some(w) if w.len() != n => Err(Error::InvalidModel(format!("{} weights for {} atoms", w.len(), n))),
            Some(w) => ProbabilityModel::new(w.clone()),
        }
    }

    pub fn agent(&self) -> Result<Agent> {
        Ok(Agent::new(self.model()?, self.utility.clone(), self.risk.clone()))
    }
}
