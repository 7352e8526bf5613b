use serde::{Deserialize, Serialize};

use super::space::Event;
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Subjective probabilities over the atoms of a finite sample space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityModel {
    weights: Vec<f64>,
    /// `prefix[i]` is the compensated sum of `weights[..i]`.
    prefix: Vec<f64>,
}

impl ProbabilityModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("no atoms".into()));
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidModel(format!("atom {i} has weight {w}")));
        }
        let prefix = compensated_prefix(&weights);
        let total = prefix[weights.len()];
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        Ok(ProbabilityModel { weights, prefix })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModel("no atoms".into()));
        }
        ProbabilityModel::new(vec![1.0 / n as f64; n])
    }

    /// Rescales arbitrary non-negative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidModel("weights do not have a positive sum".into()));
        }
        ProbabilityModel::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn event_probability(&self, event: &Event) -> Result<f64> {
        event.check(self.n_atoms())?;
        let p: f64 = event.ranges().iter().map(|r| self.prefix[r.end] - self.prefix[r.start]).sum();
        Ok(p.clamp(0.0, 1.0))
    }
}

impl TryFrom<Vec<f64>> for ProbabilityModel {
    type Error = Error;
    fn try_from(weights: Vec<f64>) -> Result<Self> {
        ProbabilityModel::new(weights)
    }
}

impl From<ProbabilityModel> for Vec<f64> {
    fn from(model: ProbabilityModel) -> Self {
        model.weights
    }
}

fn compensated_prefix(weights: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    prefix.push(0.0);
    for &w in weights {
        let t = sum + w;
        if sum.abs() >= w.abs() {
            carry += (sum - t) + w;
        } else {
            carry += (w - t) + sum;
        }
        sum = t;
        prefix.push(sum + carry);
    }
    prefix
}
