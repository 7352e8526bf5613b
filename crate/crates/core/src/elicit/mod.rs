//! Measuring an agent's risk function and subjective probabilities from
//! answers to preference queries, given the agent's utility function.

mod grid;
mod lottery;
mod probability;
mod ramsey;

use serde::{Deserialize, Serialize};

use crate::domain::UtilityFunction;
use crate::error::{Error, Result};

pub use grid::{measure_risk_grid, reconstruct_risk, with_anchors, DecisionWeightSample, Provenance, RiskGridSpec};
pub use lottery::{better_prize_half, check_partition, lottery_event, verify_fair_lottery};
pub use probability::{
    invert_risk, probability_by_inversion, probability_by_squeeze, EstimateMethod, ProbabilityEstimate, SqueezeSpec,
    INVERSION_TOL,
};
pub use ramsey::{decision_weight, find_indifference_money, Indifference, WeightReading};

/// The good and bad money prizes of every Ramsey gamble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prizes {
    pub best: f64,
    pub worst: f64,
}

impl Default for Prizes {
    fn default() -> Self {
        Prizes { best: 1.0, worst: 0.0 }
    }
}

impl Prizes {
    /// Utilities `(u(worst), u(best))`, which must be strictly ordered.
    pub fn utilities(&self, u: &UtilityFunction) -> Result<(f64, f64)> {
        let (uw, ub) = (u.money(self.worst)?, u.money(self.best)?);
        if !(uw < ub) {
            return Err(Error::Validation(format!(
                "prize ${} must be strictly better than ${} (utilities {ub} and {uw})",
                self.best, self.worst
            )));
        }
        Ok((uw, ub))
    }
}

/// Measurements finished so far, kept for reporting partial results.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub samples: Vec<DecisionWeightSample>,
    pub estimates: Vec<ProbabilityEstimate>,
}
