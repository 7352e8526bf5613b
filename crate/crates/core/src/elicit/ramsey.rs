use serde::{Deserialize, Serialize};

use super::Prizes;
use crate::domain::{Event, Gamble, Outcome, UtilityFunction};
use crate::error::{Error, Result};
use crate::oracle::Interview;
use crate::reu::Preference;

/// A certain amount the agent values like `{best on E; worst otherwise}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Indifference {
    pub money: f64,
    /// Final money bracket; collapses to `money` on an explicit indifference.
    pub bracket: (f64, f64),
    pub query_ids: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReading {
    pub indifference: Indifference,
    pub weight: f64,
    /// Weights at the ends of the money bracket.
    pub weight_bracket: (f64, f64),
}

/// Bisects on the certain amount `m` in `[worst, best]`, asking
/// `m for certain` vs `{best on E; worst otherwise}` until the bracket is no
/// wider than `epsilon` or the agent reports indifference. The end points
/// themselves are only put to the agent if the bracket runs into them.
pub fn find_indifference_money(
    iv: &mut Interview<'_>,
    event: &Event,
    prizes: Prizes,
    u: &UtilityFunction,
    epsilon: f64,
) -> Result<Indifference> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Validation(format!("money tolerance must be positive, got {epsilon}")));
    }
    prizes.utilities(u)?;
    let n = iv.n_atoms();
    let (b, w) = (prizes.best, prizes.worst);
    let gamble = Gamble::binary(event, Outcome::Money(b), Outcome::Money(w), n);
    let first = iv.next_id();
    let ids = |iv: &Interview<'_>| (first..iv.next_id()).collect::<Vec<u64>>();
    let exact = |m: f64, iv: &Interview<'_>| Indifference { money: m, bracket: (m, m), query_ids: ids(iv) };

    let (mut lo, mut hi) = (w, b);
    while hi - lo > epsilon {
        let m = lo + (hi - lo) / 2.0;
        if m <= lo || m >= hi {
            break;
        }
        match iv.ask(Gamble::constant(Outcome::Money(m), n), gamble.clone())? {
            Preference::PreferLeft => hi = m,
            Preference::PreferRight => lo = m,
            Preference::Indifferent => return Ok(exact(m, iv)),
        }
    }
    if hi == b {
        match iv.ask(Gamble::constant(Outcome::Money(b), n), gamble.clone())? {
            Preference::PreferRight => {
                return Err(Error::MonotonicityViolation(format!(
                    "gamble preferred to its best prize ${b} for certain"
                )))
            }
            Preference::Indifferent => return Ok(exact(b, iv)),
            Preference::PreferLeft => {}
        }
    }
    if lo == w {
        match iv.ask(Gamble::constant(Outcome::Money(w), n), gamble)? {
            Preference::PreferLeft => {
                return Err(Error::MonotonicityViolation(format!(
                    "worst prize ${w} for certain preferred to the gamble"
                )))
            }
            Preference::Indifferent => return Ok(exact(w, iv)),
            Preference::PreferRight => {}
        }
    }
    Ok(Indifference { money: lo + (hi - lo) / 2.0, bracket: (lo, hi), query_ids: ids(iv) })
}

/// `(u(m) - u(worst)) / (u(best) - u(worst))` at the indifference amount `m`,
/// which is `r(p(E))` for a risk-weighted expected-utility agent.
pub fn decision_weight(
    iv: &mut Interview<'_>,
    event: &Event,
    prizes: Prizes,
    u: &UtilityFunction,
    epsilon: f64,
) -> Result<WeightReading> {
    let (uw, ub) = prizes.utilities(u)?;
    let found = find_indifference_money(iv, event, prizes, u, epsilon)?;
    let scale = |m: f64| -> Result<f64> { Ok(((u.money(m)? - uw) / (ub - uw)).clamp(0.0, 1.0)) };
    let weight = scale(found.money)?;
    let weight_bracket = (scale(found.bracket.0)?, scale(found.bracket.1)?);
    Ok(WeightReading { indifference: found, weight, weight_bracket })
}
