use serde::{Deserialize, Serialize};

use super::lottery::{lottery_event, verify_fair_lottery};
use super::ramsey::decision_weight;
use super::Prizes;
use crate::domain::{Event, Gamble, Outcome, RiskFunction, UtilityFunction};
use crate::error::{Error, Result};
use crate::frame::{Lottery, LotteryProvider};
use crate::oracle::Interview;
use crate::rational::Rational;
use crate::reu::Preference;

/// Tolerance of the numerical inversion of `r`.
pub const INVERSION_TOL: f64 = 1e-12;

/// Resolution used to round inversion brackets outward to rationals.
const BRACKET_GRID: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Squeeze,
    Inversion,
    ExactLottery,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityEstimate {
    pub target: String,
    pub value: f64,
    pub bracket: (Rational, Rational),
    pub method: EstimateMethod,
    pub query_count: u64,
    pub converged: bool,
    /// Squeeze bracket after each query.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<(Rational, Rational)>,
}

impl ProbabilityEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1.gap(self.bracket.0).to_f64()
    }
}

pub fn invert_risk(r: &RiskFunction, weight: f64, tol: f64) -> Result<f64> {
    r.invert(weight, tol)
}

fn floor_grid(q: f64) -> Rational {
    let d = BRACKET_GRID;
    Rational::new(((q.clamp(0.0, 1.0) * d as f64).floor() as u64).min(d), d).expect("within [0, 1]")
}

fn ceil_grid(q: f64) -> Rational {
    let d = BRACKET_GRID;
    Rational::new(((q.clamp(0.0, 1.0) * d as f64).ceil() as u64).min(d), d).expect("within [0, 1]")
}

/// `r^-1` of the measured decision weight of `E`.
///
/// The bracket is the knot interval holding the estimate when `r` is
/// tabulated; otherwise the inverse image of the weight bracket, rounded
/// outward to multiples of `2^-32`.
pub fn probability_by_inversion(
    iv: &mut Interview<'_>,
    target: &str,
    event: &Event,
    r: &RiskFunction,
    prizes: Prizes,
    u: &UtilityFunction,
    epsilon: f64,
) -> Result<ProbabilityEstimate> {
    let reading = decision_weight(iv, event, prizes, u, epsilon)?;
    let value = invert_risk(r, reading.weight, INVERSION_TOL)?;
    let bracket = match r {
        RiskFunction::Tabulated(curve) => {
            let i = curve.segment(value);
            (curve.knots()[i].prob, curve.knots()[i + 1].prob)
        }
        _ => {
            let lo = invert_risk(r, reading.weight_bracket.0, INVERSION_TOL)?;
            let hi = invert_risk(r, reading.weight_bracket.1, INVERSION_TOL)?;
            (floor_grid(lo.min(value)), ceil_grid(hi.max(value)))
        }
    };
    let estimate = ProbabilityEstimate {
        target: target.to_string(),
        value,
        bracket,
        method: EstimateMethod::Inversion,
        query_count: reading.indifference.query_ids.len() as u64,
        converged: true,
        trace: Vec::new(),
    };
    iv.progress.estimates.push(estimate.clone());
    Ok(estimate)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSpec {
    pub schedule: Vec<u32>,
    pub tol: f64,
    pub prizes: Prizes,
    /// Check each lottery for fairness before using it.
    pub verify_lotteries: bool,
}

fn stage_lottery(
    iv: &mut Interview<'_>,
    provider: &dyn LotteryProvider,
    n: u32,
    spec: &SqueezeSpec,
) -> Result<Lottery> {
    for candidate in provider.candidates(n) {
        if candidate.events.len() != n as usize {
            continue;
        }
        if !spec.verify_lotteries || verify_fair_lottery(iv, &candidate.events, spec.prizes)? {
            return Ok(candidate);
        }
    }
    Err(Error::FairnessUnavailable(vec![n]))
}

/// Brackets `p(E)` between lottery events: `{best on E}` preferred to
/// `{best on first k of n tickets}` means `p(E) > k/n`, the reverse means
/// `p(E) < k/n`, and indifference pins `p(E) = k/n`. Within each denominator
/// `k` is found by binary search; stages run until the bracket is within `tol`.
pub fn probability_by_squeeze(
    iv: &mut Interview<'_>,
    target: &str,
    event: &Event,
    provider: &dyn LotteryProvider,
    spec: &SqueezeSpec,
) -> Result<ProbabilityEstimate> {
    if spec.schedule.is_empty() {
        return Err(Error::Validation("schedule: at least one denominator is required".into()));
    }
    if !(spec.tol >= 0.0) {
        return Err(Error::Validation(format!("tol: must be non-negative, got {}", spec.tol)));
    }
    if spec.prizes.best <= spec.prizes.worst {
        return Err(Error::Validation("prizes: best must exceed worst".into()));
    }
    event.check(iv.n_atoms())?;
    let n_atoms = iv.n_atoms();
    let bet =
        |e: &Event| Gamble::binary(e, Outcome::Money(spec.prizes.best), Outcome::Money(spec.prizes.worst), n_atoms);
    let target_bet = bet(event);
    let start = iv.query_count();
    let (mut lo, mut hi) = (Rational::ZERO, Rational::ONE);
    let mut trace = Vec::new();
    let mut exact = false;

    'stages: for &n in &spec.schedule {
        if hi.gap(lo).to_f64() <= spec.tol {
            break;
        }
        let lottery = stage_lottery(iv, provider, n, spec)?;
        let n64 = u128::from(n);
        // k strictly inside (lo, hi)
        let mut kmin = (u128::from(lo.numer()) * n64 / u128::from(lo.denom())) as i64 + 1;
        let mut kmax = ((u128::from(hi.numer()) * n64).div_ceil(u128::from(hi.denom()))) as i64 - 1;
        while kmin <= kmax {
            let k = kmin + (kmax - kmin) / 2;
            let q = Rational::new(k as u64, n.into())?;
            let offer = bet(&lottery_event(&lottery.events, k as usize)?);
            match iv.ask(target_bet.clone(), offer)? {
                Preference::PreferLeft => {
                    lo = q;
                    kmin = k + 1;
                }
                Preference::PreferRight => {
                    hi = q;
                    kmax = k - 1;
                }
                Preference::Indifferent => {
                    lo = q;
                    hi = q;
                    exact = true;
                }
            }
            trace.push((lo, hi));
            if exact {
                break 'stages;
            }
        }
    }
    let width = hi.gap(lo).to_f64();
    let estimate = ProbabilityEstimate {
        target: target.to_string(),
        value: if exact { lo.to_f64() } else { lo.midpoint(hi).to_f64() },
        bracket: (lo, hi),
        method: if exact { EstimateMethod::ExactLottery } else { EstimateMethod::Squeeze },
        query_count: iv.query_count() - start,
        converged: exact || width <= spec.tol,
        trace,
    };
    iv.progress.estimates.push(estimate.clone());
    Ok(estimate)
}
