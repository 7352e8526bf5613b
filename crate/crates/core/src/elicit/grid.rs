use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::lottery::{lottery_event, verify_fair_lottery};
use super::ramsey::decision_weight;
use super::Prizes;
use crate::domain::{RiskFunction, UtilityFunction};
use crate::error::{Error, Result};
use crate::frame::{Lottery, LotteryProvider};
use crate::interp::{Interpolation, Knot, MonotoneCurve};
use crate::oracle::Interview;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskGridSpec {
    pub denominators: Vec<u32>,
    pub epsilon: f64,
    pub prizes: Prizes,
}

impl RiskGridSpec {
    /// Denominators `2, 4, ..., 2^depth`.
    pub fn dyadic(depth: u32) -> Vec<u32> {
        (1..=depth).map(|d| 1 << d).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.denominators.is_empty() {
            return Err(Error::Validation("denominators: at least one is required".into()));
        }
        if let Some(bad) = self.denominators.iter().find(|n| **n < 2) {
            return Err(Error::Validation(format!("denominators: {bad} is below 2")));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Validation(format!("epsilon: must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub n: u32,
    pub k: u32,
    pub query_ids: Vec<u64>,
}

/// Measured `r(k/n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionWeightSample {
    pub prob: Rational,
    pub weight: f64,
    pub provenance: Provenance,
}

impl DecisionWeightSample {
    fn anchor(prob: Rational) -> Self {
        let weight = if prob == Rational::ZERO { 0.0 } else { 1.0 };
        DecisionWeightSample {
            prob,
            weight,
            provenance: Provenance { n: 1, k: prob.numer() as u32, query_ids: Vec::new() },
        }
    }
}

/// Measured samples plus the anchors `(0, 0)` and `(1, 1)`, sorted by probability.
pub fn with_anchors(measured: &[DecisionWeightSample]) -> Vec<DecisionWeightSample> {
    let mut all = Vec::with_capacity(measured.len() + 2);
    all.push(DecisionWeightSample::anchor(Rational::ZERO));
    all.extend(measured.iter().filter(|s| s.prob != Rational::ZERO && s.prob != Rational::ONE).cloned());
    all.push(DecisionWeightSample::anchor(Rational::ONE));
    all.sort_by_key(|s| s.prob);
    all
}

fn fair_lottery(iv: &mut Interview<'_>, provider: &dyn LotteryProvider, n: u32, prizes: Prizes) -> Result<Lottery> {
    for candidate in provider.candidates(n) {
        if candidate.events.len() != n as usize {
            continue;
        }
        if verify_fair_lottery(iv, &candidate.events, prizes)? {
            return Ok(candidate);
        }
    }
    Err(Error::FairnessUnavailable(vec![n]))
}

/// For each denominator in turn, finds a fair `n`-way lottery and measures the
/// decision weight of "one of the first `k` tickets" for every `k/n` not
/// already measured at an earlier denominator.
pub fn measure_risk_grid(
    iv: &mut Interview<'_>,
    spec: &RiskGridSpec,
    u: &UtilityFunction,
    provider: &dyn LotteryProvider,
) -> Result<Vec<DecisionWeightSample>> {
    spec.validate()?;
    spec.prizes.utilities(u)?;
    let mut seen: BTreeSet<Rational> = BTreeSet::new();
    let mut measured = Vec::new();
    for &n in &spec.denominators {
        let lottery = fair_lottery(iv, provider, n, spec.prizes)?;
        for k in 1..n {
            let prob = Rational::new(k.into(), n.into())?;
            if !seen.insert(prob) {
                continue;
            }
            let event = lottery_event(&lottery.events, k as usize)?;
            let reading = decision_weight(iv, &event, spec.prizes, u, spec.epsilon)?;
            let sample = DecisionWeightSample {
                prob,
                weight: reading.weight,
                provenance: Provenance { n, k, query_ids: reading.indifference.query_ids },
            };
            iv.progress.samples.push(sample.clone());
            measured.push(sample);
        }
    }
    Ok(with_anchors(&measured))
}

/// Interpolates the samples into a tabulated risk function.
pub fn reconstruct_risk(samples: &[DecisionWeightSample], rule: Interpolation) -> Result<RiskFunction> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::Validation("no samples".into()));
    };
    if first.prob != Rational::ZERO || first.weight != 0.0 || last.prob != Rational::ONE || last.weight != 1.0 {
        return Err(Error::Validation("samples must include the anchors (0, 0) and (1, 1)".into()));
    }
    for w in samples.windows(2) {
        if w[0].prob >= w[1].prob {
            return Err(Error::Validation(format!("sample probabilities not increasing at {}", w[1].prob)));
        }
        if !(w[0].weight < w[1].weight) {
            return Err(Error::Inconsistency(format!(
                "measured r({}) = {} but r({}) = {}; a risk function must increase strictly",
                w[0].prob, w[0].weight, w[1].prob, w[1].weight
            )));
        }
    }
    let knots = samples.iter().map(|s| Knot { prob: s.prob, weight: s.weight }).collect();
    Ok(RiskFunction::Tabulated(MonotoneCurve::new(knots, rule)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Agent, Event};
    use crate::frame::{CandidatePool, Frame};
    use crate::oracle::{LogicalClock, SimulatedOracle};

    fn measure(r: RiskFunction, denominators: Vec<u32>, epsilon: f64) -> Vec<DecisionWeightSample> {
        let frame = Frame::lottery_only(64).unwrap();
        let agent = Agent::new(frame.model(&[1.0], None).unwrap(), UtilityFunction::linear(0.0, 1.0).unwrap(), r);
        let mut oracle = SimulatedOracle::new(agent.clone());
        let clock = LogicalClock::default();
        let mut iv = Interview::new(&mut oracle, &clock, &frame, frame.n_atoms());
        let spec = RiskGridSpec { denominators, epsilon, prizes: Prizes::default() };
        measure_risk_grid(&mut iv, &spec, &agent.u, &frame).unwrap()
    }

    #[test]
    fn identity_grid() {
        let s = measure(RiskFunction::Identity, vec![8], 1e-9);
        assert_eq!(s.len(), 9);
        for (k, sample) in s.iter().enumerate() {
            assert_eq!(sample.prob, Rational::new(k as u64, 8).unwrap());
            assert!((sample.weight - k as f64 / 8.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn anchors_and_square_at_half() {
        let s = measure(RiskFunction::power(2.0).unwrap(), vec![2, 4], 1e-9);
        assert_eq!((s[0].prob, s[0].weight), (Rational::ZERO, 0.0));
        assert_eq!((s[4].prob, s[4].weight), (Rational::ONE, 1.0));
        let half = s.iter().find(|x| x.prob == Rational::new(1, 2).unwrap()).unwrap();
        assert!((half.weight - 0.25).abs() <= 1e-9);
        assert_eq!(half.provenance.n, 2);
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn biased_candidate_skipped() {
        let frame = Frame::lottery_only(8).unwrap();
        let agent = Agent::new(
            frame.model(&[1.0], None).unwrap(),
            UtilityFunction::linear(0.0, 1.0).unwrap(),
            RiskFunction::power(3.0).unwrap(),
        );
        let biased = Lottery { n: 2, events: vec![Event::span(0..5), Event::span(5..8)] };
        let pool = CandidatePool { lotteries: vec![biased.clone(), frame.lottery(2).unwrap()] };
        let mut oracle = SimulatedOracle::new(agent.clone());
        let clock = LogicalClock::default();
        let mut iv = Interview::new(&mut oracle, &clock, &frame, 8);
        let spec = RiskGridSpec { denominators: vec![2], epsilon: 1e-9, prizes: Prizes::default() };
        let s = measure_risk_grid(&mut iv, &spec, &agent.u, &pool).unwrap();
        assert!((s[1].weight - 0.125).abs() <= 1e-9);

        let only_biased = CandidatePool { lotteries: vec![biased] };
        let mut oracle = SimulatedOracle::new(agent.clone());
        let mut iv = Interview::new(&mut oracle, &clock, &frame, 8);
        let err = measure_risk_grid(&mut iv, &spec, &agent.u, &only_biased).unwrap_err();
        assert!(matches!(err, Error::FairnessUnavailable(ref ns) if ns == &[2]));
    }

    #[test]
    fn empty_denominators_rejected() {
        let spec = RiskGridSpec { denominators: vec![], epsilon: 1e-6, prizes: Prizes::default() };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn reconstruction() {
        let s = measure(RiskFunction::Identity, vec![2, 4, 8], 1e-12);
        let r = reconstruct_risk(&s, Interpolation::Linear).unwrap();
        for i in 0..=100 {
            let q = i as f64 / 100.0;
            assert!((r.eval(q) - q).abs() <= 1e-9);
        }
        let s = measure(RiskFunction::power(3.0).unwrap(), RiskGridSpec::dyadic(5), 1e-9);
        let r = reconstruct_risk(&s, Interpolation::Linear).unwrap();
        assert!((r.eval(0.3) - 0.027).abs() <= 2e-3);

        let mut flat = s.clone();
        flat[3].weight = flat[2].weight;
        assert!(matches!(reconstruct_risk(&flat, Interpolation::Linear), Err(Error::Inconsistency(_))));
        assert!(reconstruct_risk(&s[1..], Interpolation::Linear).is_err());
    }
}
