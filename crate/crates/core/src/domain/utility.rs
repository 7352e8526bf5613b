use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::gamble::Outcome;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Strictly increasing utility of money on a closed interval.
///
/// Closed forms evaluate `offset + scale * f(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum MoneyCurve {
    Linear {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `f(x) = x^gamma`, requires `lo >= 0`.
    Power {
        lo: f64,
        hi: f64,
        gamma: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `f(x) = ln(x + shift)`, requires `lo + shift > 0`.
    Log {
        lo: f64,
        hi: f64,
        #[serde(default = "one")]
        shift: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Linear interpolation through `(amount, utility)` breakpoints.
    Table { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct UtilityRepr {
    #[serde(flatten)]
    curve: MoneyCurve,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    labels: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UtilityRepr", into = "UtilityRepr")]
pub struct UtilityFunction {
    curve: MoneyCurve,
    labels: BTreeMap<String, f64>,
}

impl UtilityFunction {
    pub fn new(curve: MoneyCurve, labels: BTreeMap<String, f64>) -> Result<Self> {
        validate_curve(&curve)?;
        if let Some((k, v)) = labels.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidUtility(format!("label `{k}` has utility {v}")));
        }
        Ok(UtilityFunction { curve, labels })
    }

    /// `u($x) = x` on `[lo, hi]`.
    pub fn linear(lo: f64, hi: f64) -> Result<Self> {
        UtilityFunction::new(MoneyCurve::Linear { lo, hi, scale: 1.0, offset: 0.0 }, BTreeMap::new())
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        UtilityFunction::new(MoneyCurve::Table { points }, BTreeMap::new())
    }

    pub fn with_label(mut self, name: impl Into<String>, utility: f64) -> Result<Self> {
        if !utility.is_finite() {
            return Err(Error::InvalidUtility(format!("label utility {utility}")));
        }
        self.labels.insert(name.into(), utility);
        Ok(self)
    }

    pub fn curve(&self) -> &MoneyCurve {
        &self.curve
    }

    pub fn money_domain(&self) -> (f64, f64) {
        match &self.curve {
            MoneyCurve::Linear { lo, hi, .. } | MoneyCurve::Power { lo, hi, .. } | MoneyCurve::Log { lo, hi, .. } => {
                (*lo, *hi)
            }
            MoneyCurve::Table { points } => (points[0].0, points[points.len() - 1].0),
        }
    }

    pub fn money(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.money_domain();
        if !(lo..=hi).contains(&x) {
            return Err(Error::Domain { amount: x, lo, hi });
        }
        Ok(match &self.curve {
            MoneyCurve::Linear { scale, offset, .. } => offset + scale * x,
            MoneyCurve::Power { gamma, scale, offset, .. } => offset + scale * x.powf(*gamma),
            MoneyCurve::Log { shift, scale, offset, .. } => offset + scale * (x + shift).ln(),
            MoneyCurve::Table { points } => {
                let i = points.partition_point(|p| p.0 <= x).clamp(1, points.len() - 1);
                let ((x0, y0), (x1, y1)) = (points[i - 1], points[i]);
                y0 + (x - x0) * (y1 - y0) / (x1 - x0)
            }
        })
    }

    pub fn utility(&self, outcome: &Outcome) -> Result<f64> {
        match outcome {
            Outcome::Money(x) => self.money(*x),
            Outcome::Label(name) => self.labels.get(name).copied().ok_or_else(|| Error::UnknownOutcome(name.clone())),
        }
    }

    /// `a * u + b` for `a > 0`; represents the same preferences.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !b.is_finite() {
            return Err(Error::InvalidUtility(format!("affine map needs a > 0, got a = {a}")));
        }
        let curve = match self.curve.clone() {
            MoneyCurve::Linear { lo, hi, scale, offset } => {
                MoneyCurve::Linear { lo, hi, scale: a * scale, offset: a * offset + b }
            }
            MoneyCurve::Power { lo, hi, gamma, scale, offset } => {
                MoneyCurve::Power { lo, hi, gamma, scale: a * scale, offset: a * offset + b }
            }
            MoneyCurve::Log { lo, hi, shift, scale, offset } => {
                MoneyCurve::Log { lo, hi, shift, scale: a * scale, offset: a * offset + b }
            }
            MoneyCurve::Table { points } => {
                MoneyCurve::Table { points: points.into_iter().map(|(x, y)| (x, a * y + b)).collect() }
            }
        };
        let labels = self.labels.iter().map(|(k, v)| (k.clone(), a * v + b)).collect();
        UtilityFunction::new(curve, labels)
    }
}

fn validate_curve(curve: &MoneyCurve) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidUtility(msg));
    let interval = |lo: f64, hi: f64| -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("money interval [{lo}, {hi}] is empty or unbounded"));
        }
        Ok(())
    };
    let affine = |scale: f64, offset: f64| -> Result<()> {
        if !(scale > 0.0 && scale.is_finite() && offset.is_finite()) {
            return bad(format!("scale {scale} / offset {offset} must be finite with scale > 0"));
        }
        Ok(())
    };
    match *curve {
        MoneyCurve::Linear { lo, hi, scale, offset } => {
            interval(lo, hi)?;
            affine(scale, offset)
        }
        MoneyCurve::Power { lo, hi, gamma, scale, offset } => {
            interval(lo, hi)?;
            affine(scale, offset)?;
            if lo < 0.0 || !(gamma > 0.0 && gamma.is_finite()) {
                return bad(format!("power utility needs lo >= 0 and gamma > 0 (lo {lo}, gamma {gamma})"));
            }
            Ok(())
        }
        MoneyCurve::Log { lo, hi, shift, scale, offset } => {
            interval(lo, hi)?;
            affine(scale, offset)?;
            if !(lo + shift > 0.0) {
                return bad(format!("log utility needs lo + shift > 0 (lo {lo}, shift {shift})"));
            }
            Ok(())
        }
        MoneyCurve::Table { ref points } => {
            if points.len() < 2 {
                return bad("breakpoint table needs at least two points".into());
            }
            if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return bad("breakpoint table has non-finite entries".into());
            }
            if points.windows(2).any(|w| !(w[0].0 < w[1].0 && w[0].1 < w[1].1)) {
                return bad("breakpoints must be strictly increasing in amount and utility".into());
            }
            Ok(())
        }
    }
}

impl TryFrom<UtilityRepr> for UtilityFunction {
    type Error = Error;
    fn try_from(repr: UtilityRepr) -> Result<Self> {
        UtilityFunction::new(repr.curve, repr.labels)
    }
}

impl From<UtilityFunction> for UtilityRepr {
    fn from(u: UtilityFunction) -> Self {
        UtilityRepr { curve: u.curve, labels: u.labels }
    }
}
