use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::MonotoneCurve;

/// Maps a probability to a decision weight. Every variant is continuous and
/// strictly increasing on [0, 1] with `r(0) = 0` and `r(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RiskRepr", into = "RiskRepr")]
pub enum RiskFunction {
    Identity,
    /// `q^k`
    Power {
        k: f64,
    },
    /// `exp(-(-ln q)^alpha)`
    Prelec {
        alpha: f64,
    },
    /// `(1 - e^{-lambda q}) / (1 - e^{-lambda})`
    Expo {
        lambda: f64,
    },
    Tabulated(MonotoneCurve),
}

// Validation hook for deserialization; same shape as `RiskFunction`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum RiskRepr {
    Identity,
    Power { k: f64 },
    Prelec { alpha: f64 },
    Expo { lambda: f64 },
    Tabulated(MonotoneCurve),
}

impl RiskFunction {
    pub fn power(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidRisk(format!("power exponent must be positive, got {k}")));
        }
        Ok(RiskFunction::Power { k })
    }

    pub fn prelec(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidRisk(format!("Prelec alpha must be positive, got {alpha}")));
        }
        Ok(RiskFunction::Prelec { alpha })
    }

    pub fn expo(lambda: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::InvalidRisk(format!("exponential lambda must be finite and non-zero, got {lambda}")));
        }
        Ok(RiskFunction::Expo { lambda })
    }

    /// Evaluates at `q`, clamping into [0, 1].
    pub fn eval(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        match self {
            RiskFunction::Identity => q,
            RiskFunction::Power { k } => q.powf(*k),
            RiskFunction::Prelec { alpha } => (-(-q.ln()).powf(*alpha)).exp(),
            RiskFunction::Expo { lambda } => (-lambda * q).exp_m1() / (-lambda).exp_m1(),
            RiskFunction::Tabulated(curve) => curve.eval(q),
        }
    }

    /// The `q` with `|r(q) - weight| <= tol` and, where floating point allows,
    /// within `tol` of the exact preimage. Bisection on [0, 1].
    pub fn invert(&self, weight: f64, tol: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::WeightOutOfRange(weight));
        }
        if !(tol > 0.0) {
            return Err(Error::Validation(format!("inversion tolerance must be positive, got {tol}")));
        }
        if weight == 0.0 {
            return Ok(0.0);
        }
        if weight == 1.0 {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        loop {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            let value = self.eval(mid);
            if (value - weight).abs() <= tol && hi - lo <= tol {
                return Ok(mid);
            }
            if value < weight {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            RiskFunction::Identity => "identity".into(),
            RiskFunction::Power { k } => format!("power({k})"),
            RiskFunction::Prelec { alpha } => format!("prelec({alpha})"),
            RiskFunction::Expo { lambda } => format!("expo({lambda})"),
            RiskFunction::Tabulated(c) => format!("tabulated({} knots)", c.knots().len()),
        }
    }
}

impl TryFrom<RiskRepr> for RiskFunction {
    type Error = Error;
    fn try_from(repr: RiskRepr) -> Result<Self> {
        match repr {
            RiskRepr::Identity => Ok(RiskFunction::Identity),
            RiskRepr::Power { k } => RiskFunction::power(k),
            RiskRepr::Prelec { alpha } => RiskFunction::prelec(alpha),
            RiskRepr::Expo { lambda } => RiskFunction::expo(lambda),
            RiskRepr::Tabulated(c) => Ok(RiskFunction::Tabulated(c)),
        }
    }
}

impl From<RiskFunction> for RiskRepr {
    fn from(r: RiskFunction) -> Self {
        match r {
            RiskFunction::Identity => RiskRepr::Identity,
            RiskFunction::Power { k } => RiskRepr::Power { k },
            RiskFunction::Prelec { alpha } => RiskRepr::Prelec { alpha },
            RiskFunction::Expo { lambda } => RiskRepr::Expo { lambda },
            RiskFunction::Tabulated(c) => RiskRepr::Tabulated(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{Interpolation, Knot};
    use crate::rational::Rational;
    use proptest::prelude::*;

    fn families() -> Vec<RiskFunction> {
        let tab = MonotoneCurve::new(
            (0..=4)
                .map(|k| Knot { prob: Rational::new(k, 4).unwrap(), weight: [0.0, 0.1, 0.3, 0.6, 1.0][k as usize] })
                .collect(),
            Interpolation::Linear,
        )
        .unwrap();
        vec![
            RiskFunction::Identity,
            RiskFunction::power(0.5).unwrap(),
            RiskFunction::power(3.0).unwrap(),
            RiskFunction::prelec(0.65).unwrap(),
            RiskFunction::expo(2.0).unwrap(),
            RiskFunction::expo(-1.5).unwrap(),
            RiskFunction::Tabulated(tab),
        ]
    }

    #[test]
    fn anchors_exact() {
        for r in families() {
            assert_eq!(r.eval(0.0), 0.0, "{}", r.name());
            assert_eq!(r.eval(1.0), 1.0, "{}", r.name());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RiskFunction::power(0.0).is_err());
        assert!(RiskFunction::prelec(-1.0).is_err());
        assert!(RiskFunction::expo(0.0).is_err());
        assert!(serde_json::from_str::<RiskFunction>(r#"{"variant":"power","k":-2}"#).is_err());
    }

    #[test]
    fn json_shape() {
        let r: RiskFunction = serde_json::from_str(r#"{"variant": "power", "k": 3.0}"#).unwrap();
        assert_eq!(r, RiskFunction::Power { k: 3.0 });
        assert_eq!(serde_json::to_string(&RiskFunction::Identity).unwrap(), r#"{"variant":"identity"}"#);
    }

    #[test]
    fn inversion_examples() {
        let id = RiskFunction::Identity;
        assert!((id.invert(0.42, 1e-12).unwrap() - 0.42).abs() <= 1e-12);
        let sq = RiskFunction::power(2.0).unwrap();
        assert!((sq.invert(0.04, 1e-12).unwrap() - 0.2).abs() <= 1e-12);
        assert_eq!(sq.invert(1.0, 1e-9).unwrap(), 1.0);
        assert!(matches!(sq.invert(1.2, 1e-9), Err(Error::WeightOutOfRange(_))));
        assert!(matches!(sq.invert(-0.1, 1e-9), Err(Error::WeightOutOfRange(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn open_unit_interval_and_strict_increase(q in 1e-6f64..(1.0 - 1e-6), d in 1e-6f64..1.0) {
            let q2 = q + d * (1.0 - q);
            prop_assume!(q2 < 1.0);
            for r in families() {
                let (a, b) = (r.eval(q), r.eval(q2));
                prop_assert!(a > 0.0 && a < 1.0, "{} at {}: {}", r.name(), q, a);
                prop_assert!(a < b, "{} not increasing on ({}, {})", r.name(), q, q2);
            }
        }

        #[test]
        fn inversion_round_trip(q in 0.0f64..=1.0) {
            let tol = 1e-9;
            for r in families() {
                let back = r.invert(r.eval(q), tol).unwrap();
                prop_assert!((back - q).abs() <= tol, "{}: {} -> {}", r.name(), q, back);
            }
        }
    }
}
