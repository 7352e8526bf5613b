//! Strictly increasing interpolants through measured decision weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Piecewise linear through the knots.
    #[default]
    Linear,
    /// Fritsch-Carlson monotone cubic Hermite (PCHIP).
    MonotoneCubic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub prob: Rational,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CurveRepr {
    rule: Interpolation,
    knots: Vec<Knot>,
}

/// Knots strictly increasing in both coordinates, anchored at (0, 0) and (1, 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct MonotoneCurve {
    rule: Interpolation,
    knots: Vec<Knot>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Hermite slopes, only populated for the cubic rule.
    slopes: Vec<f64>,
}

impl MonotoneCurve {
    pub fn new(knots: Vec<Knot>, rule: Interpolation) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidRisk("curve needs at least the two anchors".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        if first.prob != Rational::ZERO || first.weight != 0.0 || last.prob != Rational::ONE || last.weight != 1.0 {
            return Err(Error::InvalidRisk("curve must start at (0, 0) and end at (1, 1)".into()));
        }
        for w in knots.windows(2) {
            if w[0].prob >= w[1].prob {
                return Err(Error::InvalidRisk(format!("knot probabilities not increasing at {}", w[1].prob)));
            }
            if !(w[0].weight < w[1].weight) {
                return Err(Error::InvalidRisk(format!(
                    "weights not strictly increasing: r({}) = {} but r({}) = {}",
                    w[0].prob, w[0].weight, w[1].prob, w[1].weight
                )));
            }
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.prob.to_f64()).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.weight).collect();
        let slopes = match rule {
            Interpolation::Linear => Vec::new(),
            Interpolation::MonotoneCubic => pchip_slopes(&xs, &ys),
        };
        Ok(MonotoneCurve { rule, knots, xs, ys, slopes })
    }

    pub fn rule(&self) -> Interpolation {
        self.rule
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    /// Index `i` of the segment `[x_i, x_{i+1}]` holding `q`.
    pub fn segment(&self, q: f64) -> usize {
        self.xs.partition_point(|x| *x <= q).clamp(1, self.xs.len() - 1) - 1
    }

    pub fn eval(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        if q >= 1.0 {
            return 1.0;
        }
        let i = self.segment(q);
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        let h = x1 - x0;
        let t = (q - x0) / h;
        let y = match self.rule {
            Interpolation::Linear => y0 + t * (y1 - y0),
            Interpolation::MonotoneCubic => {
                let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
            }
        };
        y.clamp(y0, y1)
    }
}

impl TryFrom<CurveRepr> for MonotoneCurve {
    type Error = Error;
    fn try_from(repr: CurveRepr) -> Result<Self> {
        MonotoneCurve::new(repr.knots, repr.rule)
    }
}

impl From<MonotoneCurve> for CurveRepr {
    fn from(c: MonotoneCurve) -> Self {
        CurveRepr { rule: c.rule, knots: c.knots }
    }
}

/// Fritsch-Carlson slopes: weighted harmonic means inside, shape-preserving
/// three-point estimates at the ends. Assumes strictly increasing data.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (w1, w2) = (2.0 * h[k] + h[k - 1], h[k] + 2.0 * h[k - 1]);
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d <= 0.0 {
        0.0
    } else if d > 3.0 * m0 {
        3.0 * m0
    } else {
        d
    }
}
