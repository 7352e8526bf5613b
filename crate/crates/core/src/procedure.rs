//! Complete elicitation runs: configuration, execution against an oracle,
//! result bundles and transcript replay.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{RiskFunction, UtilityFunction};
use crate::elicit::{
    measure_risk_grid, probability_by_inversion, probability_by_squeeze, reconstruct_risk, with_anchors,
    DecisionWeightSample, Prizes, ProbabilityEstimate, RiskGridSpec, SqueezeSpec,
};
use crate::error::{Error, OracleError, Result};
use crate::frame::Frame;
use crate::interp::{Interpolation, MonotoneCurve};
use crate::oracle::{
    Clock, Interview, Oracle, OracleStats, PreferenceQuery, ReplayMode, ReplayOracle, Transcript, TranscriptEntry,
    TranscriptMeta,
};

fn default_denominators() -> Vec<u32> {
    RiskGridSpec::dyadic(5)
}

fn default_schedule() -> Vec<u32> {
    RiskGridSpec::dyadic(12)
}

fn default_epsilon() -> f64 {
    1e-6
}

fn default_squeeze_tol() -> f64 {
    1.0 / 4096.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskGridConfig {
    pub frame: Frame,
    #[serde(default = "default_denominators")]
    pub denominators: Vec<u32>,
    #[serde(default)]
    pub prizes: Prizes,
    /// Defaults to linear utility between the prizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<UtilityFunction>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub interpolation: Interpolation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqueezeConfig {
    pub frame: Frame,
    /// Cells making up the event whose probability is wanted.
    pub target: Vec<String>,
    #[serde(default)]
    pub prizes: Prizes,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<u32>,
    #[serde(default = "default_squeeze_tol")]
    pub tol: f64,
    #[serde(default)]
    pub verify_lotteries: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskSource {
    Known(RiskFunction),
    /// Measure a grid first and invert the reconstruction.
    Measure {
        #[serde(default = "default_denominators")]
        denominators: Vec<u32>,
        #[serde(default)]
        interpolation: Interpolation,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub frame: Frame,
    pub target: Vec<String>,
    #[serde(default)]
    pub prizes: Prizes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utility: Option<UtilityFunction>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub risk: Option<RiskSource>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "procedure", content = "config", rename_all = "snake_case")]
pub enum ProcedureConfig {
    RiskGrid(RiskGridConfig),
    ProbSqueeze(SqueezeConfig),
    ProbInversion(InversionConfig),
}

/// One problem with a configuration, addressed by field name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

fn issue(field: &str, message: impl Into<String>) -> FieldIssue {
    FieldIssue { field: field.into(), message: message.into() }
}

fn check_denominators(field: &str, ns: &[u32], frame: &Frame, out: &mut Vec<FieldIssue>) {
    if ns.is_empty() {
        out.push(issue(field, "at least one denominator is required"));
    }
    for &n in ns {
        if n < 2 {
            out.push(issue(field, format!("{n} is below 2")));
        } else if !frame.tickets().is_multiple_of(n) {
            out.push(issue(field, format!("{n} does not divide the frame's {} tickets", frame.tickets())));
        }
    }
}

fn check_positive(field: &str, x: f64, out: &mut Vec<FieldIssue>) {
    if !(x > 0.0 && x.is_finite()) {
        out.push(issue(field, format!("must be positive and finite, got {x}")));
    }
}

fn check_target(target: &[String], frame: &Frame, out: &mut Vec<FieldIssue>) {
    if target.is_empty() {
        out.push(issue("target", "name at least one cell"));
    }
    for t in target {
        if frame.cell_index(t).is_err() {
            out.push(issue("target", format!("unknown cell `{t}`")));
        }
    }
}

fn check_prizes(prizes: &Prizes, utility: &Option<UtilityFunction>, out: &mut Vec<FieldIssue>) {
    if !(prizes.worst < prizes.best) {
        out.push(issue("prizes", "best must exceed worst"));
        return;
    }
    if let Some(u) = utility {
        if let Err(e) = prizes.utilities(u) {
            out.push(issue("prizes", e.to_string()));
        }
    }
}

impl ProcedureConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProcedureConfig::RiskGrid(_) => "risk_grid",
            ProcedureConfig::ProbSqueeze(_) => "prob_squeeze",
            ProcedureConfig::ProbInversion(_) => "prob_inversion",
        }
    }

    pub fn frame(&self) -> &Frame {
        match self {
            ProcedureConfig::RiskGrid(c) => &c.frame,
            ProcedureConfig::ProbSqueeze(c) => &c.frame,
            ProcedureConfig::ProbInversion(c) => &c.frame,
        }
    }

    pub fn diagnostics(&self) -> Vec<FieldIssue> {
        let mut out = Vec::new();
        match self {
            ProcedureConfig::RiskGrid(c) => {
                check_denominators("denominators", &c.denominators, &c.frame, &mut out);
                check_positive("epsilon", c.epsilon, &mut out);
                check_prizes(&c.prizes, &c.utility, &mut out);
            }
            ProcedureConfig::ProbSqueeze(c) => {
                check_denominators("schedule", &c.schedule, &c.frame, &mut out);
                if !(c.tol >= 0.0) {
                    out.push(issue("tol", format!("must be non-negative, got {}", c.tol)));
                }
                check_target(&c.target, &c.frame, &mut out);
                check_prizes(&c.prizes, &None, &mut out);
            }
            ProcedureConfig::ProbInversion(c) => {
                check_positive("epsilon", c.epsilon, &mut out);
                check_target(&c.target, &c.frame, &mut out);
                check_prizes(&c.prizes, &c.utility, &mut out);
                match &c.risk {
                    None => out.push(issue("risk", "attach a known risk function or ask for one to be measured")),
                    Some(RiskSource::Measure { denominators, .. }) => {
                        check_denominators("risk.denominators", denominators, &c.frame, &mut out)
                    }
                    Some(RiskSource::Known(_)) => {}
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.diagnostics();
        if issues.is_empty() {
            return Ok(());
        }
        let text: Vec<String> = issues.iter().map(|i| format!("{}: {}", i.field, i.message)).collect();
        Err(Error::Validation(text.join("; ")))
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("configs serialize");
        hex::encode(Sha256::digest(&json))
    }
}

fn utility_or_linear(u: &Option<UtilityFunction>, prizes: Prizes) -> Result<UtilityFunction> {
    match u {
        Some(u) => Ok(u.clone()),
        None => UtilityFunction::linear(prizes.worst, prizes.best),
    }
}

/// Everything a run measured. Depends only on the configuration and the
/// answers given, never on the oracle or the clock.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub procedure: String,
    pub config_hash: String,
    pub samples: Vec<DecisionWeightSample>,
    pub risk_curve: Option<MonotoneCurve>,
    pub estimates: Vec<ProbabilityEstimate>,
    pub query_count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub bundle: ResultBundle,
    pub transcript: Transcript,
    pub stats: OracleStats,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Drive {
    Done(RunOutput),
    /// The oracle has no answer yet; `partial` holds what is finished.
    Pending {
        query: PreferenceQuery,
        partial: ResultBundle,
        transcript: Transcript,
    },
}

struct Findings {
    samples: Vec<DecisionWeightSample>,
    risk_curve: Option<MonotoneCurve>,
    estimates: Vec<ProbabilityEstimate>,
}

fn curve_of(r: &RiskFunction) -> Option<MonotoneCurve> {
    match r {
        RiskFunction::Tabulated(c) => Some(c.clone()),
        _ => None,
    }
}

fn execute(cfg: &ProcedureConfig, iv: &mut Interview<'_>) -> Result<Findings> {
    match cfg {
        ProcedureConfig::RiskGrid(c) => {
            let u = utility_or_linear(&c.utility, c.prizes)?;
            let spec = RiskGridSpec { denominators: c.denominators.clone(), epsilon: c.epsilon, prizes: c.prizes };
            let samples = measure_risk_grid(iv, &spec, &u, &c.frame)?;
            let r = reconstruct_risk(&samples, c.interpolation)?;
            Ok(Findings { samples, risk_curve: curve_of(&r), estimates: Vec::new() })
        }
        ProcedureConfig::ProbSqueeze(c) => {
            let event = c.frame.cells_event(&c.target)?;
            let spec = SqueezeSpec {
                schedule: c.schedule.clone(),
                tol: c.tol,
                prizes: c.prizes,
                verify_lotteries: c.verify_lotteries,
            };
            let est = probability_by_squeeze(iv, &c.target.join(" or "), &event, &c.frame, &spec)?;
            Ok(Findings { samples: Vec::new(), risk_curve: None, estimates: vec![est] })
        }
        ProcedureConfig::ProbInversion(c) => {
            let u = utility_or_linear(&c.utility, c.prizes)?;
            let (samples, r) = match &c.risk {
                None => return Err(Error::Validation("risk: no risk function attached".into())),
                Some(RiskSource::Known(r)) => (Vec::new(), r.clone()),
                Some(RiskSource::Measure { denominators, interpolation }) => {
                    let spec =
                        RiskGridSpec { denominators: denominators.clone(), epsilon: c.epsilon, prizes: c.prizes };
                    let samples = measure_risk_grid(iv, &spec, &u, &c.frame)?;
                    let r = reconstruct_risk(&samples, *interpolation)?;
                    (samples, r)
                }
            };
            let event = c.frame.cells_event(&c.target)?;
            let est = probability_by_inversion(iv, &c.target.join(" or "), &event, &r, c.prizes, &u, c.epsilon)?;
            Ok(Findings { samples, risk_curve: curve_of(&r), estimates: vec![est] })
        }
    }
}

/// Runs `cfg` until it finishes or the oracle reports that an answer is pending.
pub fn drive(cfg: &ProcedureConfig, oracle: &mut dyn Oracle, clock: &dyn Clock) -> Result<Drive> {
    cfg.validate()?;
    let frame = cfg.frame().clone();
    let kind = oracle.kind();
    let mut iv = Interview::new(oracle, clock, &frame, frame.n_atoms());
    let outcome = execute(cfg, &mut iv);
    let meta = TranscriptMeta { oracle: kind, config_hash: cfg.hash() };
    let stats = OracleStats { query_count: iv.query_count(), repeats_used: iv.repeats_used() };
    match outcome {
        Ok(found) => {
            let bundle = ResultBundle {
                procedure: cfg.name().into(),
                config_hash: meta.config_hash.clone(),
                samples: found.samples,
                risk_curve: found.risk_curve,
                estimates: found.estimates,
                query_count: stats.query_count,
            };
            Ok(Drive::Done(RunOutput { bundle, transcript: Transcript { meta, entries: iv.into_entries() }, stats }))
        }
        Err(Error::Oracle(OracleError::AnswerPending(query))) => {
            let samples = match cfg {
                ProcedureConfig::ProbSqueeze(_) => Vec::new(),
                _ => with_anchors(&iv.progress.samples),
            };
            let partial = ResultBundle {
                procedure: cfg.name().into(),
                config_hash: meta.config_hash.clone(),
                samples,
                risk_curve: None,
                estimates: iv.progress.estimates.clone(),
                query_count: stats.query_count,
            };
            Ok(Drive::Pending { query: *query, partial, transcript: Transcript { meta, entries: iv.into_entries() } })
        }
        Err(e) => Err(e),
    }
}

/// Runs `cfg` to completion.
pub fn run(cfg: &ProcedureConfig, oracle: &mut dyn Oracle, clock: &dyn Clock) -> Result<RunOutput> {
    match drive(cfg, oracle, clock)? {
        Drive::Done(out) => Ok(out),
        Drive::Pending { query, .. } => Err(OracleError::AnswerPending(Box::new(query)).into()),
    }
}

/// Re-runs `cfg` on the recorded answers. Every recorded answer must be used
/// and no further answer may be needed.
pub fn replay(cfg: &ProcedureConfig, entries: &[TranscriptEntry]) -> Result<RunOutput> {
    let mut oracle = ReplayOracle::new(entries.to_vec(), ReplayMode::Strict);
    let clock = crate::oracle::LogicalClock::default();
    let out = run(cfg, &mut oracle, &clock)?;
    if oracle.remaining() > 0 {
        return Err(OracleError::ReplayDivergence {
            step: oracle.consumed() as u64 + 1,
            reason: format!("procedure finished with {} recorded answers unused", oracle.remaining()),
        }
        .into());
    }
    Ok(out)
}

/// Replays and checks the outcome against a previously emitted bundle.
pub fn verify_replay(cfg: &ProcedureConfig, entries: &[TranscriptEntry], expected: &ResultBundle) -> Result<RunOutput> {
    let out = replay(cfg, entries)?;
    if out.bundle != *expected {
        let a = serde_json::to_string(&out.bundle)?;
        let b = serde_json::to_string(expected)?;
        let at = a.bytes().zip(b.bytes()).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
        return Err(Error::Inconsistency(format!("replayed results differ from the recorded bundle at byte {at}")));
    }
    Ok(out)
}
