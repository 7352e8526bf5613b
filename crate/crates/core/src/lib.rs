//! Risk-weighted expected utility, and the elicitation procedures that
//! recover an agent's risk function and subjective probabilities from its
//! preferences between gambles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod domain;
pub mod elicit;
pub mod error;
pub mod export;
pub mod frame;
pub mod interp;
pub mod oracle;
pub mod procedure;
pub mod rational;
pub mod reu;

pub use domain::{Agent, AgentFile, Branch, Event, Gamble, Outcome, ProbabilityModel, RiskFunction, UtilityFunction};
pub use error::{Error, OracleError, Result};
pub use frame::Frame;
pub use interp::Interpolation;
pub use procedure::{ProcedureConfig, ResultBundle};
pub use rational::Rational;
pub use reu::{compare, eu, reu, Preference};
