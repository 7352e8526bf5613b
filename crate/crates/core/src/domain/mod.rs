//! States, events, outcomes, gambles and the agents that rank them.

mod agent;
mod gamble;
mod probability;
mod risk;
mod space;
mod utility;

pub use agent::{Agent, AgentFile, Atoms};
pub use gamble::{Branch, Gamble, Outcome};
pub use probability::ProbabilityModel;
pub use risk::RiskFunction;
pub use space::{Event, SampleSpace};
pub use utility::{MoneyCurve, UtilityFunction};
