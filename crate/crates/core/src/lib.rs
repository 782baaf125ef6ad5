//! Trust-based admission of cloud clients.
//!
//! A service provider facing an unknown client asks its acquaintances what
//! they know, and merges the replies with a small particle swarm
//! ([`pso`]). The admission flow and per-provider trust storage live in
//! [`trust`]; [`sim`] runs the whole thing in an open population of
//! providers and clients.

pub mod error;
pub mod pso;
pub mod real;
pub mod sim;
pub mod trust;

pub use error::{Error, Result};
pub use pso::{aggregate, AggregationResult, Point2, PsoConfig};
pub use sim::{run, SimConfig, SimMetrics, WorldState};
pub use trust::{AgentId, Recommendation, TrustDatabase, TrustDecision, TrustWeight, Verdict};
