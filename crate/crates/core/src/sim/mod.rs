//! Headless open-world cloud: clients come and go, ask providers for
//! service, and providers decide whom to admit using their own records and
//! what their acquaintances tell them.
//!
//! Each tick runs in a fixed order: departures, at most one arrival,
//! requests, evaluations, outcomes. All randomness comes from one seeded
//! stream consumed in that order, so a run is reproducible from its config.

mod config;
mod log;
mod metrics;
mod world;

pub use config::{Behavior, ClientProfile, SimConfig, DEFAULT_HONEST_MISBEHAVIOR, DEFAULT_MALICIOUS_MISBEHAVIOR};
pub use log::{Event, EventKind, EventLog, EVENT_HEADER};
pub use metrics::{ClassCounts, SimMetrics};
pub use world::{init_world, run, Message, MessageKind, Payload, ServiceAgentState, WorldState};
