use std::fmt;

use crate::error::{Error, Result};
use crate::pso::PsoConfig;
use crate::trust::{AgentId, DEFAULT_THRESHOLD};

pub const DEFAULT_HONEST_MISBEHAVIOR: f64 = 0.05;
pub const DEFAULT_MALICIOUS_MISBEHAVIOR: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Behavior {
    Honest,
    Malicious,
}

impl fmt::Display for Behavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClientProfile {
    pub client_id: AgentId,
    pub behavior: Behavior,
    /// Chance that a granted interaction goes badly.
    pub misbehavior_probability: f64,
}

impl ClientProfile {
    pub fn new(client_id: AgentId, behavior: Behavior, misbehavior_probability: f64) -> Result<Self> {
        let consistent = match behavior {
            Behavior::Honest => (0.0..0.5).contains(&misbehavior_probability),
            Behavior::Malicious => (0.5..=1.0).contains(&misbehavior_probability),
        };
        if !consistent {
            return Err(Error::Config(format!(
                "{behavior} client cannot misbehave with probability {misbehavior_probability}"
            )));
        }
        Ok(ClientProfile {
            client_id,
            behavior,
            misbehavior_probability,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub max_population: usize,
    pub initial_clients: usize,
    pub initial_providers: usize,
    /// Chance per tick that one newcomer tries to enter.
    pub arrival_probability: f64,
    /// Chance per agent per tick of leaving.
    pub departure_probability: f64,
    pub malicious_fraction: f64,
    pub acquaintances_per_provider: usize,
    pub ticks: u64,
    pub seed: u64,
    pub threshold: f64,
    pub honest_misbehavior: f64,
    pub malicious_misbehavior: f64,
    pub pso: PsoConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_population: 150,
            initial_clients: 50,
            initial_providers: 10,
            arrival_probability: 0.1,
            departure_probability: 0.002,
            malicious_fraction: 0.3,
            acquaintances_per_provider: 3,
            ticks: 500,
            seed: crate::pso::DEFAULT_SEED,
            threshold: DEFAULT_THRESHOLD,
            honest_misbehavior: DEFAULT_HONEST_MISBEHAVIOR,
            malicious_misbehavior: DEFAULT_MALICIOUS_MISBEHAVIOR,
            pso: PsoConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.max_population == 0 {
            return bad("max_population must be positive".into());
        }
        if self.initial_providers == 0 {
            return bad("initial_providers must be positive".into());
        }
        if self.initial_clients + self.initial_providers > self.max_population {
            return bad(format!(
                "initial_clients + initial_providers = {} exceeds max_population = {}",
                self.initial_clients + self.initial_providers,
                self.max_population
            ));
        }
        for (name, p) in [
            ("arrival_probability", self.arrival_probability),
            ("departure_probability", self.departure_probability),
            ("malicious_fraction", self.malicious_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold must be in [-1, 1], got {}", self.threshold));
        }
        let probe = AgentId::new("probe").expect("static id");
        ClientProfile::new(probe.clone(), Behavior::Honest, self.honest_misbehavior)?;
        ClientProfile::new(probe, Behavior::Malicious, self.malicious_misbehavior)?;
        self.pso.validate()
    }

    pub(crate) fn misbehavior(&self, behavior: Behavior) -> f64 {
        match behavior {
            Behavior::Honest => self.honest_misbehavior,
            Behavior::Malicious => self.malicious_misbehavior,
        }
    }

    /// Share of newcomers that are providers, taken from the initial mix.
    pub(crate) fn provider_share(&self) -> f64 {
        self.initial_providers as f64 / (self.initial_clients + self.initial_providers) as f64
    }
}
