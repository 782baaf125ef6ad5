use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Behavior, ClientProfile, SimConfig};
use super::log::{Event, EventKind, EventLog};
use super::metrics::SimMetrics;
use crate::error::{Error, Result};
use crate::pso::PsoConfig;
use crate::real::format_real;
use crate::trust::{
    evaluate_client, AgentId, Provenance, Recommendation, TrustDatabase, TrustDecision, TrustWeight, Verdict,
};

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceAgentState {
    pub agent_id: AgentId,
    pub trust_db: TrustDatabase,
    /// Never contains `agent_id`. May name providers that have left.
    pub acquaintances: BTreeSet<AgentId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MessageKind {
    ServiceRequest,
    TrustQuery,
    TrustResponse,
    ServiceGrant,
    ServiceDeny,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Empty,
    /// The client a trust query asks about.
    Client(AgentId),
    /// A trust response. `recommender_id` is the sender.
    Recommendation { client: AgentId, recommendation: Recommendation },
    Decision(TrustDecision),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Message {
    pub kind: MessageKind,
    pub sender: AgentId,
    pub recipient: AgentId,
    pub payload: Payload,
}

impl Message {
    fn event(&self, tick: u64) -> Event {
        let kind = match self.kind {
            MessageKind::ServiceRequest => EventKind::Request,
            MessageKind::TrustQuery => EventKind::Query,
            MessageKind::TrustResponse => EventKind::Response,
            MessageKind::ServiceGrant => EventKind::Grant,
            MessageKind::ServiceDeny => EventKind::Deny,
        };
        let detail = match &self.payload {
            Payload::Empty => String::new(),
            Payload::Client(c) => format!("client={c}"),
            Payload::Recommendation { client, recommendation } => format!(
                "client={client};recommender_trust={};reported={}",
                recommendation.recommender_trust, recommendation.reported_value
            ),
            Payload::Decision(d) => format!("weight={};provenance={}", d.weight, d.provenance),
        };
        Event {
            tick,
            kind,
            actor: self.sender.clone(),
            counterparty: Some(self.recipient.clone()),
            detail,
        }
    }
}

/// A request decided from acquaintance reports, or granted, waiting for
/// the outcome phase.
struct Pending {
    provider: AgentId,
    client: AgentId,
    decision: TrustDecision,
    responders: Vec<Recommendation>,
}

/// The whole simulated cloud: live clients and providers, the shared random
/// stream, the event log and running metrics.
#[derive(Clone, Debug)]
pub struct WorldState {
    config: SimConfig,
    rng: ChaCha8Rng,
    tick: u64,
    clients: BTreeMap<AgentId, ClientProfile>,
    providers: BTreeMap<AgentId, ServiceAgentState>,
    next_client: u64,
    next_provider: u64,
    log: EventLog,
    metrics: SimMetrics,
}

fn client_id(n: u64) -> AgentId {
    AgentId::new(format!("c{n:04}")).expect("generated ids are valid")
}

fn provider_id(n: u64) -> AgentId {
    AgentId::new(format!("p{n:04}")).expect("generated ids are valid")
}

/// Builds the initial population. Deterministic in `config.seed`.
pub fn init_world(config: SimConfig) -> Result<WorldState> {
    WorldState::new(config)
}

/// Runs a whole scenario and returns its metrics and event log.
pub fn run(config: SimConfig) -> Result<(SimMetrics, EventLog)> {
    let mut world = WorldState::new(config)?;
    for _ in 0..world.config.ticks {
        world.tick()?;
    }
    Ok(world.finish())
}

impl WorldState {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let mut world = WorldState {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            tick: 0,
            clients: BTreeMap::new(),
            providers: BTreeMap::new(),
            next_client: 1,
            next_provider: 1,
            log: EventLog::new(),
            metrics: SimMetrics::new(),
            config,
        };

        let n = world.config.initial_clients;
        let n_malicious = (n as f64 * world.config.malicious_fraction).floor() as usize;
        let malicious: BTreeSet<usize> = index::sample(&mut world.rng, n, n_malicious).into_iter().collect();
        for i in 0..n {
            let behavior = if malicious.contains(&i) {
                Behavior::Malicious
            } else {
                Behavior::Honest
            };
            world.spawn_client(behavior)?;
        }
        let initial: Vec<AgentId> = (0..world.config.initial_providers)
            .map(|_| world.add_provider())
            .collect();
        for id in &initial {
            world.wire(id);
        }
        Ok(world)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn current_tick(&self) -> u64 {
        self.tick
    }

    pub fn population(&self) -> usize {
        self.clients.len() + self.providers.len()
    }

    pub fn clients(&self) -> &BTreeMap<AgentId, ClientProfile> {
        &self.clients
    }

    pub fn providers(&self) -> &BTreeMap<AgentId, ServiceAgentState> {
        &self.providers
    }

    pub fn providers_mut(&mut self) -> &mut BTreeMap<AgentId, ServiceAgentState> {
        &mut self.providers
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn metrics(&self) -> &SimMetrics {
        &self.metrics
    }

    pub fn finish(self) -> (SimMetrics, EventLog) {
        (self.metrics, self.log)
    }

    fn spawn_client(&mut self, behavior: Behavior) -> Result<AgentId> {
        let id = client_id(self.next_client);
        self.next_client += 1;
        let profile = ClientProfile::new(id.clone(), behavior, self.config.misbehavior(behavior))?;
        self.clients.insert(id.clone(), profile);
        Ok(id)
    }

    fn add_provider(&mut self) -> AgentId {
        let id = provider_id(self.next_provider);
        self.next_provider += 1;
        self.providers.insert(
            id.clone(),
            ServiceAgentState {
                agent_id: id.clone(),
                trust_db: TrustDatabase::new(id.clone()),
                acquaintances: BTreeSet::new(),
            },
        );
        id
    }

    /// Picks up to `acquaintances_per_provider` distinct live peers for `id`.
    fn wire(&mut self, id: &AgentId) {
        let peers: Vec<&AgentId> = self.providers.keys().filter(|p| *p != id).collect();
        let k = self.config.acquaintances_per_provider.min(peers.len());
        let chosen: BTreeSet<AgentId> = index::sample(&mut self.rng, peers.len(), k)
            .into_iter()
            .map(|i| peers[i].clone())
            .collect();
        self.providers.get_mut(id).expect("just added").acquaintances = chosen;
    }

    /// The replies `provider_id` would get when asking about `client_id`,
    /// in recommender id order.
    pub fn gather_recommendations(&self, provider_id: &AgentId, client_id: &AgentId) -> Result<Vec<Recommendation>> {
        if !self.providers.contains_key(provider_id) {
            return Err(Error::UnknownAgent(provider_id.to_string()));
        }
        Ok(exchange(&self.providers, provider_id, client_id, &mut Vec::new()))
    }

    /// Advances the world by one tick.
    pub fn tick(&mut self) -> Result<()> {
        let tick = self.tick;
        self.departures(tick);
        self.arrival(tick)?;
        let inboxes = self.requests(tick);
        let granted = self.evaluations(tick, inboxes)?;
        self.outcomes(tick, granted)?;
        self.metrics.population_timeline.push(self.population());
        self.tick += 1;
        self.metrics.ticks = self.tick;
        Ok(())
    }

    fn departures(&mut self, tick: u64) {
        let p = self.config.departure_probability;
        let leaving_clients: Vec<AgentId> = self
            .clients
            .keys()
            .filter(|_| self.rng.random_bool(p))
            .cloned()
            .collect();
        for id in leaving_clients {
            self.clients.remove(&id);
            self.depart(tick, id, "client");
        }
        let leaving_providers: Vec<AgentId> = self
            .providers
            .keys()
            .filter(|_| self.rng.random_bool(p))
            .cloned()
            .collect();
        for id in leaving_providers {
            self.providers.remove(&id);
            self.depart(tick, id, "provider");
        }
    }

    fn depart(&mut self, tick: u64, id: AgentId, role: &str) {
        self.metrics.departures += 1;
        self.log.push(Event {
            tick,
            kind: EventKind::Depart,
            actor: id,
            counterparty: None,
            detail: format!("role={role}"),
        });
    }

    fn arrival(&mut self, tick: u64) -> Result<()> {
        if !self.rng.random_bool(self.config.arrival_probability) {
            return Ok(());
        }
        if self.population() >= self.config.max_population {
            return Ok(());
        }
        let (id, detail) = if self.rng.random_bool(self.config.provider_share()) {
            let id = self.add_provider();
            self.wire(&id);
            (id, "role=provider".to_string())
        } else {
            let behavior = if self.rng.random_bool(self.config.malicious_fraction) {
                Behavior::Malicious
            } else {
                Behavior::Honest
            };
            (self.spawn_client(behavior)?, format!("role=client;behavior={behavior}"))
        };
        self.metrics.arrivals += 1;
        self.log.push(Event {
            tick,
            kind: EventKind::Arrive,
            actor: id,
            counterparty: None,
            detail,
        });
        Ok(())
    }

    /// Every client asks one uniformly chosen live provider for service.
    fn requests(&mut self, tick: u64) -> BTreeMap<AgentId, Vec<Message>> {
        let mut inboxes: BTreeMap<AgentId, Vec<Message>> = BTreeMap::new();
        let providers: Vec<AgentId> = self.providers.keys().cloned().collect();
        if providers.is_empty() {
            return inboxes;
        }
        for client in self.clients.keys() {
            let provider = &providers[self.rng.random_range(0..providers.len())];
            let msg = Message {
                kind: MessageKind::ServiceRequest,
                sender: client.clone(),
                recipient: provider.clone(),
                payload: Payload::Empty,
            };
            self.log.push(msg.event(tick));
            self.metrics.requests += 1;
            inboxes.entry(provider.clone()).or_default().push(msg);
        }
        inboxes
    }

    fn evaluations(&mut self, tick: u64, inboxes: BTreeMap<AgentId, Vec<Message>>) -> Result<Vec<Pending>> {
        let mut pending = Vec::new();
        for (provider_id, inbox) in inboxes {
            for request in inbox {
                let client = request.sender;
                let pso = PsoConfig {
                    seed: self.rng.random(),
                    ..self.config.pso.clone()
                };
                let db = &self.providers[&provider_id].trust_db;
                let mut exchanged = Vec::new();
                let mut responders = Vec::new();
                let decision = evaluate_client(
                    db,
                    &client,
                    || {
                        responders = exchange(&self.providers, &provider_id, &client, &mut exchanged);
                        responders.clone()
                    },
                    self.config.threshold,
                    &pso,
                )?;

                for msg in &exchanged {
                    match msg.kind {
                        MessageKind::TrustQuery => self.metrics.trust_queries_sent += 1,
                        MessageKind::TrustResponse => self.metrics.trust_responses += 1,
                        _ => {}
                    }
                    self.log.push(msg.event(tick));
                }

                let behavior = self.clients[&client].behavior;
                self.metrics.record_decision(behavior, decision.verdict, decision.provenance);
                let kind = match decision.verdict {
                    Verdict::Trusted => MessageKind::ServiceGrant,
                    Verdict::Untrusted => MessageKind::ServiceDeny,
                };
                let reply = Message {
                    kind,
                    sender: provider_id.clone(),
                    recipient: client.clone(),
                    payload: Payload::Decision(decision),
                };
                self.log.push(reply.event(tick));
                pending.push(Pending {
                    provider: provider_id.clone(),
                    client,
                    decision: match reply.payload {
                        Payload::Decision(d) => d,
                        _ => unreachable!(),
                    },
                    responders,
                });
            }
        }
        Ok(pending)
    }

    /// Providers remember weights they derived from acquaintances, then
    /// granted interactions resolve and each provider scores the
    /// acquaintances whose reports it acted on.
    fn outcomes(&mut self, tick: u64, pending: Vec<Pending>) -> Result<()> {
        for g in pending {
            let provider = self
                .providers
                .get_mut(&g.provider)
                .expect("providers only leave during departures");
            if matches!(
                g.decision.provenance,
                Provenance::SingleRecommendation | Provenance::PsoAggregation
            ) {
                provider.trust_db.remember_evaluation(&g.client, g.decision.weight, tick);
            }
            if g.decision.verdict != Verdict::Trusted {
                continue;
            }
            let misbehaved = self.rng.random_bool(self.clients[&g.client].misbehavior_probability);
            let observed = if misbehaved { -1.0 } else { 1.0 };
            let provider = self.providers.get_mut(&g.provider).expect("checked above");
            let weight = provider.trust_db.record_outcome(&g.client, observed, tick)?.weight;
            self.log.push(outcome_event(tick, &g.provider, &g.client, "service", observed, weight));

            for rec in &g.responders {
                let agreed = rec.reported_value.value() * observed > 0.0;
                let score = if agreed { 1.0 } else { -1.0 };
                let weight = provider.trust_db.record_outcome(&rec.recommender_id, score, tick)?.weight;
                self.log.push(outcome_event(
                    tick,
                    &g.provider,
                    &rec.recommender_id,
                    "recommendation",
                    score,
                    weight,
                ));
            }
        }
        Ok(())
    }
}

fn outcome_event(tick: u64, actor: &AgentId, subject: &AgentId, what: &str, observed: f64, weight: TrustWeight) -> Event {
    Event {
        tick,
        kind: EventKind::Outcome,
        actor: actor.clone(),
        counterparty: Some(subject.clone()),
        detail: format!("kind={what};observed={};weight={weight}", format_real(observed)),
    }
}

/// Sends a trust query to every acquaintance of `asker` and collects the
/// replies of those still present that know `client`. Departed
/// acquaintances receive the query but never answer.
fn exchange(
    providers: &BTreeMap<AgentId, ServiceAgentState>,
    asker: &AgentId,
    client: &AgentId,
    messages: &mut Vec<Message>,
) -> Vec<Recommendation> {
    let me = &providers[asker];
    let mut out = Vec::new();
    for peer in &me.acquaintances {
        messages.push(Message {
            kind: MessageKind::TrustQuery,
            sender: asker.clone(),
            recipient: peer.clone(),
            payload: Payload::Client(client.clone()),
        });
        let Some(record) = providers.get(peer).and_then(|p| p.trust_db.lookup(client)) else {
            continue;
        };
        let recommender_trust = me.trust_db.lookup(peer).map_or(TrustWeight::NEUTRAL, |r| r.weight);
        let recommendation = Recommendation {
            recommender_id: peer.clone(),
            recommender_trust,
            reported_value: record.weight,
        };
        messages.push(Message {
            kind: MessageKind::TrustResponse,
            sender: peer.clone(),
            recipient: asker.clone(),
            payload: Payload::Recommendation {
                client: client.clone(),
                recommendation: recommendation.clone(),
            },
        });
        out.push(recommendation);
    }
    out
}
