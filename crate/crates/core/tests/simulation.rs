use std::collections::{BTreeMap, BTreeSet};

use pso_trust::sim::{init_world, Behavior, EventKind, EventLog, SimConfig, SimMetrics, WorldState};
use pso_trust::trust::{AgentId, Provenance, Recommendation};
use pso_trust::{run, Error};

fn id(s: &str) -> AgentId {
    AgentId::new(s).unwrap()
}

fn small(ticks: u64) -> SimConfig {
    SimConfig {
        initial_clients: 20,
        initial_providers: 6,
        ticks,
        ..SimConfig::default()
    }
}

fn log_bytes(log: &EventLog) -> Vec<u8> {
    let mut buf = Vec::new();
    log.write_csv(&mut buf).unwrap();
    buf
}

#[test]
fn lone_provider_has_no_acquaintances() {
    let world = init_world(SimConfig {
        initial_clients: 0,
        initial_providers: 1,
        ..SimConfig::default()
    })
    .unwrap();
    assert_eq!(world.providers().len(), 1);
    assert!(world.clients().is_empty());
    assert!(world.providers().values().next().unwrap().acquaintances.is_empty());
}

#[test]
fn malicious_share_is_floored() {
    let world = init_world(SimConfig {
        initial_clients: 10,
        initial_providers: 5,
        malicious_fraction: 0.2,
        ..SimConfig::default()
    })
    .unwrap();
    let malicious = world.clients().values().filter(|c| c.behavior == Behavior::Malicious).count();
    assert_eq!(malicious, 2);
    for c in world.clients().values() {
        let want = match c.behavior {
            Behavior::Honest => 0.05,
            Behavior::Malicious => 0.9,
        };
        assert_eq!(c.misbehavior_probability, want);
    }
}

#[test]
fn acquaintances_are_distinct_others() {
    let world = init_world(SimConfig {
        initial_providers: 8,
        acquaintances_per_provider: 3,
        ..SimConfig::default()
    })
    .unwrap();
    for (pid, p) in world.providers() {
        assert_eq!(p.acquaintances.len(), 3);
        assert!(!p.acquaintances.contains(pid));
        assert!(p.acquaintances.iter().all(|a| world.providers().contains_key(a)));
    }
    // Fewer peers than requested: everybody else.
    let world = init_world(SimConfig {
        initial_providers: 3,
        acquaintances_per_provider: 5,
        ..SimConfig::default()
    })
    .unwrap();
    for p in world.providers().values() {
        assert_eq!(p.acquaintances.len(), 2);
    }
}

#[test]
fn init_is_deterministic() {
    let a = init_world(SimConfig::default()).unwrap();
    let b = init_world(SimConfig::default()).unwrap();
    assert_eq!(a.clients(), b.clients());
    assert_eq!(a.providers(), b.providers());
    let c = init_world(SimConfig { seed: 7, ..SimConfig::default() }).unwrap();
    assert_ne!(a.providers(), c.providers());
}

#[test]
fn invalid_config_is_rejected() {
    let err = init_world(SimConfig {
        max_population: 5,
        ..SimConfig::default()
    })
    .unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}

#[test]
fn full_world_admits_nobody() {
    let mut world = init_world(SimConfig {
        max_population: 12,
        initial_clients: 9,
        initial_providers: 3,
        arrival_probability: 1.0,
        departure_probability: 0.0,
        ..SimConfig::default()
    })
    .unwrap();
    for _ in 0..20 {
        world.tick().unwrap();
        assert_eq!(world.population(), 12);
    }
    assert_eq!(world.log().of_kind(EventKind::Arrive).count(), 0);
}

#[test]
fn lone_provider_grants_on_neutral_default() {
    let (metrics, log) = run(SimConfig {
        initial_clients: 1,
        initial_providers: 1,
        arrival_probability: 0.0,
        departure_probability: 0.0,
        ticks: 1,
        ..SimConfig::default()
    })
    .unwrap();
    assert_eq!(metrics.decisions_with(Provenance::NeutralDefault), 1);
    assert_eq!(metrics.grants.honest + metrics.grants.malicious, 1);
    let grant = log.of_kind(EventKind::Grant).next().unwrap();
    assert_eq!(grant.detail_value("provenance"), Some("NeutralDefault"));
    assert_eq!(grant.detail_value("weight"), Some("0.00000000"));
    assert_eq!(log.of_kind(EventKind::Query).count(), 0);
}

/// Four providers, no random wiring; p0001 asks the other three about c0001.
fn fixture() -> WorldState {
    let mut world = init_world(SimConfig {
        initial_clients: 1,
        initial_providers: 4,
        acquaintances_per_provider: 0,
        ..SimConfig::default()
    })
    .unwrap();
    let ps = world.providers_mut();
    ps.get_mut(&id("p0001")).unwrap().acquaintances = ["p0004", "p0002", "p0003"].into_iter().map(id).collect();
    world
}

#[test]
fn gather_with_nobody_informed() {
    let world = fixture();
    assert!(world.gather_recommendations(&id("p0001"), &id("c0001")).unwrap().is_empty());
}

#[test]
fn gather_single_informed_peer() {
    let mut world = fixture();
    let ps = world.providers_mut();
    ps.get_mut(&id("p0003")).unwrap().trust_db.record_outcome(&id("c0001"), 0.8, 0).unwrap();
    ps.get_mut(&id("p0001")).unwrap().trust_db.record_outcome(&id("p0003"), 0.6, 0).unwrap();
    let got = world.gather_recommendations(&id("p0001"), &id("c0001")).unwrap();
    assert_eq!(got, vec![Recommendation::new(id("p0003"), 0.6, 0.8).unwrap()]);
}

#[test]
fn gather_three_informed_peers_in_id_order() {
    let mut world = fixture();
    let ps = world.providers_mut();
    for (peer, w) in [("p0004", 0.1), ("p0002", 0.8), ("p0003", -0.4)] {
        ps.get_mut(&id(peer)).unwrap().trust_db.record_outcome(&id("c0001"), w, 0).unwrap();
    }
    let asker = &mut ps.get_mut(&id("p0001")).unwrap().trust_db;
    asker.record_outcome(&id("p0002"), 0.6, 0).unwrap();
    asker.record_outcome(&id("p0003"), -1.0, 0).unwrap();
    let got = world.gather_recommendations(&id("p0001"), &id("c0001")).unwrap();
    let want = vec![
        Recommendation::new(id("p0002"), 0.6, 0.8).unwrap(),
        Recommendation::new(id("p0003"), -1.0, -0.4).unwrap(),
        Recommendation::new(id("p0004"), 0.0, 0.1).unwrap(),
    ];
    assert_eq!(got, want);
}

#[test]
fn departed_peers_do_not_answer() {
    let mut world = fixture();
    let ps = world.providers_mut();
    ps.get_mut(&id("p0002")).unwrap().trust_db.record_outcome(&id("c0001"), 0.8, 0).unwrap();
    ps.remove(&id("p0002"));
    assert!(world.gather_recommendations(&id("p0001"), &id("c0001")).unwrap().is_empty());
}

#[test]
fn gather_unknown_provider() {
    let world = fixture();
    assert!(matches!(
        world.gather_recommendations(&id("p0099"), &id("c0001")),
        Err(Error::UnknownAgent(_))
    ));
}

#[test]
fn zero_ticks_is_a_no_op() {
    let (metrics, log) = run(small(0)).unwrap();
    assert!(log.is_empty());
    assert_eq!(metrics.requests, 0);
    assert_eq!(metrics.trust_queries_sent, 0);
    assert_eq!(metrics.true_positive_rate, None);
    assert!(metrics.population_timeline.is_empty());
}

#[test]
fn runs_are_reproducible() {
    let (m1, l1) = run(small(200)).unwrap();
    let (m2, l2) = run(small(200)).unwrap();
    assert_eq!(log_bytes(&l1), log_bytes(&l2));
    assert_eq!(m1, m2);
    let (_, l3) = run(SimConfig { seed: 99, ..small(200) }).unwrap();
    assert_ne!(log_bytes(&l1), log_bytes(&l3));
}

#[test]
fn emitted_files_reparse() {
    let (metrics, log) = run(small(100)).unwrap();
    let bytes = log_bytes(&log);
    assert_eq!(EventLog::read_csv(&bytes[..]).unwrap(), log);
    assert_eq!(SimMetrics::from_summary(&metrics.summary()).unwrap(), metrics);
}

#[test]
fn every_request_is_answered_once_in_its_tick() {
    let (metrics, log) = run(small(300)).unwrap();
    let mut open: BTreeMap<(u64, AgentId, AgentId), i32> = BTreeMap::new();
    for e in log.events() {
        match e.kind {
            EventKind::Request => {
                *open.entry((e.tick, e.actor.clone(), e.counterparty.clone().unwrap())).or_default() += 1;
            }
            EventKind::Grant | EventKind::Deny => {
                *open.entry((e.tick, e.counterparty.clone().unwrap(), e.actor.clone())).or_default() -= 1;
            }
            _ => {}
        }
    }
    assert!(open.values().all(|&n| n == 0));
    assert_eq!(metrics.requests as usize, open.len());
}

#[test]
fn stored_record_means_no_queries() {
    let (_, log) = run(small(300)).unwrap();
    let queried: BTreeSet<(u64, AgentId, String)> = log
        .of_kind(EventKind::Query)
        .map(|e| (e.tick, e.actor.clone(), e.detail_value("client").unwrap().to_string()))
        .collect();
    let mut stored = 0;
    for e in log.events().iter().filter(|e| matches!(e.kind, EventKind::Grant | EventKind::Deny)) {
        let key = (e.tick, e.actor.clone(), e.counterparty.as_ref().unwrap().to_string());
        match e.detail_value("provenance").unwrap() {
            "StoredRecord" => {
                stored += 1;
                assert!(!queried.contains(&key), "{key:?}");
            }
            _ => assert!(queried.contains(&key), "{key:?}"),
        }
    }
    assert!(stored > 100);
}


#[test]
fn population_is_capped() {
    let (metrics, _) = run(SimConfig {
        initial_clients: 100,
        initial_providers: 20,
        arrival_probability: 1.0,
        departure_probability: 0.005,
        ..SimConfig::default()
    })
    .unwrap();
    assert_eq!(metrics.population_timeline.len(), 500);
    assert_eq!(metrics.population_max(), 150);
}

#[test]
fn no_acquaintances_means_neutral_defaults() {
    let (metrics, log) = run(SimConfig {
        acquaintances_per_provider: 0,
        ..small(200)
    })
    .unwrap();
    assert_eq!(metrics.decisions_with(Provenance::SingleRecommendation), 0);
    assert_eq!(metrics.decisions_with(Provenance::PsoAggregation), 0);
    assert!(metrics.decisions_with(Provenance::NeutralDefault) > 0);
    assert_eq!(log.of_kind(EventKind::Query).count(), 0);
}

#[test]
fn honest_world_is_rarely_denied_by_the_swarm() {
    let (metrics, _) = run(SimConfig {
        malicious_fraction: 0.0,
        threshold: 0.0,
        ..SimConfig::default()
    })
    .unwrap();
    let evaluated = metrics.evaluations(Behavior::Honest);
    assert_eq!(metrics.evaluations(Behavior::Malicious), 0);
    assert!(metrics.decisions_with(Provenance::PsoAggregation) > 0);
    let share = metrics.honest_pso_denials as f64 / evaluated as f64;
    assert!(share < 0.10, "swarm denials {share}");
}

#[test]
fn malicious_clients_are_denied_more_often() {
    let (metrics, _) = run(SimConfig::default()).unwrap();
    let tpr = metrics.true_positive_rate.unwrap();
    let fpr = metrics.false_positive_rate.unwrap();
    assert!(tpr > fpr, "tpr {tpr} fpr {fpr}");
}

#[test]
fn responses_name_their_sender() {
    let (_, log) = run(small(200)).unwrap();
    let mut seen = 0;
    for e in log.of_kind(EventKind::Response) {
        seen += 1;
        assert!(e.actor.as_str().starts_with('p'));
        assert!(e.detail_value("reported").is_some());
        assert!(e.detail_value("recommender_trust").is_some());
    }
    assert!(seen > 0);
}
