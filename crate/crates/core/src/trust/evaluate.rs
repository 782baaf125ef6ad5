use std::fmt;

use super::{AgentId, Recommendation, TrustDatabase, TrustWeight};
use crate::error::{check_range, Result};
use crate::pso::{aggregate, PsoConfig};

/// Weights at or above this are admitted unless configured otherwise.
pub const DEFAULT_THRESHOLD: f64 = 0.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Trusted,
    Untrusted,
}

/// Which branch of the evaluation flow produced a weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    StoredRecord,
    NeutralDefault,
    SingleRecommendation,
    PsoAggregation,
}

impl Provenance {
    pub const ALL: [Provenance; 4] = [
        Provenance::StoredRecord,
        Provenance::NeutralDefault,
        Provenance::SingleRecommendation,
        Provenance::PsoAggregation,
    ];
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Trusted => "Trusted",
            Verdict::Untrusted => "Untrusted",
        })
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrustDecision {
    pub verdict: Verdict,
    pub weight: TrustWeight,
    pub provenance: Provenance,
}

/// Trusted iff `weight >= threshold`.
pub fn decide(weight: TrustWeight, threshold: f64) -> Result<Verdict> {
    let threshold = check_range("threshold", threshold, -1.0, 1.0)?;
    Ok(if weight.value() >= threshold {
        Verdict::Trusted
    } else {
        Verdict::Untrusted
    })
}

/// Runs the admission flow for `client_id`.
///
/// A stored record wins outright and `gather` is never called. Otherwise the
/// acquaintance replies returned by `gather` decide: none gives the neutral
/// weight, one or more go through [`aggregate`].
pub fn evaluate_client<F>(
    db: &TrustDatabase,
    client_id: &AgentId,
    gather: F,
    threshold: f64,
    pso_config: &PsoConfig,
) -> Result<TrustDecision>
where
    F: FnOnce() -> Vec<Recommendation>,
{
    check_range("threshold", threshold, -1.0, 1.0)?;

    let (weight, provenance) = if let Some(record) = db.lookup(client_id) {
        (record.weight, Provenance::StoredRecord)
    } else {
        let recommendations = gather();
        match recommendations.len() {
            0 => (TrustWeight::NEUTRAL, Provenance::NeutralDefault),
            n => {
                let result = aggregate(&recommendations, pso_config)?;
                let provenance = if n == 1 {
                    Provenance::SingleRecommendation
                } else {
                    Provenance::PsoAggregation
                };
                (result.trust_weight, provenance)
            }
        }
    };

    Ok(TrustDecision {
        verdict: decide(weight, threshold)?,
        weight,
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use std::cell::Cell;

    use super::*;

    fn id(s: &str) -> AgentId {
        AgentId::new(s).unwrap()
    }

    fn rec(who: &str, t: f64, r: f64) -> Recommendation {
        Recommendation::new(id(who), t, r).unwrap()
    }

    #[test]
    fn decide_is_inclusive() {
        let w = |v| TrustWeight::new(v).unwrap();
        assert_eq!(decide(w(0.5), 0.0).unwrap(), Verdict::Trusted);
        assert_eq!(decide(w(-0.3), 0.0).unwrap(), Verdict::Untrusted);
        assert_eq!(decide(w(0.0), 0.0).unwrap(), Verdict::Trusted);
        assert!(decide(w(0.0), 1.5).is_err());
    }

    #[test]
    fn stored_record_skips_acquaintances() {
        let mut db = TrustDatabase::new(id("p1"));
        db.record_outcome(&id("c1"), 0.9, 0).unwrap();
        let calls = Cell::new(0);
        let d = evaluate_client(
            &db,
            &id("c1"),
            || {
                calls.set(calls.get() + 1);
                vec![rec("p2", 1.0, -1.0)]
            },
            0.0,
            &PsoConfig::default(),
        )
        .unwrap();
        assert_eq!(calls.get(), 0);
        assert_eq!(d.verdict, Verdict::Trusted);
        assert_eq!(d.weight.value(), 0.9);
        assert_eq!(d.provenance, Provenance::StoredRecord);
    }

    #[test]
    fn nobody_knows_the_client() {
        let db = TrustDatabase::new(id("p1"));
        let d = evaluate_client(&db, &id("c9"), Vec::new, 0.0, &PsoConfig::default()).unwrap();
        assert_eq!(d, TrustDecision {
            verdict: Verdict::Trusted,
            weight: TrustWeight::NEUTRAL,
            provenance: Provenance::NeutralDefault,
        });
        assert_eq!(d.weight.value().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn unanimous_negative_reports() {
        let db = TrustDatabase::new(id("p1"));
        let recs = vec![rec("p2", 1.0, -0.8), rec("p3", 1.0, -0.8), rec("p4", 1.0, -0.8)];
        let d = evaluate_client(&db, &id("c1"), || recs, 0.0, &PsoConfig::default()).unwrap();
        assert_eq!(d.weight.value(), -0.8);
        assert_eq!(d.verdict, Verdict::Untrusted);
        assert_eq!(d.provenance, Provenance::PsoAggregation);
    }

    #[test]
    fn single_reply_is_damped() {
        let db = TrustDatabase::new(id("p1"));
        let d = evaluate_client(&db, &id("c1"), || vec![rec("p2", 0.0, 0.8)], 0.0, &PsoConfig::default()).unwrap();
        assert_eq!(d.provenance, Provenance::SingleRecommendation);
        assert_eq!(d.weight.value(), 0.4);
    }

    #[test]
    fn bad_threshold() {
        let db = TrustDatabase::new(id("p1"));
        assert!(evaluate_client(&db, &id("c1"), Vec::new, -2.0, &PsoConfig::default()).is_err());
    }
}
