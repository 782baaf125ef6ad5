use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::config::Behavior;
use crate::error::{Error, Result};
use crate::real::format_real;
use crate::trust::{Provenance, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub honest: u64,
    pub malicious: u64,
}

impl ClassCounts {
    fn bump(&mut self, behavior: Behavior) {
        match behavior {
            Behavior::Honest => self.honest += 1,
            Behavior::Malicious => self.malicious += 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimMetrics {
    pub ticks: u64,
    pub requests: u64,
    pub grants: ClassCounts,
    pub denials: ClassCounts,
    /// Malicious denied over malicious evaluated; `None` with no malicious evaluations.
    pub true_positive_rate: Option<f64>,
    /// Honest denied over honest evaluated; `None` with no honest evaluations.
    pub false_positive_rate: Option<f64>,
    pub trust_queries_sent: u64,
    pub trust_responses: u64,
    pub arrivals: u64,
    pub departures: u64,
    pub decisions: BTreeMap<Provenance, u64>,
    /// Honest clients denied on the strength of a swarm aggregation.
    pub honest_pso_denials: u64,
    pub population_timeline: Vec<usize>,
}

impl SimMetrics {
    pub(crate) fn new() -> Self {
        SimMetrics {
            decisions: Provenance::ALL.iter().map(|p| (*p, 0)).collect(),
            ..Default::default()
        }
    }

    pub(crate) fn record_decision(&mut self, behavior: Behavior, verdict: Verdict, provenance: Provenance) {
        match verdict {
            Verdict::Trusted => self.grants.bump(behavior),
            Verdict::Untrusted => self.denials.bump(behavior),
        }
        *self.decisions.entry(provenance).or_default() += 1;
        if behavior == Behavior::Honest && verdict == Verdict::Untrusted && provenance == Provenance::PsoAggregation {
            self.honest_pso_denials += 1;
        }
        self.refresh_rates();
    }

    fn refresh_rates(&mut self) {
        let rate = |denied: u64, granted: u64| {
            let evaluated = denied + granted;
            (evaluated > 0).then(|| denied as f64 / evaluated as f64)
        };
        self.true_positive_rate = rate(self.denials.malicious, self.grants.malicious);
        self.false_positive_rate = rate(self.denials.honest, self.grants.honest);
    }

    pub fn evaluations(&self, behavior: Behavior) -> u64 {
        match behavior {
            Behavior::Honest => self.grants.honest + self.denials.honest,
            Behavior::Malicious => self.grants.malicious + self.denials.malicious,
        }
    }

    pub fn decisions_with(&self, provenance: Provenance) -> u64 {
        self.decisions.get(&provenance).copied().unwrap_or(0)
    }

    pub fn population_max(&self) -> usize {
        self.population_timeline.iter().copied().max().unwrap_or(0)
    }

    /// Flat `key=value` lines.
    pub fn summary(&self) -> String {
        let rate = |r: Option<f64>| r.map_or_else(|| "absent".to_string(), format_real);
        let timeline: Vec<String> = self.population_timeline.iter().map(usize::to_string).collect();
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        line("ticks", self.ticks.to_string());
        line("requests", self.requests.to_string());
        line("grants_honest", self.grants.honest.to_string());
        line("grants_malicious", self.grants.malicious.to_string());
        line("denials_honest", self.denials.honest.to_string());
        line("denials_malicious", self.denials.malicious.to_string());
        line("true_positive_rate", rate(self.true_positive_rate));
        line("false_positive_rate", rate(self.false_positive_rate));
        line("trust_queries_sent", self.trust_queries_sent.to_string());
        line("trust_responses", self.trust_responses.to_string());
        line("arrivals", self.arrivals.to_string());
        line("departures", self.departures.to_string());
        for p in Provenance::ALL {
            line(&provenance_key(p), self.decisions_with(p).to_string());
        }
        line("honest_pso_denials", self.honest_pso_denials.to_string());
        line("population_max", self.population_max().to_string());
        line("population_timeline", timeline.join(";"));
        out
    }

    /// Parses the output of [`SimMetrics::summary`].
    pub fn from_summary(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i as u64 + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (k, v) = raw
                .split_once('=')
                .ok_or_else(|| Error::parse(line, format!("expected key=value, got `{raw}`")))?;
            if kv.insert(k.to_string(), (line, v.to_string())).is_some() {
                return Err(Error::parse(line, format!("duplicate key `{k}`")));
            }
        }
        let mut take = |key: &str| {
            kv.remove(key)
                .ok_or_else(|| Error::parse(0, format!("missing key `{key}`")))
        };
        let mut count = |key: &str| -> Result<u64> {
            let (line, v) = take(key)?;
            v.parse().map_err(|_| Error::parse(line, format!("{key} `{v}` is not a count")))
        };
        let mut m = SimMetrics::new();
        m.ticks = count("ticks")?;
        m.requests = count("requests")?;
        m.grants.honest = count("grants_honest")?;
        m.grants.malicious = count("grants_malicious")?;
        m.denials.honest = count("denials_honest")?;
        m.denials.malicious = count("denials_malicious")?;
        m.trust_queries_sent = count("trust_queries_sent")?;
        m.trust_responses = count("trust_responses")?;
        m.arrivals = count("arrivals")?;
        m.departures = count("departures")?;
        for p in Provenance::ALL {
            m.decisions.insert(p, count(&provenance_key(p))?);
        }
        m.honest_pso_denials = count("honest_pso_denials")?;
        let population_max = count("population_max")?;

        let mut rate = |key: &str| -> Result<Option<f64>> {
            let (line, v) = take(key)?;
            match v.as_str() {
                "absent" => Ok(None),
                v => v
                    .parse()
                    .map(Some)
                    .map_err(|_| Error::parse(line, format!("{key} `{v}` is not a rate"))),
            }
        };
        m.true_positive_rate = rate("true_positive_rate")?;
        m.false_positive_rate = rate("false_positive_rate")?;

        let (line, timeline) = take("population_timeline")?;
        if !timeline.is_empty() {
            m.population_timeline = timeline
                .split(';')
                .map(|n| n.parse().map_err(|_| Error::parse(line, format!("bad population `{n}`"))))
                .collect::<Result<_>>()?;
        }
        if m.population_max() as u64 != population_max {
            return Err(Error::parse(line, "population_max disagrees with population_timeline"));
        }
        if let Some((key, (line, _))) = kv.into_iter().next() {
            return Err(Error::parse(line, format!("unknown key `{key}`")));
        }
        Ok(m)
    }
}

fn provenance_key(p: Provenance) -> String {
    let name = match p {
        Provenance::StoredRecord => "stored_record",
        Provenance::NeutralDefault => "neutral_default",
        Provenance::SingleRecommendation => "single_recommendation",
        Provenance::PsoAggregation => "pso_aggregation",
    };
    format!("decisions_{name}")
}
