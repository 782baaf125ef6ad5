//! Trust weights, per-provider trust databases and the client evaluation flow.
//!
//! A provider that receives a request from a client first consults its own
//! database. Only when the client is unknown does it fall back to what its
//! acquaintances report, aggregating several reports with the particle swarm
//! in [`crate::pso`]. Nobody knowing the client yields the neutral weight 0.

mod db;
mod evaluate;

use std::fmt;
use std::io::Read;

use crate::error::{check_range, Error, Result};
use crate::real::format_real;

pub use db::{load_database, record_outcome, save_database, TrustDatabase, TrustRecord, OUTCOME_RATE};
pub use evaluate::{decide, evaluate_client, Provenance, TrustDecision, Verdict, DEFAULT_THRESHOLD};

/// Opaque agent identifier. Clients and providers share the namespace.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::Config("agent id must not be empty".into()));
        }
        if id.contains([',', '\n', '\r', '"']) {
            return Err(Error::Config(format!("agent id `{id}` contains a reserved character")));
        }
        Ok(AgentId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trust in `[-1, 1]`: -1 untrustworthy, 0 neutral or unknown, 1 fully trusted.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct TrustWeight(f64);

impl TrustWeight {
    pub const MIN: TrustWeight = TrustWeight(-1.0);
    pub const NEUTRAL: TrustWeight = TrustWeight(0.0);
    pub const MAX: TrustWeight = TrustWeight(1.0);

    pub fn new(value: f64) -> Result<Self> {
        check_range("trust weight", value, -1.0, 1.0).map(TrustWeight)
    }

    /// Clamps a finite value into range.
    pub fn saturating(value: f64) -> Result<Self> {
        crate::error::check_finite("trust weight", value)?;
        Ok(TrustWeight(value.clamp(-1.0, 1.0)))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for TrustWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_real(self.0))
    }
}

/// One acquaintance's answer about a client: who answered, how much the
/// asking agent trusts them, and what they reported.
#[derive(Clone, Debug, PartialEq)]
pub struct Recommendation {
    pub recommender_id: AgentId,
    pub recommender_trust: TrustWeight,
    pub reported_value: TrustWeight,
}

impl Recommendation {
    pub fn new(recommender_id: AgentId, recommender_trust: f64, reported_value: f64) -> Result<Self> {
        Ok(Recommendation {
            recommender_id,
            recommender_trust: TrustWeight::new(recommender_trust)?,
            reported_value: TrustWeight::new(reported_value)?,
        })
    }
}

pub const RECOMMENDATION_HEADER: [&str; 3] = ["recommender_id", "recommender_trust", "reported_value"];

/// Reads a recommendation file.
///
/// The header row `recommender_id,recommender_trust,reported_value` is
/// optional. Line numbers in errors are 1-based physical lines.
pub fn load_recommendations<R: Read>(reader: R) -> Result<Vec<Recommendation>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for (index, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        if index == 0 && row.iter().eq(RECOMMENDATION_HEADER) {
            continue;
        }
        if row.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, found {}", row.len())));
        }
        let id = AgentId::new(&row[0]).map_err(|e| Error::parse(line, e.to_string()))?;
        let trust = parse_weight(&row[1], "recommender_trust", line)?;
        let reported = parse_weight(&row[2], "reported_value", line)?;
        out.push(Recommendation {
            recommender_id: id,
            recommender_trust: trust,
            reported_value: reported,
        });
    }
    Ok(out)
}

pub(crate) fn parse_weight(field: &str, what: &str, line: u64) -> Result<TrustWeight> {
    let value: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{field}` is not a number")))?;
    TrustWeight::new(value).map_err(|_| Error::parse(line, format!("{what} {field} is outside [-1, 1]")))
}

pub(crate) fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::parse(line, format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_bounds() {
        assert!(TrustWeight::new(1.0).is_ok());
        assert!(TrustWeight::new(-1.0).is_ok());
        assert!(TrustWeight::new(1.0000001).is_err());
        assert!(TrustWeight::new(f64::NAN).is_err());
        assert!(TrustWeight::new(f64::INFINITY).is_err());
        assert_eq!(TrustWeight::saturating(3.0).unwrap(), TrustWeight::MAX);
    }

    #[test]
    fn agent_id_rejects_empty_and_commas() {
        assert!(AgentId::new("").is_err());
        assert!(AgentId::new("a,b").is_err());
        assert_eq!(AgentId::new("p0001").unwrap().as_str(), "p0001");
    }

    #[test]
    fn loads_with_and_without_header() {
        let with = "recommender_id,recommender_trust,reported_value\na1,1.0,0.7\na2,-0.5,0.25\n";
        let without = "a1,1.0,0.7\na2,-0.5,0.25\n";
        let a = load_recommendations(with.as_bytes()).unwrap();
        let b = load_recommendations(without.as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert_eq!(a[1].recommender_trust.value(), -0.5);
    }

    #[test]
    fn out_of_range_names_line() {
        let err = load_recommendations("a1,2.0,0.1\n".as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 1:"), "{msg}");
        assert!(msg.contains("[-1, 1]"), "{msg}");

        let err = load_recommendations("recommender_id,recommender_trust,reported_value\na1,0.1,0.1\na2,0.1,x\n".as_bytes())
            .unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
    }

    #[test]
    fn wrong_arity_is_a_parse_error() {
        let err = load_recommendations("a1,0.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }
}
