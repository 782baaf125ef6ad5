use std::collections::BTreeMap;
use std::io::{Read, Write};

use super::{csv_error, parse_weight, AgentId, TrustWeight};
use crate::error::{check_range, Error, Result};

/// Weight given to the newest observation when folding outcomes into a record.
pub const OUTCOME_RATE: f64 = 0.3;

pub const DATABASE_HEADER: [&str; 4] = ["client_id", "weight", "interaction_count", "last_updated_tick"];

#[derive(Clone, Debug, PartialEq)]
pub struct TrustRecord {
    pub client_id: AgentId,
    pub weight: TrustWeight,
    /// Always at least 1 for a stored record.
    pub interaction_count: u64,
    pub last_updated_tick: u64,
}

/// What one service agent remembers about the agents it has dealt with.
#[derive(Clone, Debug, PartialEq)]
pub struct TrustDatabase {
    owner_id: AgentId,
    records: BTreeMap<AgentId, TrustRecord>,
}

impl TrustDatabase {
    pub fn new(owner_id: AgentId) -> Self {
        TrustDatabase {
            owner_id,
            records: BTreeMap::new(),
        }
    }

    pub fn owner_id(&self) -> &AgentId {
        &self.owner_id
    }

    pub fn lookup(&self, client_id: &AgentId) -> Option<&TrustRecord> {
        self.records.get(client_id)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in client id order.
    pub fn records(&self) -> impl Iterator<Item = &TrustRecord> {
        self.records.values()
    }

    /// Inserts a record, rejecting a second record for the same client.
    pub fn insert(&mut self, record: TrustRecord) -> Result<()> {
        if record.interaction_count == 0 {
            return Err(Error::Config(format!(
                "record for `{}` has interaction_count 0",
                record.client_id
            )));
        }
        if self.records.contains_key(&record.client_id) {
            return Err(Error::Config(format!("duplicate record for `{}`", record.client_id)));
        }
        self.records.insert(record.client_id.clone(), record);
        Ok(())
    }

    /// Stores a weight derived from acquaintance reports for a client with
    /// no record yet. Returns false, leaving the database untouched, when a
    /// record already exists.
    pub fn remember_evaluation(&mut self, client_id: &AgentId, weight: TrustWeight, tick: u64) -> bool {
        if self.records.contains_key(client_id) {
            return false;
        }
        self.records.insert(
            client_id.clone(),
            TrustRecord {
                client_id: client_id.clone(),
                weight,
                interaction_count: 1,
                last_updated_tick: tick,
            },
        );
        true
    }

    /// Folds one observed outcome into the record for `client_id`.
    ///
    /// The first observation becomes the weight outright. Later ones move the
    /// weight a fraction [`OUTCOME_RATE`] of the way towards the observation.
    pub fn record_outcome(&mut self, client_id: &AgentId, observed: f64, tick: u64) -> Result<&TrustRecord> {
        let observed = check_range("observed outcome", observed, -1.0, 1.0)?;
        let record = self
            .records
            .entry(client_id.clone())
            .and_modify(|r| {
                let old = r.weight.value();
                // old + a*(obs - old) stays exactly at old when obs == old
                let next = (old + OUTCOME_RATE * (observed - old)).clamp(-1.0, 1.0);
                r.weight = TrustWeight(next);
                r.interaction_count += 1;
                r.last_updated_tick = tick;
            })
            .or_insert_with(|| TrustRecord {
                client_id: client_id.clone(),
                weight: TrustWeight(observed),
                interaction_count: 1,
                last_updated_tick: tick,
            });
        Ok(record)
    }
}

/// Free-function form of [`TrustDatabase::record_outcome`].
pub fn record_outcome(db: &mut TrustDatabase, client_id: &AgentId, observed: f64, tick: u64) -> Result<()> {
    db.record_outcome(client_id, observed, tick).map(|_| ())
}

/// Writes the database as CSV, one row per record, sorted by client id.
pub fn save_database<W: Write>(db: &TrustDatabase, mut writer: W) -> Result<()> {
    writeln!(writer, "{}", DATABASE_HEADER.join(","))?;
    for r in db.records() {
        writeln!(
            writer,
            "{},{},{},{}",
            r.client_id, r.weight, r.interaction_count, r.last_updated_tick
        )?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a database written by [`save_database`]. The file does not carry
/// the owner, so the caller supplies it.
pub fn load_database<R: Read>(owner_id: AgentId, reader: R) -> Result<TrustDatabase> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut db = TrustDatabase::new(owner_id);
    let mut rows = rdr.records();

    match rows.next() {
        Some(header) => {
            let header = header.map_err(csv_error)?;
            if !header.iter().eq(DATABASE_HEADER) {
                return Err(Error::parse(1, format!("expected header `{}`", DATABASE_HEADER.join(","))));
            }
        }
        None => return Err(Error::parse(1, "missing header")),
    }

    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != DATABASE_HEADER.len() {
            return Err(Error::parse(line, format!("expected 4 fields, found {}", row.len())));
        }
        let client_id = AgentId::new(&row[0]).map_err(|e| Error::parse(line, e.to_string()))?;
        let weight = parse_weight(&row[1], "weight", line)?;
        let interaction_count: u64 = row[2]
            .parse()
            .map_err(|_| Error::parse(line, format!("interaction_count `{}` is not a count", &row[2])))?;
        let last_updated_tick: u64 = row[3]
            .parse()
            .map_err(|_| Error::parse(line, format!("last_updated_tick `{}` is not a tick", &row[3])))?;
        db.insert(TrustRecord {
            client_id,
            weight,
            interaction_count,
            last_updated_tick,
        })
        .map_err(|e| match e {
            Error::Config(msg) => Error::parse(line, msg),
            other => other,
        })?;
    }
    Ok(db)
}
