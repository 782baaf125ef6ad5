use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trust::{csv_error, AgentId};

pub const EVENT_HEADER: [&str; 5] = ["tick", "event", "actor", "counterparty", "detail"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Arrive,
    Depart,
    Request,
    Query,
    Response,
    Grant,
    Deny,
    Outcome,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Arrive => "ARRIVE",
            EventKind::Depart => "DEPART",
            EventKind::Request => "REQUEST",
            EventKind::Query => "QUERY",
            EventKind::Response => "RESPONSE",
            EventKind::Grant => "GRANT",
            EventKind::Deny => "DENY",
            EventKind::Outcome => "OUTCOME",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ARRIVE" => EventKind::Arrive,
            "DEPART" => EventKind::Depart,
            "REQUEST" => EventKind::Request,
            "QUERY" => EventKind::Query,
            "RESPONSE" => EventKind::Response,
            "GRANT" => EventKind::Grant,
            "DENY" => EventKind::Deny,
            "OUTCOME" => EventKind::Outcome,
            other => return Err(format!("unknown event `{other}`")),
        })
    }
}

/// One row of the event log. `detail` holds `key=value` pairs joined by `;`.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
    pub actor: AgentId,
    pub counterparty: Option<AgentId>,
    pub detail: String,
}

impl Event {
    /// Value of `key` in the detail field.
    pub fn detail_value(&self, key: &str) -> Option<&str> {
        self.detail
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }
}

/// Append-only record of everything that happened in a run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        debug_assert!(!event.detail.contains([',', '\n']));
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{}", EVENT_HEADER.join(","))?;
        for e in &self.events {
            let counterparty = e.counterparty.as_ref().map(AgentId::as_str).unwrap_or("");
            writeln!(writer, "{},{},{},{},{}", e.tick, e.kind, e.actor, counterparty, e.detail)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .quoting(false)
            .from_reader(reader);
        let mut rows = rdr.records();
        match rows.next() {
            Some(Ok(h)) if h.iter().eq(EVENT_HEADER) => {}
            _ => return Err(Error::parse(1, format!("expected header `{}`", EVENT_HEADER.join(",")))),
        }
        let mut log = EventLog::new();
        for row in rows {
            let row = row.map_err(csv_error)?;
            let line = row.position().map_or(0, |p| p.line());
            if row.len() != EVENT_HEADER.len() {
                return Err(Error::parse(line, format!("expected 5 fields, found {}", row.len())));
            }
            let tick = row[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("tick `{}` is not an integer", &row[0])))?;
            let kind = row[1].parse().map_err(|e: String| Error::parse(line, e))?;
            let actor = AgentId::new(&row[2]).map_err(|e| Error::parse(line, e.to_string()))?;
            let counterparty = match &row[3] {
                "" => None,
                id => Some(AgentId::new(id).map_err(|e| Error::parse(line, e.to_string()))?),
            };
            log.push(Event {
                tick,
                kind,
                actor,
                counterparty,
                detail: row[4].to_string(),
            });
        }
        Ok(log)
    }
}
