use std::io::{Read, Write};

use super::Point2;
use crate::error::{Error, Result};
use crate::real::format_real;
use crate::trust::csv_error;

pub const TRACE_HEADER: [&str; 9] = [
    "iteration",
    "particle_id",
    "pos_t",
    "pos_r",
    "vel_t",
    "vel_r",
    "fitness",
    "gbest_t",
    "gbest_r",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSnapshot {
    pub id: usize,
    pub position: Point2,
    pub velocity: Point2,
    /// Distance to the global best of the same iteration.
    pub fitness: f64,
    pub personal_best_fitness: f64,
}

/// Swarm state after `iteration` updates (0 is the initial swarm).
#[derive(Clone, Debug, PartialEq)]
pub struct IterationSnapshot {
    pub iteration: u32,
    pub global_best: Point2,
    pub particles: Vec<ParticleSnapshot>,
}

impl IterationSnapshot {
    pub fn max_fitness(&self) -> f64 {
        self.particles.iter().map(|p| p.fitness).fold(0.0, f64::max)
    }
}

/// One row of the trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: u32,
    pub particle_id: usize,
    pub position: Point2,
    pub velocity: Point2,
    pub fitness: f64,
    pub global_best: Point2,
}

pub fn trace_rows(trace: &[IterationSnapshot]) -> impl Iterator<Item = TraceRow> + '_ {
    trace.iter().flat_map(|snap| {
        snap.particles.iter().map(move |p| TraceRow {
            iteration: snap.iteration,
            particle_id: p.id,
            position: p.position,
            velocity: p.velocity,
            fitness: p.fitness,
            global_best: snap.global_best,
        })
    })
}

pub fn write_trace_csv<W: Write>(trace: &[IterationSnapshot], mut writer: W) -> Result<()> {
    writeln!(writer, "{}", TRACE_HEADER.join(","))?;
    for row in trace_rows(trace) {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{},{}",
            row.iteration,
            row.particle_id,
            format_real(row.position.t),
            format_real(row.position.r),
            format_real(row.velocity.t),
            format_real(row.velocity.r),
            format_real(row.fitness),
            format_real(row.global_best.t),
            format_real(row.global_best.r),
        )?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<TraceRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    match rows.next() {
        Some(h) if h.as_ref().map_err(|_| ()).is_ok_and(|h| h.iter().eq(TRACE_HEADER)) => {}
        _ => return Err(Error::parse(1, format!("expected header `{}`", TRACE_HEADER.join(",")))),
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != TRACE_HEADER.len() {
            return Err(Error::parse(line, format!("expected 9 fields, found {}", row.len())));
        }
        let real = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| Error::parse(line, format!("{} `{}` is not a number", TRACE_HEADER[i], &row[i])))
        };
        out.push(TraceRow {
            iteration: row[0]
                .parse()
                .map_err(|_| Error::parse(line, format!("iteration `{}` is not an integer", &row[0])))?,
            particle_id: row[1]
                .parse()
                .map_err(|_| Error::parse(line, format!("particle_id `{}` is not an integer", &row[1])))?,
            position: Point2::new(real(2)?, real(3)?),
            velocity: Point2::new(real(4)?, real(5)?),
            fitness: real(6)?,
            global_best: Point2::new(real(7)?, real(8)?),
        });
    }
    Ok(out)
}
