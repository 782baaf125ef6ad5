//! Particle swarm aggregation of acquaintance trust reports.
//!
//! Each recommendation becomes a particle at `(recommender_trust,
//! reported_value)`. The swarm's global best is the impact-weighted mean of
//! the current particle positions, divided by the swarm size (not by the
//! total impact), so it is recomputed after every move. Particles are pulled
//! towards their personal best and the global best until every particle is
//! within `epsilon` of the global best. The final global best is rescaled to
//! `[-1, 1]` against the spread of the swarm and its reported-value
//! coordinate is the aggregated trust weight.

mod draw;
mod trace;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_finite, check_range, Error, Result};
use crate::trust::{Recommendation, TrustWeight};

pub use draw::{Constant, Scripted, UnitSource};
pub use trace::{
    read_trace_csv, trace_rows, write_trace_csv, IterationSnapshot, ParticleSnapshot, TraceRow, TRACE_HEADER,
};

pub const DEFAULT_C1: f64 = 1.4;
pub const DEFAULT_C2: f64 = 1.6;
pub const DEFAULT_INERTIA: f64 = 0.2;
pub const DEFAULT_EPSILON: f64 = 0.01;
pub const DEFAULT_MAX_ITERATIONS: u32 = 100;
pub const DEFAULT_SEED: u64 = 42;

/// A point in the (recommender trust, reported value) plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub t: f64,
    pub r: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { t: 0.0, r: 0.0 };

    pub const fn new(t: f64, r: f64) -> Self {
        Point2 { t, r }
    }

    pub fn is_finite(self) -> bool {
        self.t.is_finite() && self.r.is_finite()
    }

    fn clamp_unit(self) -> Self {
        Point2::new(self.t.clamp(-1.0, 1.0), self.r.clamp(-1.0, 1.0))
    }

    fn check(self, what: &'static str) -> Result<Self> {
        check_finite(what, self.t)?;
        check_finite(what, self.r)?;
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub position: Point2,
    pub velocity: Point2,
    pub personal_best_position: Point2,
    pub personal_best_fitness: f64,
    impact: f64,
}

impl Particle {
    /// A particle at rest whose personal best is its starting position.
    /// The personal-best fitness is filled in once the swarm is assembled.
    pub fn at_rest(id: usize, position: Point2, impact: f64) -> Self {
        Particle {
            id,
            position,
            velocity: Point2::ORIGIN,
            personal_best_position: position,
            personal_best_fitness: f64::INFINITY,
            impact,
        }
    }

    /// A particle with an explicit velocity and memory.
    pub fn with_state(
        id: usize,
        position: Point2,
        velocity: Point2,
        personal_best_position: Point2,
        personal_best_fitness: f64,
        impact: f64,
    ) -> Self {
        Particle {
            id,
            position,
            velocity,
            personal_best_position,
            personal_best_fitness,
            impact,
        }
    }

    pub fn impact(&self) -> f64 {
        self.impact
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsoConfig {
    /// Pull towards the particle's own best (nostalgia).
    pub c1: f64,
    /// Pull towards the swarm's global best (envy).
    pub c2: f64,
    /// Coefficient on the previous velocity. 1 keeps it undamped.
    pub inertia: f64,
    pub max_iterations: u32,
    /// Converged once every particle is closer than this to the global best.
    pub epsilon: f64,
    pub seed: u64,
    pub clamp_positions: bool,
    /// Re-score the stored personal best against the new global best before
    /// comparing, since the target it was scored against has moved.
    pub rescore_personal_best: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            c1: DEFAULT_C1,
            c2: DEFAULT_C2,
            inertia: DEFAULT_INERTIA,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            epsilon: DEFAULT_EPSILON,
            seed: DEFAULT_SEED,
            clamp_positions: true,
            rescore_personal_best: true,
        }
    }
}

impl PsoConfig {
    /// The textbook update: unit coefficient on the previous velocity and a
    /// personal best that only changes on strict improvement of its stored
    /// score. Oscillates instead of settling; kept for comparison.
    pub fn undamped() -> Self {
        PsoConfig {
            inertia: 1.0,
            rescore_personal_best: false,
            ..PsoConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("c1", self.c1), ("c2", self.c2), ("epsilon", self.epsilon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be a positive real, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.inertia) {
            return Err(Error::Config(format!("inertia must be in [0, 1], got {}", self.inertia)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Maps a recommender's trust to how much its report counts.
pub trait ImpactFactor {
    /// Must return a value in `[0, 1]`.
    fn impact(&self, recommender_trust: TrustWeight) -> f64;
}

/// `(1 + t) / 2`: fully distrusted recommenders count for nothing, fully
/// trusted ones count in full.
#[derive(Clone, Copy, Debug, Default)]
pub struct LinearImpact;

impl ImpactFactor for LinearImpact {
    fn impact(&self, recommender_trust: TrustWeight) -> f64 {
        (1.0 + recommender_trust.value()) / 2.0
    }
}

pub fn impact_factor(recommender_trust: f64) -> Result<f64> {
    let t = TrustWeight::new(recommender_trust)?;
    Ok(LinearImpact.impact(t))
}

/// Euclidean distance between a particle and the global best.
pub fn fitness(position: Point2, global_best: Point2) -> Result<f64> {
    position.check("position")?;
    global_best.check("global best")?;
    Ok(distance(position, global_best))
}

fn distance(a: Point2, b: Point2) -> f64 {
    (a.t - b.t).hypot(a.r - b.r)
}

/// `(1/n) * sum(impact_i * position_i)`, per coordinate.
pub fn weighted_global_best(particles: &[Particle]) -> Result<Point2> {
    if particles.is_empty() {
        return Err(Error::EmptySwarm);
    }
    let n = particles.len() as f64;
    let (st, sr) = particles.iter().fold((0.0, 0.0), |(st, sr), p| {
        (st + p.impact * p.position.t, sr + p.impact * p.position.r)
    });
    Ok(Point2::new(st / n, sr / n))
}

/// Rescales each coordinate of `global_best` so the swarm's minimum maps to
/// -1 and its maximum to +1. A coordinate on which every particle agrees
/// has no spread; the shared value itself, clamped, is returned for it.
///
/// A global best outside the swarm's span maps outside `[-1, 1]`.
pub fn normalize_global_best(global_best: Point2, particles: &[Particle]) -> Result<Point2> {
    if particles.is_empty() {
        return Err(Error::EmptySwarm);
    }
    let rescale = |g: f64, coord: fn(&Point2) -> f64| {
        let (lo, hi) = particles
            .iter()
            .map(|p| coord(&p.position))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        if hi == lo {
            lo.clamp(-1.0, 1.0)
        } else {
            2.0 * (g - lo) / (hi - lo) - 1.0
        }
    };
    Ok(Point2::new(rescale(global_best.t, |p| p.t), rescale(global_best.r, |p| p.r)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwarmState {
    particles: Vec<Particle>,
    global_best_raw: Point2,
    iteration: u32,
}

impl SwarmState {
    /// Particles at rest at the given positions with the given impacts.
    pub fn at_rest(seeds: impl IntoIterator<Item = (Point2, f64)>) -> Result<Self> {
        let particles = seeds
            .into_iter()
            .enumerate()
            .map(|(id, (position, impact))| Particle::at_rest(id, position, impact))
            .collect();
        let mut swarm = Self::from_particles(particles, 0)?;
        let g = swarm.global_best_raw;
        for p in &mut swarm.particles {
            p.personal_best_fitness = distance(p.personal_best_position, g);
        }
        Ok(swarm)
    }

    /// One particle per recommendation, at `(recommender_trust, reported_value)`.
    pub fn from_recommendations(recommendations: &[Recommendation], impact: &dyn ImpactFactor) -> Result<Self> {
        Self::at_rest(recommendations.iter().map(|rec| {
            (
                Point2::new(rec.recommender_trust.value(), rec.reported_value.value()),
                impact.impact(rec.recommender_trust),
            )
        }))
    }

    /// Takes particles as given and derives the global best from them.
    pub fn from_particles(particles: Vec<Particle>, iteration: u32) -> Result<Self> {
        for p in &particles {
            p.position.check("position")?;
            p.velocity.check("velocity")?;
            p.personal_best_position.check("personal best")?;
            check_range("impact", p.impact, 0.0, 1.0)?;
        }
        let global_best_raw = weighted_global_best(&particles)?;
        Ok(SwarmState {
            particles,
            global_best_raw,
            iteration,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn global_best_raw(&self) -> Point2 {
        self.global_best_raw
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    /// Largest distance from any particle to the global best.
    pub fn max_fitness(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| distance(p.position, self.global_best_raw))
            .fold(0.0, f64::max)
    }

    /// One velocity and position update of every particle.
    ///
    /// Draws are consumed particle by particle, `t` before `r`, `r1` before
    /// `r2`. After all particles have moved the global best is recomputed,
    /// and personal bests are compared against the new global best.
    pub fn step<U: UnitSource + ?Sized>(&mut self, config: &PsoConfig, draws: &mut U) -> Result<()> {
        let g = self.global_best_raw;
        let axis = |x: f64, v: f64, pb: f64, g: f64, draws: &mut U| {
            let r1 = draws.next_unit();
            let r2 = draws.next_unit();
            let v = config.inertia * v + config.c1 * r1 * (pb - x) + config.c2 * r2 * (g - x);
            (x + v, v)
        };
        for p in &mut self.particles {
            let (xt, vt) = axis(p.position.t, p.velocity.t, p.personal_best_position.t, g.t, draws);
            let (xr, vr) = axis(p.position.r, p.velocity.r, p.personal_best_position.r, g.r, draws);
            p.velocity = Point2::new(vt, vr).check("velocity")?;
            let moved = Point2::new(xt, xr).check("position")?;
            p.position = if config.clamp_positions { moved.clamp_unit() } else { moved };
        }

        self.global_best_raw = weighted_global_best(&self.particles)?;
        let g = self.global_best_raw;
        for p in &mut self.particles {
            if config.rescore_personal_best {
                p.personal_best_fitness = distance(p.personal_best_position, g);
            }
            let f = distance(p.position, g);
            if f < p.personal_best_fitness {
                p.personal_best_position = p.position;
                p.personal_best_fitness = f;
            }
        }
        self.iteration += 1;
        Ok(())
    }

    pub fn snapshot(&self) -> IterationSnapshot {
        IterationSnapshot {
            iteration: self.iteration,
            global_best: self.global_best_raw,
            particles: self
                .particles
                .iter()
                .map(|p| ParticleSnapshot {
                    id: p.id,
                    position: p.position,
                    velocity: p.velocity,
                    fitness: distance(p.position, self.global_best_raw),
                    personal_best_fitness: p.personal_best_fitness,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregationResult {
    pub trust_weight: TrustWeight,
    pub global_best_raw: Point2,
    pub global_best_normalized: Point2,
    pub iterations_used: u32,
    pub converged: bool,
    /// Iteration 0 first. Empty when a single recommendation bypassed the swarm.
    pub trace: Vec<IterationSnapshot>,
}

/// Aggregates acquaintance reports into one trust weight with [`LinearImpact`].
pub fn aggregate(recommendations: &[Recommendation], config: &PsoConfig) -> Result<AggregationResult> {
    aggregate_with(recommendations, config, &LinearImpact)
}

pub fn aggregate_with(
    recommendations: &[Recommendation],
    config: &PsoConfig,
    impact: &dyn ImpactFactor,
) -> Result<AggregationResult> {
    config.validate()?;
    match recommendations {
        [] => Err(Error::EmptyInput),
        [only] => {
            // A lone report is its own mean; damp it by the sender's impact.
            let theta = check_range("impact", impact.impact(only.recommender_trust), 0.0, 1.0)?;
            let raw = Point2::new(
                theta * only.recommender_trust.value(),
                theta * only.reported_value.value(),
            );
            Ok(AggregationResult {
                trust_weight: TrustWeight::saturating(raw.r)?,
                global_best_raw: raw,
                global_best_normalized: raw.clamp_unit(),
                iterations_used: 0,
                converged: true,
                trace: Vec::new(),
            })
        }
        _ => {
            let mut swarm = SwarmState::from_recommendations(recommendations, impact)?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut trace = vec![swarm.snapshot()];
            let mut converged = swarm.max_fitness() < config.epsilon;
            while !converged && swarm.iteration() < config.max_iterations {
                swarm.step(config, &mut rng)?;
                trace.push(swarm.snapshot());
                converged = swarm.max_fitness() < config.epsilon;
            }
            let normalized = normalize_global_best(swarm.global_best_raw(), swarm.particles())?;
            Ok(AggregationResult {
                trust_weight: TrustWeight::saturating(normalized.r)?,
                global_best_raw: swarm.global_best_raw(),
                global_best_normalized: normalized,
                iterations_used: swarm.iteration(),
                converged,
                trace,
            })
        }
    }
}
