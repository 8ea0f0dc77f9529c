//! Core swarm primitives: box bounds, the objective trait, particles, and the
//! deterministic RNG stream used by every stochastic component.

use crate::{Error, Result};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Axis-aligned box constraints: one closed interval per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    /// Builds bounds from per-dimension lower/upper vectors.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "bounds need matching non-empty lower/upper vectors (got {} and {})",
                lower.len(),
                upper.len()
            )));
        }
        for (d, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::InvalidInput(format!(
                    "dimension {d}: lower bound {lo} must be finite and below upper bound {hi}"
                )));
            }
        }
        Ok(Bounds { lower, upper })
    }

    /// Same interval `[lo, hi]` in every dimension.
    pub fn uniform(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Width of the interval in dimension `d`.
    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Uniform sample inside the box; one draw per dimension, in index order.
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
            .collect()
    }

    /// Per-dimension velocity cap: `fraction` of each dimension's width.
    pub fn velocity_cap(&self, fraction: f64) -> Vec<f64> {
        (0..self.dim()).map(|d| fraction * self.range(d)).collect()
    }
}

/// A minimisation objective over a box-constrained search space.
pub trait Objective: Sync {
    /// Short identifier used in reports and error messages.
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    fn bounds(&self) -> &Bounds;

    /// Raw objective value. Implementations may assume `x` has the advertised
    /// dimension; optimizers guarantee it. May return non-finite values; the
    /// caller ([`evaluate_and_update_pbest`]) converts those into errors.
    fn evaluate(&self, x: &[f64]) -> f64;

    /// The known optimal value, when one exists. Reported errors are
    /// `fitness - known_optimum` when `Some`, raw fitness otherwise.
    fn known_optimum(&self) -> Option<f64> {
        None
    }
}

/// Reported error of a fitness value for this objective.
pub fn error_of(objective: &dyn Objective, fitness: f64) -> f64 {
    match objective.known_optimum() {
        Some(opt) => fitness - opt,
        None => fitness,
    }
}

/// Deterministic seeded RNG stream (ChaCha8). Two streams with the same seed
/// produce identical draw sequences on every platform, which makes whole
/// optimizer runs reproducible; run `r` of an experiment uses `base_seed + r`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn seeded(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// One swarm member.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Fitness of the current position (`NAN` until first evaluation).
    pub fitness: f64,
    /// Best position this particle has ever occupied.
    pub pbest: Vec<f64>,
    pub pbest_fitness: f64,
    /// Consecutive evaluations without a personal-best improvement; drives
    /// exemplar refresh.
    pub stagnation: u32,
}

impl Particle {
    /// Spawns a particle with a uniform position inside `bounds` and a uniform
    /// velocity in `±v_max` per dimension (position drawn first). Fitness
    /// fields are populated by the first [`evaluate_and_update_pbest`] call.
    pub fn spawn(bounds: &Bounds, v_max: &[f64], rng: &mut impl Rng) -> Self {
        let position = bounds.sample(rng);
        let velocity = v_max
            .iter()
            .map(|cap| (2.0 * rng.gen::<f64>() - 1.0) * cap)
            .collect();
        Particle {
            pbest: position.clone(),
            position,
            velocity,
            fitness: f64::NAN,
            pbest_fitness: f64::INFINITY,
            stagnation: 0,
        }
    }
}

/// Clamps each velocity component into `[-v_max[d], v_max[d]]`.
pub fn clamp_velocity(velocity: &mut [f64], v_max: &[f64]) {
    for (v, cap) in velocity.iter_mut().zip(v_max) {
        *v = v.clamp(-cap.abs(), cap.abs());
    }
}

/// Clips a position into `bounds`; any clipped dimension also has its velocity
/// component zeroed so the particle does not keep pushing into the wall.
pub fn clip_position(position: &mut [f64], velocity: &mut [f64], bounds: &Bounds) {
    for d in 0..position.len() {
        let (lo, hi) = (bounds.lower()[d], bounds.upper()[d]);
        if position[d] < lo {
            position[d] = lo;
            velocity[d] = 0.0;
        } else if position[d] > hi {
            position[d] = hi;
            velocity[d] = 0.0;
        }
    }
}

/// Evaluates the particle's current position and refreshes its personal best.
///
/// Returns `Ok(true)` when the personal best strictly improved (the stagnation
/// counter resets to zero), `Ok(false)` otherwise (the counter increments).
/// A non-finite objective value aborts the run with
/// [`Error::NonFiniteFitness`].
pub fn evaluate_and_update_pbest(particle: &mut Particle, objective: &dyn Objective) -> Result<bool> {
    let value = objective.evaluate(&particle.position);
    if !value.is_finite() {
        return Err(Error::NonFiniteFitness {
            objective: objective.name().to_string(),
            value,
        });
    }
    particle.fitness = value;
    if value < particle.pbest_fitness {
        particle.pbest_fitness = value;
        particle.pbest.copy_from_slice(&particle.position);
        particle.stagnation = 0;
        Ok(true)
    } else {
        particle.stagnation = particle.stagnation.saturating_add(1);
        Ok(false)
    }
}
