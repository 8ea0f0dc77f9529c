//! Optimizer runs: the spade optimizer plus PSO and CLPSO baselines, all
//! sharing one run contract (seeded, budgeted in objective evaluations,
//! tracing best error and diversity every iteration).

pub mod clpso;
pub mod pso;
pub mod spade;

pub use clpso::{run_clpso, ClpsoConfig};
pub use pso::{pso_velocity, run_pso, PsoConfig};
pub use spade::{
    exploitation_velocity, exploration_velocity, run_spade, spade_step, SpadeConfig, SpadeState,
};

use crate::stats::diversity;
use crate::swarm::{evaluate_and_update_pbest, error_of, Objective, Particle, RngStream};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Which optimizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerId {
    Spade,
    Pso,
    Clpso,
}

impl OptimizerId {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerId::Spade => "spade",
            OptimizerId::Pso => "pso",
            OptimizerId::Clpso => "clpso",
        }
    }
}

impl fmt::Display for OptimizerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spade" => Ok(OptimizerId::Spade),
            "pso" => Ok(OptimizerId::Pso),
            "clpso" => Ok(OptimizerId::Clpso),
            other => Err(Error::InvalidInput(format!(
                "unknown optimizer `{other}` (valid: spade, pso, clpso)"
            ))),
        }
    }
}

/// One per-iteration trace row. `sbest` is the index selected by the decision
/// pipeline this iteration, or -1 for the initial record and for baseline
/// optimizers that have no such selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub evaluations: u64,
    pub best_error: f64,
    pub div_explore: f64,
    pub div_exploit: f64,
    pub div_all: f64,
    pub sbest: i64,
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str =
        "iteration,evaluations,best_error,div_explore,div_exploit,div_all,sbest_index";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.iteration,
            self.evaluations,
            self.best_error,
            self.div_explore,
            self.div_exploit,
            self.div_all,
            self.sbest
        )
    }
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// `best_fitness` minus the known optimum (raw fitness when unknown).
    pub error: f64,
    pub evaluations: u64,
    pub trace: Vec<TraceRecord>,
}

/// Tagged optimizer configuration, dispatched by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerConfig {
    Spade(SpadeConfig),
    Pso(PsoConfig),
    Clpso(ClpsoConfig),
}

impl OptimizerConfig {
    pub fn id(&self) -> OptimizerId {
        match self {
            OptimizerConfig::Spade(_) => OptimizerId::Spade,
            OptimizerConfig::Pso(_) => OptimizerId::Pso,
            OptimizerConfig::Clpso(_) => OptimizerId::Clpso,
        }
    }

    pub fn population(&self) -> usize {
        match self {
            OptimizerConfig::Spade(c) => c.population,
            OptimizerConfig::Pso(c) => c.population,
            OptimizerConfig::Clpso(c) => c.population,
        }
    }

    pub fn budget(&self) -> u64 {
        match self {
            OptimizerConfig::Spade(c) => c.budget,
            OptimizerConfig::Pso(c) => c.budget,
            OptimizerConfig::Clpso(c) => c.budget,
        }
    }

    pub fn set_budget(&mut self, budget: u64) {
        match self {
            OptimizerConfig::Spade(c) => c.budget = budget,
            OptimizerConfig::Pso(c) => c.budget = budget,
            OptimizerConfig::Clpso(c) => c.budget = budget,
        }
    }
}

/// Runs one seeded optimization to budget exhaustion.
pub fn run(config: &OptimizerConfig, objective: &dyn Objective, seed: u64) -> Result<RunResult> {
    match config {
        OptimizerConfig::Spade(c) => run_spade(c, objective, seed),
        OptimizerConfig::Pso(c) => run_pso(c, objective, seed),
        OptimizerConfig::Clpso(c) => run_clpso(c, objective, seed),
    }
}

/// Independent seeded runs `base_seed .. base_seed + runs`, executed
/// sequentially. Results are ordered by seed.
pub fn run_many_serial(
    config: &OptimizerConfig,
    objective: &dyn Objective,
    base_seed: u64,
    runs: usize,
) -> Result<Vec<RunResult>> {
    (0..runs)
        .map(|r| run(config, objective, base_seed + r as u64))
        .collect()
}

/// Independent seeded runs, data-parallel over seeds when the `parallel`
/// feature is enabled (results are identical to [`run_many_serial`] either
/// way — runs share no state).
#[cfg(feature = "parallel")]
pub fn run_many(
    config: &OptimizerConfig,
    objective: &dyn Objective,
    base_seed: u64,
    runs: usize,
) -> Result<Vec<RunResult>> {
    use rayon::prelude::*;
    (0..runs)
        .into_par_iter()
        .map(|r| run(config, objective, base_seed + r as u64))
        .collect()
}

/// Sequential fallback used when the `parallel` feature is disabled.
#[cfg(not(feature = "parallel"))]
pub fn run_many(
    config: &OptimizerConfig,
    objective: &dyn Objective,
    base_seed: u64,
    runs: usize,
) -> Result<Vec<RunResult>> {
    run_many_serial(config, objective, base_seed, runs)
}

/// Linear interpolation between schedule endpoints at fraction `frac` of the
/// evaluation budget (clamped to [0, 1]).
pub fn lerp(start: f64, end: f64, frac: f64) -> f64 {
    let f = frac.clamp(0.0, 1.0);
    start + (end - start) * f
}

/// Best-so-far bookkeeping shared by all optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSoFar {
    pub index: usize,
    pub fitness: f64,
    pub position: Vec<f64>,
}

impl BestSoFar {
    /// Folds in particle `i` after its evaluation; returns true on change.
    pub(crate) fn absorb(&mut self, i: usize, particle: &Particle) -> bool {
        if particle.pbest_fitness < self.fitness {
            self.fitness = particle.pbest_fitness;
            self.position.copy_from_slice(&particle.pbest);
            self.index = i;
            true
        } else {
            false
        }
    }
}

/// Spawns and evaluates an initial swarm in index order.
pub(crate) fn init_swarm(
    objective: &dyn Objective,
    population: usize,
    velocity_fraction: f64,
    rng: &mut RngStream,
) -> Result<(Vec<Particle>, Vec<f64>, BestSoFar)> {
    let v_max = objective.bounds().velocity_cap(velocity_fraction);
    let mut swarm = Vec::with_capacity(population);
    for _ in 0..population {
        swarm.push(Particle::spawn(objective.bounds(), &v_max, rng));
    }
    let mut best = BestSoFar {
        index: 0,
        fitness: f64::INFINITY,
        position: vec![0.0; objective.dimension()],
    };
    for (i, p) in swarm.iter_mut().enumerate() {
        evaluate_and_update_pbest(p, objective)?;
        best.absorb(i, p);
    }
    Ok((swarm, v_max, best))
}

/// Diversity of the whole swarm and of the two index-contiguous
/// sub-populations `[0, explore_size)` and `[explore_size, n)`.
pub(crate) fn diversity_split(swarm: &[Particle], explore_size: usize) -> (f64, f64, f64) {
    let all: Vec<&[f64]> = swarm.iter().map(|p| p.position.as_slice()).collect();
    let d_all = diversity(&all);
    let d_explore = diversity(&all[..explore_size]);
    let d_exploit = diversity(&all[explore_size..]);
    (d_explore, d_exploit, d_all)
}

/// Diversity triple for optimizers without sub-populations: all three columns
/// carry the whole-swarm diversity.
pub(crate) fn diversity_uniform(swarm: &[Particle]) -> (f64, f64, f64) {
    let all: Vec<&[f64]> = swarm.iter().map(|p| p.position.as_slice()).collect();
    let d = diversity(&all);
    (d, d, d)
}

/// Initial (iteration 0) trace record emitted right after swarm evaluation.
pub(crate) fn initial_record(
    objective: &dyn Objective,
    best: &BestSoFar,
    evaluations: u64,
    divs: (f64, f64, f64),
) -> TraceRecord {
    TraceRecord {
        iteration: 0,
        evaluations,
        best_error: error_of(objective, best.fitness),
        div_explore: divs.0,
        div_exploit: divs.1,
        div_all: divs.2,
        sbest: -1,
    }
}
