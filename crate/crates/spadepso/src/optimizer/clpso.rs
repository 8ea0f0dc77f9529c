//! Comprehensive-learning PSO baseline: every particle follows a composite
//! exemplar built from tournament-selected personal bests over the whole
//! population, with stagnation-gated exemplar refresh.

use super::{diversity_uniform, init_swarm, initial_record, lerp, RunResult, TraceRecord};
use crate::exemplar::{
    build_exemplar, exemplar_position, learning_probability, maybe_refresh, ExemplarState,
};
use crate::optimizer::spade::exploration_velocity;
use crate::swarm::{
    clamp_velocity, clip_position, error_of, evaluate_and_update_pbest, Objective, RngStream,
};
use crate::{Error, Result};
use rand::Rng;

/// Baseline CLPSO settings (reference protocol: w 0.9→0.4, single
/// acceleration coefficient c = 2, refresh gap 7).
#[derive(Debug, Clone, PartialEq)]
pub struct ClpsoConfig {
    pub population: usize,
    pub budget: u64,
    pub w_schedule: (f64, f64),
    pub c: f64,
    pub refresh_gap: u32,
    pub velocity_fraction: f64,
}

impl ClpsoConfig {
    pub fn protocol(budget: u64) -> Self {
        ClpsoConfig {
            population: 40,
            budget,
            w_schedule: (0.9, 0.4),
            c: 2.0,
            refresh_gap: 7,
            velocity_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidConfig(
                "comprehensive learning needs a population of at least 2".into(),
            ));
        }
        if self.budget < self.population as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget {} cannot cover one evaluation per particle (population {})",
                self.budget, self.population
            )));
        }
        if self.refresh_gap == 0 {
            return Err(Error::InvalidConfig("refresh_gap must be >= 1".into()));
        }
        if !(self.velocity_fraction > 0.0 && self.velocity_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "velocity_fraction {} outside (0, 1]",
                self.velocity_fraction
            )));
        }
        Ok(())
    }
}

/// Runs baseline CLPSO to budget exhaustion.
pub fn run_clpso(cfg: &ClpsoConfig, objective: &dyn Objective, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let n = cfg.population;
    let mut rng = RngStream::seeded(seed);
    let (mut swarm, v_max, mut best) = init_swarm(objective, n, cfg.velocity_fraction, &mut rng)?;
    let scope: Vec<usize> = (0..n).collect();
    let etas: Vec<f64> = (0..n).map(|i| learning_probability(i + 1, n)).collect();
    let mut exemplars: Vec<ExemplarState> = Vec::with_capacity(n);
    for (i, &eta) in etas.iter().enumerate() {
        exemplars.push(build_exemplar(i, &swarm, &scope, eta, &mut rng)?);
    }
    let mut evaluations = n as u64;
    let mut iteration = 0u64;
    let mut trace = vec![initial_record(
        objective,
        &best,
        evaluations,
        diversity_uniform(&swarm),
    )];
    let mut scratch: Vec<f64> = Vec::with_capacity(objective.dimension());

    while evaluations + n as u64 <= cfg.budget {
        let frac = evaluations as f64 / cfg.budget as f64;
        let w = lerp(cfg.w_schedule.0, cfg.w_schedule.1, frac);
        for i in 0..n {
            exemplar_position(&exemplars[i], &swarm, &mut scratch);
            {
                let p = &mut swarm[i];
                // Velocity, position, and the exemplar scratch row advance in lockstep by index.
                #[allow(clippy::needless_range_loop)]
                for d in 0..p.velocity.len() {
                    let r = rng.gen::<f64>();
                    p.velocity[d] =
                        exploration_velocity(p.velocity[d], p.position[d], scratch[d], w, cfg.c, r);
                }
                clamp_velocity(&mut p.velocity, &v_max);
                for d in 0..p.position.len() {
                    p.position[d] += p.velocity[d];
                }
                clip_position(&mut p.position, &mut p.velocity, objective.bounds());
            }
            evaluate_and_update_pbest(&mut swarm[i], objective)?;
            best.absorb(i, &swarm[i]);
            if maybe_refresh(swarm[i].stagnation, cfg.refresh_gap) {
                swarm[i].stagnation = 0;
                exemplars[i] = build_exemplar(i, &swarm, &scope, etas[i], &mut rng)?;
            }
        }
        iteration += 1;
        evaluations += n as u64;
        let divs = diversity_uniform(&swarm);
        trace.push(TraceRecord {
            iteration,
            evaluations,
            best_error: error_of(objective, best.fitness),
            div_explore: divs.0,
            div_exploit: divs.1,
            div_all: divs.2,
            sbest: -1,
        });
    }

    Ok(RunResult {
        seed,
        best_position: best.position.clone(),
        best_fitness: best.fitness,
        error: error_of(objective, best.fitness),
        evaluations,
        trace,
    })
}
