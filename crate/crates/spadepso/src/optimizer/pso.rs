//! Canonical inertia-weight global-best PSO baseline.

use super::{diversity_uniform, init_swarm, initial_record, lerp, RunResult, TraceRecord};
use crate::swarm::{
    clamp_velocity, clip_position, error_of, evaluate_and_update_pbest, Objective, RngStream,
};
use crate::{Error, Result};
use rand::Rng;

/// Baseline PSO settings (reference protocol: w 0.9→0.4, c1 = c2 = 2).
#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub population: usize,
    pub budget: u64,
    pub w_schedule: (f64, f64),
    pub c1: f64,
    pub c2: f64,
    pub velocity_fraction: f64,
}

impl PsoConfig {
    pub fn protocol(budget: u64) -> Self {
        PsoConfig {
            population: 40,
            budget,
            w_schedule: (0.9, 0.4),
            c1: 2.0,
            c2: 2.0,
            velocity_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::InvalidConfig("population must be >= 1".into()));
        }
        if self.budget < self.population as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget {} cannot cover one evaluation per particle (population {})",
                self.budget, self.population
            )));
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

/// Canonical PSO velocity rule, one dimension:
/// `v' = w*v + c1*r1*(pbest - x) + c2*r2*(gbest - x)`.
/// Takes each scalar operand of that formula directly.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn pso_velocity(
    v: f64,
    x: f64,
    pbest: f64,
    gbest: f64,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    w * v + c1 * r1 * (pbest - x) + c2 * r2 * (gbest - x)
}

/// Runs baseline PSO to budget exhaustion.
pub fn run_pso(cfg: &PsoConfig, objective: &dyn Objective, seed: u64) -> Result<RunResult> {
    cfg.validate()?;
    let n = cfg.population;
    let mut rng = RngStream::seeded(seed);
    let (mut swarm, v_max, mut best) = init_swarm(objective, n, cfg.velocity_fraction, &mut rng)?;
    let mut evaluations = n as u64;
    let mut iteration = 0u64;
    let mut trace = vec![initial_record(
        objective,
        &best,
        evaluations,
        diversity_uniform(&swarm),
    )];

    while evaluations + n as u64 <= cfg.budget {
        let frac = evaluations as f64 / cfg.budget as f64;
        let w = lerp(cfg.w_schedule.0, cfg.w_schedule.1, frac);
        for (i, p) in swarm.iter_mut().enumerate() {
            for d in 0..p.velocity.len() {
                let r1 = rng.gen::<f64>();
                let r2 = rng.gen::<f64>();
                p.velocity[d] = pso_velocity(
                    p.velocity[d],
                    p.position[d],
                    p.pbest[d],
                    best.position[d],
                    w,
                    cfg.c1,
                    cfg.c2,
                    r1,
                    r2,
                );
            }
            clamp_velocity(&mut p.velocity, &v_max);
            for d in 0..p.position.len() {
                p.position[d] += p.velocity[d];
            }
            clip_position(&mut p.position, &mut p.velocity, objective.bounds());
            evaluate_and_update_pbest(p, objective)?;
            best.absorb(i, p);
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::Bounds;

    struct Sphere(Bounds);

    impl Objective for Sphere {
        fn name(&self) -> &str {
            "sphere"
        }
        fn dimension(&self) -> usize {
            self.0.dim()
        }
        fn bounds(&self) -> &Bounds {
            &self.0
        }
        fn evaluate(&self, x: &[f64]) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
        fn known_optimum(&self) -> Option<f64> {
            Some(0.0)
        }
    }

    #[test]
    fn pso_velocity_hand_cases() {
        // Converged fixed point.
        assert_eq!(pso_velocity(0.0, 2.0, 2.0, 2.0, 0.7, 2.0, 2.0, 0.4, 0.6), 0.0);
        // w=0, c1=c2=2, r=0.5, pbest-x=1, gbest-x=3 → 1 + 3 = 4.
        assert_eq!(pso_velocity(0.0, 0.0, 1.0, 3.0, 0.0, 2.0, 2.0, 0.5, 0.5), 4.0);
    }

    #[test]
    fn half_budget_inertia_is_midpoint() {
        assert!((lerp(0.9, 0.4, 0.5) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn pso_reaches_tight_error_on_sphere() {
        let obj = Sphere(Bounds::uniform(10, -100.0, 100.0).unwrap());
        let cfg = PsoConfig::protocol(100_000);
        let result = run_pso(&cfg, &obj, 1).unwrap();
        assert!(
            result.error < 1e-3,
            "sphere D=10 should reach < 1e-3 (got {})",
            result.error
        );
    }

    #[test]
    fn pso_run_is_deterministic_and_budgeted() {
        let obj = Sphere(Bounds::uniform(4, -10.0, 10.0).unwrap());
        let cfg = PsoConfig {
            population: 12,
            budget: 600,
            ..PsoConfig::protocol(600)
        };
        let a = run_pso(&cfg, &obj, 9).unwrap();
        let b = run_pso(&cfg, &obj, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 600);
        assert_eq!(a.trace.len(), 50); // init + 49 full rounds of 12
        for rec in &a.trace {
            assert_eq!(rec.sbest, -1, "baseline PSO has no group choice");
            assert_eq!(rec.div_explore, rec.div_all);
            assert_eq!(rec.div_exploit, rec.div_all);
        }
    }
}
