//! The spade optimizer: a heterogeneous swarm whose exploitation
//! sub-population is attracted each iteration to the surprisingly popular
//! particle chosen by group voting over the knowledge-transfer topology.

use super::{
    diversity_split, init_swarm, initial_record, lerp, BestSoFar, RunResult, TraceRecord,
};
use crate::exemplar::{build_exemplar, exemplar_position, learning_probability, maybe_refresh, ExemplarState};
use crate::spa;
use crate::swarm::{
    clamp_velocity, clip_position, error_of, evaluate_and_update_pbest, Objective, RngStream,
};
use crate::topology::{record_learned_edge, DegreeSchedule, TopologyState, TopologyVariant};
use crate::{Error, Result};
use rand::Rng;

/// Full parameterisation of one spade run. [`SpadeConfig::protocol`] gives
/// the reference experimental settings; only the budget is problem-dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct SpadeConfig {
    /// Swarm size; the first 3/8 of the indices form the exploration
    /// sub-population, the rest the exploitation sub-population.
    pub population: usize,
    /// Total objective-evaluation budget for the run.
    pub budget: u64,
    /// Inertia weight, interpolated linearly over the evaluation fraction.
    pub w_schedule: (f64, f64),
    /// Exploitation attraction toward the composite exemplar.
    pub c1_schedule: (f64, f64),
    /// Exploitation attraction toward the surprisingly popular particle.
    pub c2_schedule: (f64, f64),
    /// Exploration attraction toward the composite exemplar.
    pub c_schedule: (f64, f64),
    /// Initial out-degree of the distance graph (self-loop included).
    pub knn_degree: usize,
    /// Total degree growth over the run.
    pub degree_growth: usize,
    /// Number of best-ranked particles eligible for expert edges.
    pub expert_count: usize,
    /// Velocity cap as a fraction of each dimension's bound width.
    pub velocity_fraction: f64,
    /// Stagnation threshold (in evaluations) that triggers exemplar rebuild.
    pub refresh_gap: u32,
    pub topology: TopologyVariant,
}

impl SpadeConfig {
    /// Reference protocol settings; set `budget` per problem (the protocol
    /// uses dimension × 10000).
    pub fn protocol(budget: u64) -> Self {
        SpadeConfig {
            population: 40,
            budget,
            w_schedule: (0.99, 0.2),
            c1_schedule: (2.5, 0.5),
            c2_schedule: (0.5, 2.5),
            c_schedule: (3.0, 1.5),
            knn_degree: 2,
            degree_growth: 6,
            expert_count: 5,
            velocity_fraction: 0.1,
            refresh_gap: 7,
            topology: TopologyVariant::Distance,
        }
    }

    /// Size of the exploration sub-population (3/8 of the swarm, the
    /// remaining 5/8 exploit).
    pub fn exploration_size(&self) -> usize {
        self.population * 3 / 8
    }

    pub fn validate(&self) -> Result<()> {
        let ne = self.exploration_size();
        if ne < 2 || self.population - ne < 2 {
            return Err(Error::InvalidConfig(format!(
                "population {} splits into sub-populations of {} and {}; both need >= 2",
                self.population,
                ne,
                self.population - ne
            )));
        }
        if self.budget < self.population as u64 {
            return Err(Error::InvalidConfig(format!(
                "budget {} cannot cover one evaluation per particle (population {})",
                self.budget, self.population
            )));
        }
        if self.knn_degree == 0 {
            return Err(Error::InvalidConfig("knn_degree must be >= 1".into()));
        }
        if !(self.velocity_fraction > 0.0 && self.velocity_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "velocity_fraction {} outside (0, 1]",
                self.velocity_fraction
            )));
        }
        if self.refresh_gap == 0 {
            return Err(Error::InvalidConfig("refresh_gap must be >= 1".into()));
        }
        for (name, (a, b)) in [
            ("w", self.w_schedule),
            ("c1", self.c1_schedule),
            ("c2", self.c2_schedule),
            ("c", self.c_schedule),
        ] {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "schedule {name} has non-finite endpoints ({a}, {b})"
                )));
            }
        }
        Ok(())
    }
}

/// Exploration velocity rule, one dimension:
/// `v' = w*v + c*r*(exemplar - x)` (clamping is applied by the caller).
#[inline]
pub fn exploration_velocity(v: f64, x: f64, exemplar: f64, w: f64, c: f64, r: f64) -> f64 {
    w * v + c * r * (exemplar - x)
}

/// Exploitation velocity rule, one dimension:
/// `v' = w*v + c1*r1*(exemplar - x) + c2*r2*(group_choice - x)`.
#[inline]
#[allow(clippy::too_many_arguments)]
pub fn exploitation_velocity(
    v: f64,
    x: f64,
    exemplar: f64,
    group_choice: f64,
    w: f64,
    c1: f64,
    c2: f64,
    r1: f64,
    r2: f64,
) -> f64 {
    w * v + c1 * r1 * (exemplar - x) + c2 * r2 * (group_choice - x)
}

/// Live state of a spade run between iterations.
#[derive(Debug, Clone)]
pub struct SpadeState {
    pub swarm: Vec<crate::swarm::Particle>,
    pub exemplars: Vec<ExemplarState>,
    pub best: BestSoFar,
    pub iteration: u64,
    pub evaluations: u64,
    /// Size of the exploration sub-population (indices `0..explore_size`).
    pub explore_size: usize,
    topo: TopologyState,
    etas: Vec<f64>,
    v_max: Vec<f64>,
    t_max: u64,
    explore_scope: Vec<usize>,
    full_scope: Vec<usize>,
    scratch: Vec<f64>,
}

impl SpadeState {
    /// Spawns, evaluates, and equips the initial swarm (consumes exactly
    /// `population` evaluations).
    pub fn init(cfg: &SpadeConfig, objective: &dyn Objective, rng: &mut RngStream) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.population;
        let ne = cfg.exploration_size();
        let (swarm, v_max, best) = init_swarm(objective, n, cfg.velocity_fraction, rng)?;
        let explore_scope: Vec<usize> = (0..ne).collect();
        let full_scope: Vec<usize> = (0..n).collect();
        let mut etas = vec![0.0; n];
        for (i, eta) in etas.iter_mut().enumerate() {
            *eta = if i < ne {
                learning_probability(i + 1, ne)
            } else {
                learning_probability(i - ne + 1, n - ne)
            };
        }
        let mut exemplars = Vec::with_capacity(n);
        for (i, &eta) in etas.iter().enumerate() {
            let scope = if i < ne { &explore_scope } else { &full_scope };
            exemplars.push(build_exemplar(i, &swarm, scope, eta, rng)?);
        }
        let topo = TopologyState::new(
            cfg.topology,
            n,
            DegreeSchedule::new(cfg.knn_degree, cfg.degree_growth),
            cfg.expert_count.min(n),
        );
        Ok(SpadeState {
            swarm,
            exemplars,
            best,
            iteration: 0,
            evaluations: n as u64,
            explore_size: ne,
            topo,
            etas,
            v_max,
            t_max: (cfg.budget / n as u64).max(1),
            explore_scope,
            full_scope,
            scratch: Vec::with_capacity(objective.dimension()),
        })
    }

    /// Trace record describing the state right after initialisation.
    pub fn initial_record(&self, objective: &dyn Objective) -> TraceRecord {
        initial_record(
            objective,
            &self.best,
            self.evaluations,
            diversity_split(&self.swarm, self.explore_size),
        )
    }

    pub fn learned_edges(&self) -> &crate::topology::AdjacencyMatrix {
        self.topo.learned()
    }
}

/// One full iteration: build the decision graph, select the surprisingly
/// popular particle, move and evaluate every particle (exploration indices
/// first), refresh expired exemplars, and record learned edges. Consumes
/// exactly `population` evaluations.
pub fn spade_step(
    state: &mut SpadeState,
    cfg: &SpadeConfig,
    objective: &dyn Objective,
    rng: &mut RngStream,
) -> Result<TraceRecord> {
    let n = cfg.population;
    let frac = state.evaluations as f64 / cfg.budget as f64;
    let w = lerp(cfg.w_schedule.0, cfg.w_schedule.1, frac);
    let c = lerp(cfg.c_schedule.0, cfg.c_schedule.1, frac);
    let c1 = lerp(cfg.c1_schedule.0, cfg.c1_schedule.1, frac);
    let c2 = lerp(cfg.c2_schedule.0, cfg.c2_schedule.1, frac);

    // (1)-(4): assemble this iteration's decision graph.
    let positions: Vec<Vec<f64>> = state.swarm.iter().map(|p| p.position.clone()).collect();
    let pre_fitness: Vec<f64> = state.swarm.iter().map(|p| p.fitness).collect();
    let graph = state
        .topo
        .build_graph(&positions, &pre_fitness, state.iteration, state.t_max, rng)?;

    // (5): surprisingly popular selection; its position is snapshotted before
    // anyone moves.
    let decision = spa::run_spa(&graph, &pre_fitness)?;
    let sbest = decision.sbest;
    let sbest_position = &positions[sbest];

    // (6)+(7): move, evaluate, and book-keep each particle in index order.
    for i in 0..n {
        exemplar_position(&state.exemplars[i], &state.swarm, &mut state.scratch);
        let exploring = i < state.explore_size;
        {
            let p = &mut state.swarm[i];
            // Velocity, position, the exemplar scratch row, and the group-choice
            // position advance in lockstep by index.
            #[allow(clippy::needless_range_loop)]
            if exploring {
                for d in 0..p.velocity.len() {
                    let r = rng.gen::<f64>();
                    p.velocity[d] =
                        exploration_velocity(p.velocity[d], p.position[d], state.scratch[d], w, c, r);
                }
            } else {
                for d in 0..p.velocity.len() {
                    let r1 = rng.gen::<f64>();
                    let r2 = rng.gen::<f64>();
                    p.velocity[d] = exploitation_velocity(
                        p.velocity[d],
                        p.position[d],
                        state.scratch[d],
                        sbest_position[d],
                        w,
                        c1,
                        c2,
                        r1,
                        r2,
                    );
                }
            }
            clamp_velocity(&mut p.velocity, &state.v_max);
            for d in 0..p.position.len() {
                p.position[d] += p.velocity[d];
            }
            clip_position(&mut p.position, &mut p.velocity, objective.bounds());
        }
        evaluate_and_update_pbest(&mut state.swarm[i], objective)?;
        state.best.absorb(i, &state.swarm[i]);
        if maybe_refresh(state.swarm[i].stagnation, cfg.refresh_gap) {
            state.swarm[i].stagnation = 0;
            let scope: &[usize] = if exploring {
                &state.explore_scope
            } else {
                &state.full_scope
            };
            state.exemplars[i] = build_exemplar(i, &state.swarm, scope, state.etas[i], rng)?;
        }
    }

    // (8): persist edges for voters whose trust in the group choice paid off.
    if cfg.topology.uses_learned_edges() {
        // Votes, pre-update fitness, and the swarm are parallel arrays over particles.
        #[allow(clippy::needless_range_loop)]
        for i in 0..n {
            if decision.votes[i] == sbest {
                let improved_now = state.swarm[i].fitness < pre_fitness[i];
                record_learned_edge(state.topo.learned_mut(), i, sbest, improved_now);
            }
        }
    }

    state.iteration += 1;
    state.evaluations += n as u64;
    let divs = diversity_split(&state.swarm, state.explore_size);
    Ok(TraceRecord {
        iteration: state.iteration,
        evaluations: state.evaluations,
        best_error: error_of(objective, state.best.fitness),
        div_explore: divs.0,
        div_exploit: divs.1,
        div_all: divs.2,
        sbest: sbest as i64,
    })
}

/// Runs spade to budget exhaustion. Iterations that cannot be fully paid for
/// from the remaining budget are not started, so the total evaluation count
/// lands in `(budget - population, budget]`.
pub fn run_spade(cfg: &SpadeConfig, objective: &dyn Objective, seed: u64) -> Result<RunResult> {
    let mut rng = RngStream::seeded(seed);
    let mut state = SpadeState::init(cfg, objective, &mut rng)?;
    let mut trace = vec![state.initial_record(objective)];
    while state.evaluations + cfg.population as u64 <= cfg.budget {
        trace.push(spade_step(&mut state, cfg, objective, &mut rng)?);
    }
    Ok(RunResult {
        seed,
        best_position: state.best.position.clone(),
        best_fitness: state.best.fitness,
        error: error_of(objective, state.best.fitness),
        evaluations: state.evaluations,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::Bounds;

    struct Sphere {
        bounds: Bounds,
    }

    impl Sphere {
        fn new(dim: usize) -> Self {
            Sphere {
                bounds: Bounds::uniform(dim, -100.0, 100.0).unwrap(),
            }
        }
    }

    impl Objective for Sphere {
        fn name(&self) -> &str {
            "sphere"
        }
        fn dimension(&self) -> usize {
            self.bounds.dim()
        }
        fn bounds(&self) -> &Bounds {
            &self.bounds
        }
        fn evaluate(&self, x: &[f64]) -> f64 {
            x.iter().map(|v| v * v).sum()
        }
        fn known_optimum(&self) -> Option<f64> {
            Some(0.0)
        }
    }

    fn small_config(population: usize, budget: u64) -> SpadeConfig {
        let mut cfg = SpadeConfig::protocol(budget);
        cfg.population = population;
        cfg
    }

    #[test]
    fn exploration_velocity_hand_cases() {
        // Fixed point: at the exemplar with zero velocity.
        assert_eq!(exploration_velocity(0.0, 4.0, 4.0, 0.7, 2.0, 0.9), 0.0);
        // Zero coefficient leaves velocity untouched.
        assert_eq!(exploration_velocity(2.0, 0.0, 4.0, 1.0, 0.0, 0.9), 2.0);
        // w=0.5, c=2, r=0.5, x=0, exemplar=4, v=2 → 1 + 4 = 5.
        assert_eq!(exploration_velocity(2.0, 0.0, 4.0, 0.5, 2.0, 0.5), 5.0);
    }

    #[test]
    fn exploitation_velocity_hand_cases() {
        // Fixed point at exemplar = group choice = position.
        assert_eq!(
            exploitation_velocity(0.0, 1.0, 1.0, 1.0, 0.9, 2.0, 2.0, 0.3, 0.7),
            0.0
        );
        // c2 = 0 reduces exactly to the exploration rule with c1.
        let v_exploit = exploitation_velocity(1.5, 0.5, 3.0, 9.0, 0.6, 1.8, 0.0, 0.25, 0.99);
        let v_explore = exploration_velocity(1.5, 0.5, 3.0, 0.6, 1.8, 0.25);
        assert_eq!(v_exploit, v_explore);
        // w=0.5, c1=c2=1, r1=r2=1, x=0, exemplar=2, choice=4, v=0 → 6.
        assert_eq!(
            exploitation_velocity(0.0, 0.0, 2.0, 4.0, 0.5, 1.0, 1.0, 1.0, 1.0),
            6.0
        );
    }

    #[test]
    fn exploitation_rule_doubles_as_gbest_guided_update() {
        // Pinning the group choice to the global best position turns the
        // exploitation rule into the classic exemplar+gbest update.
        let gbest = 7.0;
        let v = exploitation_velocity(0.5, 1.0, 3.0, gbest, 0.5, 1.0, 1.0, 0.5, 0.5);
        assert_eq!(v, 0.25 + 0.5 * (3.0 - 1.0) + 0.5 * (gbest - 1.0));
    }

    #[test]
    fn config_validation_catches_bad_values() {
        assert!(SpadeConfig::protocol(400_000).validate().is_ok());
        assert!(small_config(4, 1000).validate().is_err()); // 1-member explore group
        assert!(small_config(40, 30).validate().is_err()); // budget < population
        let mut cfg = small_config(40, 1000);
        cfg.knn_degree = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(40, 1000);
        cfg.velocity_fraction = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(40, 1000);
        cfg.refresh_gap = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(40, 1000);
        cfg.w_schedule = (f64::NAN, 0.2);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn one_step_on_sphere_keeps_best_nonincreasing() {
        let obj = Sphere::new(4);
        let cfg = small_config(8, 800);
        let mut rng = RngStream::seeded(3);
        let mut state = SpadeState::init(&cfg, &obj, &mut rng).unwrap();
        let best0 = state.best.fitness;
        let rec = spade_step(&mut state, &cfg, &obj, &mut rng).unwrap();
        assert!(state.best.fitness <= best0);
        assert_eq!(rec.iteration, 1);
        assert_eq!(rec.evaluations, 16);
        assert_eq!(state.evaluations, 16);
        assert!(rec.sbest >= 0 && rec.sbest < 8);
    }

    #[test]
    fn unanimity_under_complete_graph_without_experts() {
        // Degree covers the whole swarm and no expert edges: every particle
        // sees everyone, so the group choice is the current-fitness best.
        let obj = Sphere::new(3);
        let mut cfg = small_config(8, 800);
        cfg.knn_degree = 8;
        cfg.degree_growth = 0;
        cfg.expert_count = 0;
        let mut rng = RngStream::seeded(11);
        let mut state = SpadeState::init(&cfg, &obj, &mut rng).unwrap();
        let pre_best = (0..8)
            .min_by(|&a, &b| state.swarm[a].fitness.total_cmp(&state.swarm[b].fitness))
            .unwrap();
        let rec = spade_step(&mut state, &cfg, &obj, &mut rng).unwrap();
        assert_eq!(rec.sbest, pre_best as i64);
    }

    #[test]
    fn budget_of_one_round_gives_single_trace_record() {
        let obj = Sphere::new(3);
        let cfg = small_config(8, 8);
        let result = run_spade(&cfg, &obj, 1).unwrap();
        assert_eq!(result.trace.len(), 1);
        assert_eq!(result.evaluations, 8);
        assert_eq!(result.trace[0].sbest, -1);
    }

    #[test]
    fn budget_is_respected_and_trace_monotone() {
        let obj = Sphere::new(5);
        let cfg = small_config(16, 1000); // 1000/16 = 62 full rounds = 992
        let result = run_spade(&cfg, &obj, 7).unwrap();
        assert!(result.evaluations <= 1000);
        assert!(result.evaluations > 1000 - 16);
        assert_eq!(result.evaluations, 992);
        let mut prev = f64::INFINITY;
        for rec in &result.trace {
            assert!(rec.best_error <= prev, "best error must never rise");
            prev = rec.best_error;
        }
        assert_eq!(result.trace.len(), 62);
        assert_eq!(
            result.error,
            result.trace.last().unwrap().best_error,
            "final error matches trace tail"
        );
        assert!(result.error < result.trace[0].best_error, "sphere improves");
    }

    #[test]
    fn same_seed_reproduces_run_exactly() {
        let obj = Sphere::new(4);
        let cfg = small_config(16, 2000);
        let a = run_spade(&cfg, &obj, 42).unwrap();
        let b = run_spade(&cfg, &obj, 42).unwrap();
        assert_eq!(a, b);
        let c = run_spade(&cfg, &obj, 43).unwrap();
        assert_ne!(a.best_position, c.best_position);
    }

    #[test]
    fn serial_topology_accumulates_learned_edges() {
        let obj = Sphere::new(4);
        let mut cfg = small_config(16, 4000);
        cfg.topology = TopologyVariant::Serial;
        let mut rng = RngStream::seeded(5);
        let mut state = SpadeState::init(&cfg, &obj, &mut rng).unwrap();
        while state.evaluations + 16 <= cfg.budget {
            spade_step(&mut state, &cfg, &obj, &mut rng).unwrap();
        }
        let learned: usize = (0..16).map(|i| state.learned_edges().out_degree(i)).sum();
        assert!(learned > 0, "a sphere run should record at least one payoff edge");
    }
}
