//! Comprehensive-learning exemplar construction.
//!
//! Each particle follows a per-dimension composite exemplar: every dimension
//! either keeps the particle's own personal best or borrows the personal best
//! of a tournament winner drawn from the particle's learning scope. The
//! probability of borrowing grows with the particle's index inside its
//! sub-population, so early particles exploit their own history while late
//! particles mix aggressively.

use crate::swarm::Particle;
use crate::{Error, Result};
use rand::Rng;

/// Probability that a dimension borrows from a tournament winner, for the
/// particle at 1-based rank `i` inside a sub-population of size `ps`:
/// `0.05 + 0.45 * (exp(10(i-1)/(ps-1)) - 1) / (exp(10) - 1)`.
/// A single-member sub-population gets the floor value 0.05.
pub fn learning_probability(i: usize, ps: usize) -> f64 {
    debug_assert!(i >= 1 && i <= ps.max(1), "rank {i} outside 1..={ps}");
    if ps <= 1 {
        return 0.05;
    }
    let t = 10.0 * (i as f64 - 1.0) / (ps as f64 - 1.0);
    0.05 + 0.45 * (t.exp() - 1.0) / (10f64.exp() - 1.0)
}

/// A built exemplar: which particle's personal best each dimension follows.
///
/// `values` snapshots the borrowed coordinates at build time (useful for
/// provenance and tests); optimizers read the *live* personal bests through
/// `sources` via [`exemplar_position`], so an exemplar keeps tracking its
/// source particles as they improve.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarState {
    pub owner: usize,
    /// Source particle per dimension (`owner` for kept dimensions).
    pub sources: Vec<usize>,
    /// Snapshot of the exemplar coordinates at build time.
    pub values: Vec<f64>,
}

/// Two-candidate tournament over `pool` (owner already excluded): draws two
/// distinct members, the one with the better personal-best fitness wins.
/// A single-member pool wins by default without consuming randomness.
fn tournament(pool: &[usize], swarm: &[Particle], rng: &mut impl Rng) -> usize {
    if pool.len() == 1 {
        return pool[0];
    }
    let a = rng.gen_range(0..pool.len());
    let mut b = rng.gen_range(0..pool.len() - 1);
    if b >= a {
        b += 1;
    }
    if swarm[pool[b]].pbest_fitness < swarm[pool[a]].pbest_fitness {
        pool[b]
    } else {
        pool[a]
    }
}

/// Builds an exemplar for `owner`. Per dimension, with probability `eta` the
/// dimension follows a tournament winner from `scope` (excluding the owner),
/// otherwise the owner's own personal best. If every dimension kept the
/// owner, one uniformly random dimension is forced to a tournament winner, so
/// the exemplar always differs from the owner in source somewhere.
pub fn build_exemplar(
    owner: usize,
    swarm: &[Particle],
    scope: &[usize],
    eta: f64,
    rng: &mut impl Rng,
) -> Result<ExemplarState> {
    if scope.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "exemplar scope needs at least two particles (got {})",
            scope.len()
        )));
    }
    if !scope.contains(&owner) {
        return Err(Error::InvalidInput(format!(
            "owner {owner} is outside its learning scope"
        )));
    }
    let pool: Vec<usize> = scope.iter().copied().filter(|&i| i != owner).collect();
    let dim = swarm[owner].pbest.len();
    let mut sources = vec![owner; dim];
    let mut any_borrowed = false;
    for source in sources.iter_mut() {
        if rng.gen::<f64>() < eta {
            *source = tournament(&pool, swarm, rng);
            any_borrowed = true;
        }
    }
    if !any_borrowed {
        let d = rng.gen_range(0..dim);
        sources[d] = tournament(&pool, swarm, rng);
    }
    let values = sources
        .iter()
        .enumerate()
        .map(|(d, &s)| swarm[s].pbest[d])
        .collect();
    Ok(ExemplarState {
        owner,
        sources,
        values,
    })
}

/// True when the stagnation counter has reached the refresh gap `m`, i.e. the
/// exemplar should be rebuilt.
pub fn maybe_refresh(refresh_counter: u32, m: u32) -> bool {
    refresh_counter >= m
}

/// Materialises the exemplar's current coordinates by reading the live
/// personal bests of the source particles into `out`.
pub fn exemplar_position(state: &ExemplarState, swarm: &[Particle], out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        state
            .sources
            .iter()
            .enumerate()
            .map(|(d, &s)| swarm[s].pbest[d]),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::swarm::RngStream;

    #[test]
    fn learning_probability_endpoints() {
        assert!((learning_probability(1, 20) - 0.05).abs() < 1e-15);
        assert!((learning_probability(20, 20) - 0.5).abs() < 1e-12);
        // Midpoint of an odd-size population: 0.05 + 0.45(e^5-1)/(e^10-1).
        assert!((learning_probability(8, 15) - 0.0530119).abs() < 1e-6);
        // Degenerate single-member scope keeps the floor value.
        assert_eq!(learning_probability(1, 1), 0.05);
    }

    #[test]
    fn learning_probability_is_nondecreasing() {
        for ps in [2usize, 5, 15, 25, 40] {
            let mut prev = 0.0;
            for i in 1..=ps {
                let eta = learning_probability(i, ps);
                assert!(eta > prev, "eta must increase with rank (ps={ps}, i={i})");
                assert!((0.05 - 1e-15..=0.5 + 1e-12).contains(&eta));
                prev = eta;
            }
        }
    }

    fn make_swarm(pbest_fitness: &[f64], dim: usize) -> Vec<Particle> {
        pbest_fitness
            .iter()
            .enumerate()
            .map(|(i, &f)| Particle {
                position: vec![i as f64; dim],
                velocity: vec![0.0; dim],
                fitness: f,
                pbest: vec![10.0 * i as f64; dim],
                pbest_fitness: f,
                stagnation: 0,
            })
            .collect()
    }

    #[test]
    fn eta_zero_forces_exactly_one_borrowed_dimension() {
        let swarm = make_swarm(&[3.0, 1.0, 2.0, 4.0], 6);
        let scope = [0, 1, 2, 3];
        let mut rng = RngStream::seeded(5);
        let ex = build_exemplar(0, &swarm, &scope, 0.0, &mut rng).unwrap();
        let borrowed: Vec<usize> = (0..6).filter(|&d| ex.sources[d] != 0).collect();
        assert_eq!(borrowed.len(), 1, "exactly one forced dimension");
        let d = borrowed[0];
        assert!(scope.contains(&ex.sources[d]) && ex.sources[d] != 0);
        assert_eq!(ex.values[d], swarm[ex.sources[d]].pbest[d]);
        for d in (0..6).filter(|&d| ex.sources[d] == 0) {
            assert_eq!(ex.values[d], swarm[0].pbest[d]);
        }
    }

    #[test]
    fn eta_one_borrows_every_dimension() {
        let swarm = make_swarm(&[3.0, 1.0, 2.0, 4.0], 5);
        let scope = [0, 1, 2, 3];
        let mut rng = RngStream::seeded(6);
        let ex = build_exemplar(2, &swarm, &scope, 1.0, &mut rng).unwrap();
        assert!(ex.sources.iter().all(|&s| s != 2));
        assert!(ex.sources.iter().all(|&s| scope.contains(&s)));
    }

    #[test]
    fn two_member_scope_always_borrows_from_the_other() {
        let swarm = make_swarm(&[1.0, 2.0], 4);
        let mut rng = RngStream::seeded(7);
        let ex = build_exemplar(1, &swarm, &[0, 1], 1.0, &mut rng).unwrap();
        assert_eq!(ex.sources, vec![0, 0, 0, 0]);
        assert_eq!(ex.values, swarm[0].pbest);
    }

    #[test]
    fn tournament_prefers_better_pbest_fitness() {
        // Pool of two: whichever pair is drawn, index 1 (fitness 1.0) wins.
        let swarm = make_swarm(&[9.0, 1.0, 5.0], 2);
        let mut rng = RngStream::seeded(3);
        for _ in 0..20 {
            let w = tournament(&[1, 2], &swarm, &mut rng);
            assert_eq!(w, 1);
        }
    }

    #[test]
    fn scope_restricts_sources() {
        let swarm = make_swarm(&[5.0, 4.0, 3.0, 2.0, 1.0, 0.5], 8);
        let scope = [0, 1, 2];
        let mut rng = RngStream::seeded(11);
        for owner in scope {
            let ex = build_exemplar(owner, &swarm, &scope, 0.5, &mut rng).unwrap();
            assert!(
                ex.sources.iter().all(|s| scope.contains(s)),
                "sources {:?} must stay inside scope",
                ex.sources
            );
        }
    }

    #[test]
    fn build_is_deterministic_given_seed() {
        let swarm = make_swarm(&[5.0, 4.0, 3.0, 2.0], 10);
        let scope = [0, 1, 2, 3];
        let a = build_exemplar(1, &swarm, &scope, 0.3, &mut RngStream::seeded(99)).unwrap();
        let b = build_exemplar(1, &swarm, &scope, 0.3, &mut RngStream::seeded(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_scopes_are_rejected() {
        let swarm = make_swarm(&[1.0, 2.0], 3);
        let mut rng = RngStream::seeded(1);
        assert!(build_exemplar(0, &swarm, &[0], 0.5, &mut rng).is_err());
        assert!(build_exemplar(0, &swarm, &[1, 2], 0.5, &mut rng).is_err());
    }

    #[test]
    fn refresh_boundary() {
        assert!(!maybe_refresh(0, 7));
        assert!(!maybe_refresh(6, 7));
        assert!(maybe_refresh(7, 7));
        assert!(maybe_refresh(8, 7));
    }

    #[test]
    fn exemplar_position_reads_live_pbests() {
        let mut swarm = make_swarm(&[2.0, 1.0], 3);
        let mut rng = RngStream::seeded(4);
        let ex = build_exemplar(0, &swarm, &[0, 1], 1.0, &mut rng).unwrap();
        assert_eq!(ex.sources, vec![1, 1, 1]);
        let mut buf = Vec::new();
        exemplar_position(&ex, &swarm, &mut buf);
        assert_eq!(buf, vec![10.0, 10.0, 10.0]);
        // The source particle improves; the exemplar follows automatically.
        swarm[1].pbest = vec![-1.0, -2.0, -3.0];
        exemplar_position(&ex, &swarm, &mut buf);
        assert_eq!(buf, vec![-1.0, -2.0, -3.0]);
        // The snapshot keeps the build-time values.
        assert_eq!(ex.values, vec![10.0, 10.0, 10.0]);
    }
}
