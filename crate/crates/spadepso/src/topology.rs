//! Knowledge-transfer topology: who can assess whom.
//!
//! Each iteration the optimizer builds a directed graph over the swarm and the
//! decision engine runs on it. Depending on the variant, the graph is the
//! union of:
//! - a distance-based kNN graph whose out-degree grows linearly over the run,
//!   or a static ring;
//! - a stochastic "expert" graph pointing at the currently best-ranked
//!   particles with rank-dependent probability (resampled every iteration);
//! - persistent "learned" edges recorded whenever following the group choice
//!   paid off for a voter.

use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Dense directed 0/1 adjacency matrix; `get(i, j)` means "i sees j".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    bits: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn zeros(n: usize) -> Self {
        AdjacencyMatrix {
            n,
            bits: vec![false; n * n],
        }
    }

    /// Identity matrix: every particle sees exactly itself.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from explicit 0/1 rows (test and demo helper).
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidInput(format!(
                    "row {i} has length {} in a {n}-row matrix",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i}, {j}) = {v} is not 0/1"
                    )));
                }
                m.set(i, j, v == 1);
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.bits[i * self.n + j] = value;
    }

    /// Column indices `j` with `get(i, j) == true`, ascending.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.bits[i * self.n..(i + 1) * self.n];
        row.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j)
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.neighbours(i).count()
    }

    /// Number of rows that see column `j`.
    pub fn column_sum(&self, j: usize) -> usize {
        (0..self.n).filter(|&i| self.get(i, j)).count()
    }

    /// Elementwise OR with `other` (in place).
    pub fn union_with(&mut self, other: &AdjacencyMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::InvalidInput(format!(
                "cannot union {}x{0} with {}x{1} adjacency matrices",
                self.n, other.n
            )));
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        Ok(())
    }

    /// Elementwise OR, returning a new matrix.
    pub fn union(&self, other: &AdjacencyMatrix) -> Result<AdjacencyMatrix> {
        let mut out = self.clone();
        out.union_with(other)?;
        Ok(out)
    }

    /// Plain-text dump: one row per line, entries as `0`/`1` without
    /// separators, trailing newline.
    pub fn dump(&self) -> String {
        let mut s = String::with_capacity(self.n * (self.n + 1));
        for i in 0..self.n {
            for j in 0..self.n {
                s.push(if self.get(i, j) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }
}

/// Linear out-degree growth for the distance graph: the bound starts at
/// `base` and rises by at most `growth` over the whole run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSchedule {
    /// Out-degree bound at the start of the run (self-loop included).
    pub base: usize,
    /// Total additional degree gained by the end of the run.
    pub growth: usize,
}

impl DegreeSchedule {
    pub fn new(base: usize, growth: usize) -> Self {
        DegreeSchedule { base, growth }
    }

    /// Degree bound at iteration `t` of `t_max`.
    pub fn bound(&self, t: u64, t_max: u64) -> Result<usize> {
        degree_bound(self.base, self.growth, t, t_max)
    }
}

/// `base + floor(growth * t / t_max)`: monotone in `t`, equal to `base` at
/// `t = 0` and `base + growth` at `t = t_max`.
pub fn degree_bound(base: usize, growth: usize, t: u64, t_max: u64) -> Result<usize> {
    if t_max == 0 {
        return Err(Error::InvalidInput(
            "degree schedule needs a positive run length".into(),
        ));
    }
    if t > t_max {
        return Err(Error::InvalidInput(format!(
            "iteration {t} is past the schedule end {t_max}"
        )));
    }
    Ok(base + ((growth as u64 * t) / t_max) as usize)
}

/// Pairwise Euclidean distances between positions.
pub fn distance_matrix(positions: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = positions.len();
    if n == 0 {
        return Err(Error::InvalidInput("no positions given".into()));
    }
    let dim = positions[0].len();
    if positions.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidInput(
            "positions have inconsistent dimensions".into(),
        ));
    }
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = positions[i]
                .iter()
                .zip(&positions[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    Ok(dist)
}

/// Directed kNN graph from a distance matrix. Every row gets a self-loop plus
/// its `degree - 1` nearest other particles; distance ties break toward the
/// lower index. Requires `1 <= degree <= n`.
pub fn knn_graph(dist: &[Vec<f64>], degree: usize) -> Result<AdjacencyMatrix> {
    let n = dist.len();
    if dist.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("distance matrix is not square".into()));
    }
    if degree == 0 || degree > n {
        return Err(Error::InvalidInput(format!(
            "kNN degree {degree} outside 1..={n}"
        )));
    }
    let mut adj = AdjacencyMatrix::zeros(n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for (i, row) in dist.iter().enumerate() {
        adj.set(i, i, true);
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
        for &j in order.iter().take(degree - 1) {
            adj.set(i, j, true);
        }
    }
    Ok(adj)
}

/// 1-based fitness ranks: rank 1 is the lowest (best) fitness; ties break
/// toward the lower index.
pub fn fitness_ranks(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; fitness.len()];
    for (pos, &i) in order.iter().enumerate() {
        ranks[i] = pos + 1;
    }
    ranks
}

/// Probability that a particle of fitness rank `rank` (1-based) receives an
/// incoming expert edge from any given voter, with `experts` experts among
/// `n` particles: the chance that this particle is the best-ranked member of
/// a uniformly random expert committee of size `experts`, i.e.
/// `C(n - rank, experts - 1) / C(n, experts)`.
///
/// Returns 0 when `experts == 0` or when fewer than `experts - 1` particles
/// rank below `rank`.
pub fn expert_probability(rank: usize, n: usize, experts: usize) -> f64 {
    debug_assert!(rank >= 1 && rank <= n, "rank {rank} outside 1..={n}");
    if experts == 0 || experts > n {
        return 0.0;
    }
    let worse = n - rank;
    if worse < experts - 1 {
        return 0.0;
    }
    // C(worse, experts-1) / C(n, experts), as an interleaved product so every
    // partial value stays well inside f64 range.
    let mut p = 1.0;
    for i in 0..experts {
        // 1 / C(n, experts) contributes (experts - i) / (n - i).
        p *= (experts - i) as f64 / (n - i) as f64;
    }
    for i in 0..(experts - 1) {
        // C(worse, experts-1) contributes (worse - i) / (experts - 1 - i).
        p *= (worse - i) as f64 / (experts - 1 - i) as f64;
    }
    p
}

/// Per-iteration stochastic expert graph. Only the `experts` best-ranked
/// particles can receive edges; each potential edge `(i, j)` is sampled
/// independently with probability [`expert_probability`] of `j`'s rank.
/// Draws happen in row-major order over the expert columns only, so the
/// consumed RNG stream is reproducible.
pub fn expert_graph(ranks: &[usize], experts: usize, rng: &mut impl Rng) -> Result<AdjacencyMatrix> {
    let n = ranks.len();
    if experts > n {
        return Err(Error::InvalidInput(format!(
            "expert count {experts} exceeds population {n}"
        )));
    }
    let mut adj = AdjacencyMatrix::zeros(n);
    if experts == 0 {
        return Ok(adj);
    }
    let prob: Vec<f64> = ranks
        .iter()
        .map(|&r| expert_probability(r, n, experts))
        .collect();
    for i in 0..n {
        for j in 0..n {
            if ranks[j] <= experts && rng.gen::<f64>() < prob[j] {
                adj.set(i, j, true);
            }
        }
    }
    Ok(adj)
}

/// Static ring used by the `serial` variant: each particle sees itself and the
/// next `k` particles (indices mod `n`).
pub fn ring_graph(n: usize, k: usize) -> AdjacencyMatrix {
    let mut adj = AdjacencyMatrix::zeros(n);
    for i in 0..n {
        adj.set(i, i, true);
        for step in 1..=k.min(n.saturating_sub(1)) {
            adj.set(i, (i + step) % n, true);
        }
    }
    adj
}

/// Records a persistent learned edge `voter -> chosen` when following the
/// group choice paid off (`improved`); otherwise leaves the matrix unchanged.
/// Callers gate on "the voter actually voted for `chosen`".
pub fn record_learned_edge(
    learned: &mut AdjacencyMatrix,
    voter: usize,
    chosen: usize,
    improved: bool,
) {
    if improved {
        learned.set(voter, chosen, true);
    }
}

/// Which edge sets feed the per-iteration decision graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyVariant {
    /// Growing distance kNN ∪ expert graph (no learned edges).
    Distance,
    /// Static ring ∪ learned ∪ expert graph (no distance graph).
    Serial,
    /// Growing distance kNN ∪ learned ∪ expert graph.
    Combined,
}

impl TopologyVariant {
    pub fn uses_learned_edges(self) -> bool {
        matches!(self, TopologyVariant::Serial | TopologyVariant::Combined)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyVariant::Distance => "distance",
            TopologyVariant::Serial => "serial",
            TopologyVariant::Combined => "combined",
        }
    }
}

impl fmt::Display for TopologyVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(TopologyVariant::Distance),
            "serial" => Ok(TopologyVariant::Serial),
            "combined" => Ok(TopologyVariant::Combined),
            other => Err(Error::InvalidInput(format!(
                "unknown topology `{other}` (valid: distance, serial, combined)"
            ))),
        }
    }
}

/// Mutable topology state carried across iterations: the variant, the degree
/// schedule, and the accumulating learned edges.
#[derive(Debug, Clone)]
pub struct TopologyState {
    variant: TopologyVariant,
    schedule: DegreeSchedule,
    experts: usize,
    learned: AdjacencyMatrix,
    ring: AdjacencyMatrix,
}

impl TopologyState {
    pub fn new(variant: TopologyVariant, n: usize, schedule: DegreeSchedule, experts: usize) -> Self {
        TopologyState {
            variant,
            schedule,
            experts,
            learned: AdjacencyMatrix::zeros(n),
            // Serial variant: self plus the next `base` indices around a ring.
            ring: ring_graph(n, schedule.base),
        }
    }

    pub fn variant(&self) -> TopologyVariant {
        self.variant
    }

    pub fn learned(&self) -> &AdjacencyMatrix {
        &self.learned
    }

    pub fn learned_mut(&mut self) -> &mut AdjacencyMatrix {
        &mut self.learned
    }

    /// Assembles this iteration's decision graph from current positions and
    /// fitness values. `t` / `t_max` drive the degree schedule; the expert
    /// graph is resampled from `rng` on every call.
    pub fn build_graph(
        &self,
        positions: &[Vec<f64>],
        fitness: &[f64],
        t: u64,
        t_max: u64,
        rng: &mut impl Rng,
    ) -> Result<AdjacencyMatrix> {
        let n = positions.len();
        if fitness.len() != n {
            return Err(Error::InvalidInput(format!(
                "{n} positions but {} fitness values",
                fitness.len()
            )));
        }
        let mut graph = match self.variant {
            TopologyVariant::Serial => self.ring.clone(),
            TopologyVariant::Distance | TopologyVariant::Combined => {
                let degree = self.schedule.bound(t, t_max)?.min(n);
                knn_graph(&distance_matrix(positions)?, degree)?
            }
        };
        if self.variant.uses_learned_edges() {
            graph.union_with(&self.learned)?;
        }
        let expert = expert_graph(&fitness_ranks(fitness), self.experts.min(n), rng)?;
        graph.union_with(&expert)?;
        Ok(graph)
    }
}
