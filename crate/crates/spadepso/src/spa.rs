//! The surprisingly-popular decision pipeline.
//!
//! Each particle votes for the best particle it can see through the decision
//! graph. A candidate's *actual turnout* is its vote share; its *expected
//! turnout* is the population-average predicted popularity derived from how
//! widely each voter's neighbourhood is known (knowledge prevalence). The
//! *surprisingly popular* winner maximises the ratio actual/expected: it is
//! the candidate whose support most exceeds what the graph structure alone
//! predicts.
//!
//! All pipeline arithmetic is exact (arbitrary-precision rationals), so the
//! winner never depends on floating-point rounding. [`reference`] holds an
//! independently written brute-force implementation used as a cross-check
//! oracle, and [`demo`] a five-particle worked example with hand-verifiable
//! intermediates.

use crate::topology::AdjacencyMatrix;
use crate::{Error, Result};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

/// Exact rational scalar used throughout the pipeline.
pub type Rat = BigRational;

/// Convenience constructor for an exact fraction.
pub fn ratio(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

fn ratio_counts(numer: usize, denom: usize) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Nearest-f64 view of an exact rational (for reporting only).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Each particle votes for the neighbour (graph row entry) with the lowest
/// objective value; ties break toward the lower index. A self-loop lets a
/// particle vote for itself.
pub fn vote(graph: &AdjacencyMatrix, fitness: &[f64]) -> Result<Vec<usize>> {
    let n = graph.n();
    if fitness.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n}-node graph with {} fitness values",
            fitness.len()
        )));
    }
    let mut votes = Vec::with_capacity(n);
    for i in 0..n {
        let mut best: Option<usize> = None;
        for j in graph.neighbours(i) {
            best = match best {
                None => Some(j),
                Some(b) if fitness[j] < fitness[b] => Some(j),
                Some(b) => Some(b),
            };
        }
        votes.push(best.ok_or(Error::IsolatedVoter { voter: i })?);
    }
    Ok(votes)
}

/// Distinct voted indices, ascending.
pub fn candidate_set(votes: &[usize]) -> Vec<usize> {
    let mut c: Vec<usize> = votes.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// `r_at[k]` = share of the population voting for `k` (zero off-candidates).
pub fn actual_turnout(votes: &[usize], n: usize) -> Vec<Rat> {
    let mut counts = vec![0usize; n];
    for &v in votes {
        counts[v] += 1;
    }
    counts.into_iter().map(|c| ratio_counts(c, n)).collect()
}

/// `r_kp[j]` = fraction of the population that can see particle `j`
/// (column density of the graph).
pub fn knowledge_prevalence(graph: &AdjacencyMatrix) -> Vec<Rat> {
    let n = graph.n();
    (0..n).map(|j| ratio_counts(graph.column_sum(j), n)).collect()
}

/// Row-structured popularity matrix. Every row has only two distinct values:
/// `on_vote` at the voted column and `off_vote` everywhere else, so the full
/// n×n matrix is stored in O(n) exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityMatrix {
    n: usize,
    votes: Vec<usize>,
    on_vote: Vec<Rat>,
    off_vote: Vec<Rat>,
}

impl PopularityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)` of the dense matrix.
    pub fn get(&self, i: usize, j: usize) -> Rat {
        if self.votes[i] == j {
            self.on_vote[i].clone()
        } else {
            self.off_vote[i].clone()
        }
    }

    /// Exact row sum (always 1 by construction).
    pub fn row_sum(&self, i: usize) -> Rat {
        &self.on_vote[i] + &self.off_vote[i] * ratio_counts(self.n - 1, 1)
    }

    /// Materialises the dense n×n matrix (tests / demo output).
    pub fn to_dense(&self) -> Vec<Vec<Rat>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Predicted popularity of each answer from each voter's point of view:
/// the voted column gets the product of the knowledge prevalences over the
/// voter's whole neighbourhood (self-loop included), and the remaining
/// probability mass spreads uniformly over the other `n - 1` columns.
pub fn popularity_matrix(
    graph: &AdjacencyMatrix,
    votes: &[usize],
    prevalence: &[Rat],
) -> Result<PopularityMatrix> {
    let n = graph.n();
    if n <= 1 {
        return Err(Error::InvalidInput(
            "popularity is undefined for fewer than two particles".into(),
        ));
    }
    if votes.len() != n || prevalence.len() != n {
        return Err(Error::InvalidInput(format!(
            "{n}-node graph with {} votes and {} prevalence entries",
            votes.len(),
            prevalence.len()
        )));
    }
    let mut on_vote = Vec::with_capacity(n);
    let mut off_vote = Vec::with_capacity(n);
    for i in 0..n {
        let mut product = Rat::one();
        for j in graph.neighbours(i) {
            product *= &prevalence[j];
        }
        let off = (Rat::one() - &product) / ratio_counts(n - 1, 1);
        on_vote.push(product);
        off_vote.push(off);
    }
    Ok(PopularityMatrix {
        n,
        votes: votes.to_vec(),
        on_vote,
        off_vote,
    })
}

/// `r_et[k]` = column mean of the popularity matrix: the population-average
/// predicted popularity of answer `k`.
pub fn expected_turnout(popularity: &PopularityMatrix) -> Vec<Rat> {
    let n = popularity.n;
    // Column j sums to Σ off_i plus, for each voter of j, (on_i − off_i).
    let base: Rat = popularity.off_vote.iter().sum();
    let mut extra = vec![Rat::zero(); n];
    for i in 0..n {
        extra[popularity.votes[i]] += &popularity.on_vote[i] - &popularity.off_vote[i];
    }
    extra
        .into_iter()
        .map(|e| (&base + e) / ratio_counts(n, 1))
        .collect()
}

/// `theta[k] = r_at[k] / r_et[k]` over the candidate set (candidate order).
pub fn surprising_popularity(
    r_at: &[Rat],
    r_et: &[Rat],
    candidates: &[usize],
) -> Result<Vec<Rat>> {
    candidates
        .iter()
        .map(|&k| {
            if r_et[k].is_zero() {
                Err(Error::InvalidInput(format!(
                    "candidate {k} has zero expected turnout"
                )))
            } else {
                Ok(&r_at[k] / &r_et[k])
            }
        })
        .collect()
}

/// Argmax of theta over the candidates; ties break toward better (lower)
/// fitness, then toward the lower index.
pub fn select_sbest(theta: &[Rat], candidates: &[usize], fitness: &[f64]) -> usize {
    debug_assert_eq!(theta.len(), candidates.len());
    debug_assert!(!candidates.is_empty());
    let mut best = 0usize;
    for idx in 1..candidates.len() {
        let better = match theta[idx].cmp(&theta[best]) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => fitness[candidates[idx]] < fitness[candidates[best]],
        };
        if better {
            best = idx;
        }
    }
    candidates[best]
}

/// Everything the pipeline computed for one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaReport {
    /// Voted index per particle.
    pub votes: Vec<usize>,
    /// Distinct voted indices, ascending.
    pub candidates: Vec<usize>,
    /// Actual turnout per particle index (zero off-candidates).
    pub r_at: Vec<Rat>,
    /// Knowledge prevalence per particle index.
    pub r_kp: Vec<Rat>,
    /// Compact popularity matrix.
    pub popularity: PopularityMatrix,
    /// Expected turnout per particle index.
    pub r_et: Vec<Rat>,
    /// Surprising-popularity degree per candidate (candidate order).
    pub theta: Vec<Rat>,
    /// The selected particle index.
    pub sbest: usize,
}

impl SpaReport {
    /// Theta of a candidate as f64, or `None` when `k` is not a candidate.
    pub fn theta_of(&self, k: usize) -> Option<f64> {
        self.candidates
            .iter()
            .position(|&c| c == k)
            .map(|idx| rat_to_f64(&self.theta[idx]))
    }

    /// One-line text record for per-iteration tracing.
    pub fn trace_line(&self) -> String {
        let theta: Vec<String> = self
            .candidates
            .iter()
            .zip(&self.theta)
            .map(|(c, t)| format!("{c}:{:.6}", rat_to_f64(t)))
            .collect();
        format!("sbest={} theta={}", self.sbest, theta.join(","))
    }
}

/// Runs the whole decision pipeline on one graph + fitness snapshot.
pub fn run_spa(graph: &AdjacencyMatrix, fitness: &[f64]) -> Result<SpaReport> {
    let n = graph.n();
    if n <= 1 {
        return Err(Error::InvalidInput(
            "the decision pipeline needs at least two particles".into(),
        ));
    }
    let votes = vote(graph, fitness)?;
    let candidates = candidate_set(&votes);
    let r_at = actual_turnout(&votes, n);
    let r_kp = knowledge_prevalence(graph);
    let popularity = popularity_matrix(graph, &votes, &r_kp)?;
    let r_et = expected_turnout(&popularity);
    let theta = surprising_popularity(&r_at, &r_et, &candidates)?;
    let sbest = select_sbest(&theta, &candidates, fitness);
    Ok(SpaReport {
        votes,
        candidates,
        r_at,
        r_kp,
        popularity,
        r_et,
        theta,
        sbest,
    })
}

/// Independent brute-force implementation of the same pipeline, written
/// naively from the definitions (dense matrices, no shared helpers). Used as
/// an equivalence oracle in tests.
pub mod reference {
    use super::{Rat, ratio_counts};
    use crate::topology::AdjacencyMatrix;
    use crate::{Error, Result};
    use num::{One, Zero};

    /// Dense mirror of [`super::SpaReport`].
    #[derive(Debug, Clone, PartialEq)]
    pub struct ReferenceReport {
        pub votes: Vec<usize>,
        pub candidates: Vec<usize>,
        pub r_at: Vec<Rat>,
        pub r_kp: Vec<Rat>,
        pub alpha: Vec<Vec<Rat>>,
        pub r_et: Vec<Rat>,
        pub theta: Vec<Rat>,
        pub sbest: usize,
    }

    /// From-definitions pipeline: every quantity is recomputed with plain
    /// nested loops over the dense matrix. Indexed loops deliberately mirror
    /// the summation-style definitions this oracle transcribes.
    #[allow(clippy::needless_range_loop)]
    pub fn run_spa_reference(graph: &AdjacencyMatrix, fitness: &[f64]) -> Result<ReferenceReport> {
        let n = graph.n();
        if n <= 1 {
            return Err(Error::InvalidInput("need at least two particles".into()));
        }
        if fitness.len() != n {
            return Err(Error::InvalidInput("fitness length mismatch".into()));
        }

        // Votes: scan each row for the lowest-fitness neighbour.
        let mut votes = Vec::with_capacity(n);
        for i in 0..n {
            let mut choice: Option<usize> = None;
            for j in 0..n {
                if graph.get(i, j) {
                    choice = Some(match choice {
                        None => j,
                        Some(c) => {
                            if fitness[j] < fitness[c] {
                                j
                            } else {
                                c
                            }
                        }
                    });
                }
            }
            match choice {
                Some(c) => votes.push(c),
                None => return Err(Error::IsolatedVoter { voter: i }),
            }
        }

        // Candidates: distinct votes, ascending.
        let mut candidates = Vec::new();
        for k in 0..n {
            if votes.contains(&k) {
                candidates.push(k);
            }
        }

        // Actual turnout.
        let mut r_at = vec![Rat::zero(); n];
        for k in 0..n {
            let count = votes.iter().filter(|&&v| v == k).count();
            r_at[k] = ratio_counts(count, n);
        }

        // Knowledge prevalence.
        let mut r_kp = vec![Rat::zero(); n];
        for j in 0..n {
            let count = (0..n).filter(|&i| graph.get(i, j)).count();
            r_kp[j] = ratio_counts(count, n);
        }

        // Dense popularity matrix.
        let mut alpha = vec![vec![Rat::zero(); n]; n];
        for i in 0..n {
            let mut prod = Rat::one();
            for j in 0..n {
                if graph.get(i, j) {
                    prod = &prod * &r_kp[j];
                }
            }
            let off = (Rat::one() - &prod) / ratio_counts(n - 1, 1);
            for j in 0..n {
                alpha[i][j] = if j == votes[i] { prod.clone() } else { off.clone() };
            }
        }

        // Expected turnout: plain column means.
        let mut r_et = vec![Rat::zero(); n];
        for (j, entry) in r_et.iter_mut().enumerate() {
            let mut sum = Rat::zero();
            for row in &alpha {
                sum = &sum + &row[j];
            }
            *entry = sum / ratio_counts(n, 1);
        }

        // Theta over candidates.
        let mut theta = Vec::with_capacity(candidates.len());
        for &k in &candidates {
            if r_et[k].is_zero() {
                return Err(Error::InvalidInput(format!(
                    "candidate {k} has zero expected turnout"
                )));
            }
            theta.push(&r_at[k] / &r_et[k]);
        }

        // Argmax with theta → fitness → index tie-breaks.
        let mut sbest = candidates[0];
        let mut best_theta = theta[0].clone();
        for (idx, &k) in candidates.iter().enumerate().skip(1) {
            if theta[idx] > best_theta
                || (theta[idx] == best_theta && fitness[k] < fitness[sbest])
            {
                best_theta = theta[idx].clone();
                sbest = k;
            }
        }

        Ok(ReferenceReport {
            votes,
            candidates,
            r_at,
            r_kp,
            alpha,
            r_et,
            theta,
            sbest,
        })
    }
}

/// Five-particle worked example whose every intermediate is a small exact
/// fraction; used by the golden test and the `spa-demo` CLI command.
pub mod demo {
    use super::{rat_to_f64, run_spa};
    use crate::topology::AdjacencyMatrix;

    /// The demo decision graph (row i = who particle i sees) and fitness
    /// values (lower is better).
    pub fn instance() -> (AdjacencyMatrix, Vec<f64>) {
        let graph = AdjacencyMatrix::from_rows(&[
            vec![1, 1, 0, 0, 0],
            vec![0, 1, 1, 1, 1],
            vec![1, 0, 0, 1, 0],
            vec![1, 0, 1, 0, 1],
            vec![0, 1, 0, 0, 1],
        ])
        .expect("demo adjacency is well-formed");
        let fitness = vec![2.0, 3.0, 1.0, 4.0, 5.0];
        (graph, fitness)
    }

    /// Human-readable walkthrough of the full pipeline on the demo instance.
    /// Indices are printed 1-based to read naturally ("particle 3").
    pub fn walkthrough() -> String {
        let (graph, fitness) = instance();
        let report = run_spa(&graph, &fitness).expect("demo instance is valid");
        let mut out = String::new();
        out.push_str("Surprisingly-popular selection, worked five-particle example\n");
        out.push_str("============================================================\n\n");
        out.push_str("Decision graph (row i = who particle i sees):\n");
        out.push_str(&graph.dump());
        out.push_str(&format!("\nFitness (lower is better): {fitness:?}\n\n"));
        let votes_1: Vec<usize> = report.votes.iter().map(|v| v + 1).collect();
        out.push_str(&format!(
            "Votes (each particle picks its best visible particle): {votes_1:?}\n"
        ));
        let cands_1: Vec<usize> = report.candidates.iter().map(|c| c + 1).collect();
        out.push_str(&format!("Candidates: {cands_1:?}\n\n"));
        out.push_str("Actual turnout (vote share) per candidate:\n");
        for &c in &report.candidates {
            out.push_str(&format!(
                "  particle {}: {} = {:.4}\n",
                c + 1,
                report.r_at[c],
                rat_to_f64(&report.r_at[c])
            ));
        }
        out.push_str("\nKnowledge prevalence (column density) per particle:\n");
        for (j, kp) in report.r_kp.iter().enumerate() {
            out.push_str(&format!(
                "  particle {}: {} = {:.4}\n",
                j + 1,
                kp,
                rat_to_f64(kp)
            ));
        }
        out.push_str(&format!(
            "\nPopularity of particle 1's own vote: {} = {:.4}\n",
            report.popularity.get(0, 0),
            rat_to_f64(&report.popularity.get(0, 0))
        ));
        out.push_str("\nExpected turnout per candidate (column means of popularity):\n");
        for &c in &report.candidates {
            out.push_str(&format!(
                "  particle {}: {} = {:.4}\n",
                c + 1,
                report.r_et[c],
                rat_to_f64(&report.r_et[c])
            ));
        }
        out.push_str("\nSurprising-popularity degree (actual / expected):\n");
        for (idx, &c) in report.candidates.iter().enumerate() {
            out.push_str(&format!(
                "  particle {}: {} = {:.4}\n",
                c + 1,
                report.theta[idx],
                rat_to_f64(&report.theta[idx])
            ));
        }
        out.push_str(&format!(
            "\nSelected (highest degree): particle {}\n",
            report.sbest + 1
        ));
        out
    }
}
