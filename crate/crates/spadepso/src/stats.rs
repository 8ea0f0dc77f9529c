//! Statistical machinery: swarm diversity, per-problem error aggregates,
//! Wilcoxon signed-rank comparison (exact for small samples, tie-corrected
//! normal approximation otherwise), and Friedman rank aggregation.

use crate::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided attained levels below this are reported as significant.
pub const SIGNIFICANCE: f64 = 0.1;

/// Mean Euclidean distance of a group of positions from its centroid.
/// An empty group has diversity 0 by convention.
pub fn diversity(positions: &[&[f64]]) -> f64 {
    let n = positions.len();
    if n == 0 {
        return 0.0;
    }
    let dim = positions[0].len();
    let mut mean = vec![0.0; dim];
    for p in positions {
        for (m, v) in mean.iter_mut().zip(p.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let total: f64 = positions
        .iter()
        .map(|p| {
            p.iter()
                .zip(&mean)
                .map(|(v, m)| (v - m) * (v - m))
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    total / n as f64
}

/// Minimum, mean, and sample standard deviation of a batch of final errors.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorStats {
    pub min: f64,
    pub mean: f64,
    pub std_dev: f64,
}

/// Aggregates run errors. A single run has standard deviation 0; an empty
/// batch is an error.
pub fn error_stats(values: &[f64]) -> Result<ErrorStats> {
    if values.is_empty() {
        return Err(Error::InvalidInput(
            "cannot aggregate an empty batch of errors".into(),
        ));
    }
    let n = values.len() as f64;
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / n;
    let std_dev = if values.len() < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    Ok(ErrorStats { min, mean, std_dev })
}

/// Ascending 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Positions i..=j (0-based) share the average of ranks i+1..=j+1.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// How the attained level of a signed-rank comparison was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    /// Full enumeration of all sign assignments (small effective samples).
    Exact,
    /// Tie-corrected normal approximation.
    NormalApproximation,
    /// Every pair was identical; the comparison is vacuous.
    AllZero,
}

/// Outcome of a two-sided Wilcoxon signed-rank comparison of paired samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Pairs with a non-zero difference.
    pub n_effective: usize,
    /// Rank sum of pairs where the first sample was larger.
    pub w_plus: f64,
    /// Rank sum of pairs where the second sample was larger.
    pub w_minus: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Largest effective sample for which the exact distribution is enumerated.
pub const WILCOXON_EXACT_LIMIT: usize = 12;

/// Signed-rank preprocessing: drops zero differences and ranks the absolute
/// differences with average ranks on ties. Returns `(w_plus, w_minus,
/// ranks_of_nonzero_diffs)`. Requires equal lengths of at least 5.
pub fn wilcoxon_ranks(a: &[f64], b: &[f64]) -> Result<(f64, f64, Vec<f64>)> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "signed-rank comparison needs at least 5 pairs, found {}",
            a.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let mut w_plus = 0.0;
    let mut w_minus = 0.0;
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            w_plus += r;
        } else {
            w_minus += r;
        }
    }
    Ok((w_plus, w_minus, ranks))
}

/// Exact two-sided attained level by enumerating all `2^n` sign assignments:
/// the fraction whose rank-sum deviation from the mean *strictly* exceeds the
/// observed deviation (so a maximal observation attains level 0).
pub fn wilcoxon_exact_p(w_plus: f64, ranks: &[f64]) -> f64 {
    let n = ranks.len();
    assert!(n <= 20, "exact enumeration is limited to 20 pairs");
    if n == 0 {
        return 1.0;
    }
    let mu = ranks.iter().sum::<f64>() / 2.0;
    let observed = (w_plus - mu).abs();
    let mut beyond = 0u64;
    for mask in 0u64..(1u64 << n) {
        let mut w = 0.0;
        for (i, r) in ranks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                w += r;
            }
        }
        if (w - mu).abs() > observed {
            beyond += 1;
        }
    }
    beyond as f64 / (1u64 << n) as f64
}

/// Two-sided attained level from the tie-corrected normal approximation
/// (no continuity correction).
pub fn wilcoxon_normal_p(w_plus: f64, ranks: &[f64]) -> f64 {
    let n = ranks.len() as f64;
    if ranks.is_empty() {
        return 1.0;
    }
    let mu = n * (n + 1.0) / 4.0;
    // Tie groups share identical rank values, so count multiplicities.
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite ranks"));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = (w_plus - mu) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    2.0 * (1.0 - normal.cdf(z.abs()))
}

/// Two-sided Wilcoxon signed-rank comparison. Uses the exact distribution
/// when at most [`WILCOXON_EXACT_LIMIT`] non-zero differences remain, the
/// normal approximation otherwise; if every pair is identical the comparison
/// is vacuous (attained level 1).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    let (w_plus, w_minus, ranks) = wilcoxon_ranks(a, b)?;
    let n_effective = ranks.len();
    let (p_value, method) = if n_effective == 0 {
        (1.0, WilcoxonMethod::AllZero)
    } else if n_effective <= WILCOXON_EXACT_LIMIT {
        (wilcoxon_exact_p(w_plus, &ranks), WilcoxonMethod::Exact)
    } else {
        (
            wilcoxon_normal_p(w_plus, &ranks),
            WilcoxonMethod::NormalApproximation,
        )
    };
    Ok(WilcoxonResult {
        n_effective,
        w_plus,
        w_minus,
        p_value,
        method,
    })
}

/// Win/loss/tie tally across problems, from the first optimizer's viewpoint
/// (minimisation: lower mean error wins).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ComparisonVerdict {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

impl ComparisonVerdict {
    pub fn record(&mut self, mean_a: f64, mean_b: f64) {
        if mean_a < mean_b {
            self.wins += 1;
        } else if mean_a > mean_b {
            self.losses += 1;
        } else {
            self.ties += 1;
        }
    }
}

/// Friedman rank aggregation over a problems-by-algorithms table.
#[derive(Debug, Clone, PartialEq)]
pub struct FriedmanResult {
    /// Per-algorithm sum of within-problem ranks.
    pub rank_sums: Vec<f64>,
    /// Rank sums divided by the number of problems.
    pub mean_ranks: Vec<f64>,
    /// Ordinal ranking of the algorithms by mean rank (ties averaged).
    pub final_ranking: Vec<f64>,
}

/// Ranks algorithms within each problem (ascending: lower error is rank 1,
/// ties averaged) and aggregates the ranks column-wise. `table[p][a]` is the
/// score of algorithm `a` on problem `p`; every row must have the same width
/// of at least 2.
pub fn friedman_ranks(table: &[Vec<f64>]) -> Result<FriedmanResult> {
    let rows = table.len();
    if rows == 0 {
        return Err(Error::InvalidInput("rank table has no problems".into()));
    }
    let cols = table[0].len();
    if cols < 2 {
        return Err(Error::InvalidInput(
            "rank table needs at least 2 algorithms".into(),
        ));
    }
    if table.iter().any(|row| row.len() != cols) {
        return Err(Error::InvalidInput("rank table rows differ in width".into()));
    }
    let mut rank_sums = vec![0.0; cols];
    for row in table {
        for (sum, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *sum += r;
        }
    }
    let mean_ranks: Vec<f64> = rank_sums.iter().map(|s| s / rows as f64).collect();
    let final_ranking = average_ranks(&mean_ranks);
    Ok(FriedmanResult {
        rank_sums,
        mean_ranks,
        final_ranking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diversity_of_degenerate_groups_is_zero() {
        assert_eq!(diversity(&[]), 0.0);
        let single = [1.0, 2.0, 3.0];
        assert_eq!(diversity(&[&single]), 0.0);
        let a = [5.0, -1.0];
        assert_eq!(diversity(&[&a, &a, &a]), 0.0);
    }

    #[test]
    fn diversity_hand_cases() {
        // Two points at distance 2 from each other: each is 1 from the mean.
        let a = [0.0, 0.0];
        let b = [2.0, 0.0];
        assert_eq!(diversity(&[&a, &b]), 1.0);
        // Equilateral-ish: points on a line at -3, 0, +3.
        let p = [-3.0];
        let q = [0.0];
        let r = [3.0];
        assert!((diversity(&[&p, &q, &r]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diversity_scales_linearly() {
        let a = [0.0, 1.0, 4.0];
        let b = [2.0, -1.0, 0.0];
        let c = [5.0, 5.0, 5.0];
        let base = diversity(&[&a, &b, &c]);
        let a2: Vec<f64> = a.iter().map(|v| v * 3.0).collect();
        let b2: Vec<f64> = b.iter().map(|v| v * 3.0).collect();
        let c2: Vec<f64> = c.iter().map(|v| v * 3.0).collect();
        let scaled = diversity(&[&a2, &b2, &c2]);
        assert!((scaled - 3.0 * base).abs() < 1e-12);
    }

    #[test]
    fn error_stats_hand_case() {
        let s = error_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.min, 1.0);
        assert_eq!(s.mean, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let one = error_stats(&[7.5]).unwrap();
        assert_eq!(one.std_dev, 0.0);
        assert_eq!(one.min, 7.5);
        assert!(error_stats(&[]).is_err());
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 4.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
        assert_eq!(average_ranks(&[]), Vec::<f64>::new());
    }

    #[test]
    fn wilcoxon_exact_hand_case() {
        // Differences +1..+5 and -6: W+ = 15, W- = 6, attained level 20/64.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 0.0];
        let b = [0.0, 0.0, 0.0, 0.0, 0.0, 6.0];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.n_effective, 6);
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.w_minus, 6.0);
        assert!((r.p_value - 0.3125).abs() < 1e-12);
    }

    #[test]
    fn wilcoxon_sweep_is_maximally_extreme() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [0.0; 6];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.w_plus, 21.0);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn wilcoxon_is_symmetric_under_swapping_samples() {
        let a = [3.0, -1.0, 2.5, 0.5, 4.0, -2.0, 1.0];
        let b = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let ab = wilcoxon_signed_rank(&a, &b).unwrap();
        let ba = wilcoxon_signed_rank(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        assert_eq!(ab.w_plus, ba.w_minus);
        assert_eq!(ab.w_minus, ba.w_plus);
    }

    #[test]
    fn wilcoxon_drops_zero_differences() {
        let a = [1.0, 2.0, 3.0, 7.0, 7.0, 9.0];
        let b = [0.5, 1.0, 2.0, 7.0, 7.0, 8.0];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.n_effective, 4);
        // All identical pairs: vacuous comparison.
        let same = [2.0, 2.0, 2.0, 2.0, 2.0];
        let r = wilcoxon_signed_rank(&same, &same).unwrap();
        assert_eq!(r.method, WilcoxonMethod::AllZero);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.n_effective, 0);
    }

    #[test]
    fn wilcoxon_input_validation() {
        assert!(wilcoxon_signed_rank(&[1.0; 4], &[0.0; 4]).is_err());
        assert!(wilcoxon_signed_rank(&[1.0; 6], &[0.0; 5]).is_err());
    }

    #[test]
    fn wilcoxon_normal_branch_behaves() {
        // 20 positive differences of distinct magnitude: decisively one-sided.
        let a: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let b = vec![0.0; 20];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApproximation);
        assert!(r.p_value < 1e-3, "p = {}", r.p_value);
        // Nearly balanced signs: comfortably insignificant.
        let a: Vec<f64> = (1..=20).map(|i| if i % 2 == 0 { -(i as f64) } else { i as f64 }).collect();
        let b = vec![0.0; 20];
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(r.p_value > 0.5, "p = {}", r.p_value);
        assert!(r.p_value <= 1.0);
    }

    #[test]
    fn wilcoxon_normal_handles_heavy_ties() {
        let a = vec![1.0; 13];
        let mut b = vec![0.0; 13];
        b[0] = 2.0; // one negative difference, twelve positive, all |d| = 1
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApproximation);
        assert!(r.p_value > 0.0 && r.p_value < 0.05);
    }

    #[test]
    fn verdict_tallies_mean_signs() {
        let mut v = ComparisonVerdict::default();
        v.record(1.0, 2.0);
        v.record(3.0, 2.0);
        v.record(2.0, 2.0);
        v.record(0.0, 5.0);
        assert_eq!(v, ComparisonVerdict { wins: 2, losses: 1, ties: 1 });
    }

    #[test]
    fn friedman_hand_case() {
        // Algorithm 0 always best, algorithm 2 always worst.
        let table = vec![
            vec![1.0, 2.0, 3.0],
            vec![10.0, 20.0, 30.0],
            vec![0.1, 0.2, 0.3],
            vec![5.0, 6.0, 7.0],
        ];
        let f = friedman_ranks(&table).unwrap();
        assert_eq!(f.rank_sums, vec![4.0, 8.0, 12.0]);
        assert_eq!(f.mean_ranks, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.final_ranking, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn friedman_tied_rows_average() {
        let table = vec![vec![1.0, 2.0, 3.0], vec![3.0, 2.0, 1.0], vec![2.0, 2.0, 2.0]];
        let f = friedman_ranks(&table).unwrap();
        assert_eq!(f.rank_sums, vec![6.0, 6.0, 6.0]);
        assert_eq!(f.final_ranking, vec![2.0, 2.0, 2.0]);
        // Each row contributes c(c+1)/2 = 6 regardless of ties.
        let total: f64 = f.rank_sums.iter().sum();
        assert_eq!(total, 18.0);
    }

    #[test]
    fn friedman_input_validation() {
        assert!(friedman_ranks(&[]).is_err());
        assert!(friedman_ranks(&[vec![1.0]]).is_err());
        assert!(friedman_ranks(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}
