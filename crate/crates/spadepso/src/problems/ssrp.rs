//! Spread-spectrum radar polyphase code design: choose `n` phase values in
//! [0, 2*pi] minimising the largest autocorrelation sidelobe. The objective is
//! the max over 2n-1 sample functions (and their negations), evaluated in
//! O(n^2) total via prefix sums of the phase vector.

use crate::swarm::{Bounds, Objective};
use crate::Result;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct SsrpInstance {
    bounds: Bounds,
}

impl SsrpInstance {
    pub fn new(n: usize) -> Result<Self> {
        Ok(SsrpInstance {
            bounds: Bounds::uniform(n, 0.0, 2.0 * PI)?,
        })
    }

    pub fn variables(&self) -> usize {
        self.bounds.dim()
    }

    /// All 2n-1 sample values phi_1..phi_{2n-1} at `x` (before taking the
    /// max over values and negations).
    pub fn samples(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        // prefix[a] = x_1 + ... + x_a (1-based), prefix[0] = 0.
        let mut prefix = vec![0.0; n + 1];
        for (i, &v) in x.iter().enumerate() {
            prefix[i + 1] = prefix[i] + v;
        }
        let mut phi = Vec::with_capacity(2 * n - 1);
        for i in 1..=n {
            // Odd-indexed sample phi_{2i-1}.
            let mut s = 0.0;
            for j in i..=n {
                let m = (2 * i as i64 - j as i64 - 1).unsigned_abs() as usize;
                s += (prefix[j] - prefix[m]).cos();
            }
            phi.push(s);
            // Even-indexed sample phi_{2i} exists for i < n.
            if i < n {
                let mut s = 0.5;
                for j in (i + 1)..=n {
                    let m = (2 * i as i64 - j as i64).unsigned_abs() as usize;
                    s += (prefix[j] - prefix[m]).cos();
                }
                phi.push(s);
            }
        }
        phi
    }
}

impl Objective for SsrpInstance {
    fn name(&self) -> &str {
        "ssrp"
    }

    fn dimension(&self) -> usize {
        self.bounds.dim()
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// max over all samples and their negations; always >= 0 since each
    /// sample contributes both signs.
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.samples(x)
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v).max(-v))
    }

    fn known_optimum(&self) -> Option<f64> {
        None
    }
}
