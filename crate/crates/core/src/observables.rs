//! Summary statistics of a single configuration.

use crate::config::OccupancyConfig;
use crate::dist::DiscreteDist;
use crate::rates::RateFunction;

/// Mean-field jump rate `ζ(x) = (1/n) Σ_j r(x_j)`.
pub fn zeta(rate: &RateFunction, x: &OccupancyConfig) -> f64 {
    let total: f64 = x.occupancies().iter().map(|&k| rate.rate(k as u64)).sum();
    total / x.n() as f64
}

/// Occupancies of one configuration sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Observables {
    sorted: Vec<u32>,
}

impl Observables {
    pub fn of(x: &OccupancyConfig) -> Self {
        let mut sorted = x.occupancies().to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        Self { sorted }
    }

    pub fn max_occupancy(&self) -> u32 {
        self.sorted[0]
    }

    /// `(1/n) Σ_i δ_{x_i}`.
    pub fn empirical_measure(&self) -> DiscreteDist {
        let mut counts = vec![0u64; self.sorted[0] as usize + 1];
        for &x in &self.sorted {
            counts[x as usize] += 1;
        }
        DiscreteDist::from_counts(&counts, self.sorted.len() as u64)
    }

    /// Total occupancy of the `l` fullest sites.
    pub fn solid_mass(&self, l: usize) -> u64 {
        self.sorted.iter().take(l).map(|&x| x as u64).sum()
    }

    /// The `k` largest occupancies, descending (fewer if `k > n`).
    pub fn sorted_top(&self, k: usize) -> &[u32] {
        &self.sorted[..k.min(self.sorted.len())]
    }

    /// Number of empty sites.
    pub fn empty_sites(&self) -> usize {
        self.sorted.iter().rev().take_while(|&&x| x == 0).count()
    }
}

pub fn observables(x: &OccupancyConfig) -> Observables {
    Observables::of(x)
}
