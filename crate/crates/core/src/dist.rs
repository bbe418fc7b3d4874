//! Probability vectors over the nonnegative integers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Finite probability vector `p(0..=M)` plus a declared bound on the mass
/// carried beyond `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDist {
    probs: Vec<f64>,
    tail_mass: f64,
}

const MASS_TOLERANCE: f64 = 1e-12;

impl DiscreteDist {
    pub fn new(probs: Vec<f64>, tail_mass: f64) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(domain("probs", "entries must be finite and nonnegative"));
        }
        if !tail_mass.is_finite() || tail_mass < 0.0 {
            return Err(domain("tail_mass", "must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum::<f64>() + tail_mass;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(domain("probs", format!("total mass {total} is not 1")));
        }
        Ok(Self::from_parts(probs, tail_mass))
    }

    /// Internal constructor for vectors normalized by construction.
    pub(crate) fn from_parts(mut probs: Vec<f64>, tail_mass: f64) -> Self {
        while probs.len() > 1 && probs.last() == Some(&0.0) {
            probs.pop();
        }
        if probs.is_empty() {
            probs.push(0.0);
        }
        Self { probs, tail_mass }
    }

    pub fn dirac(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        Self {
            probs,
            tail_mass: 0.0,
        }
    }

    /// Empirical law of a sample of nonnegative integers.
    pub fn from_samples<I>(samples: I) -> Result<Self>
    where
        I: IntoIterator,
        I::Item: Into<u64>,
    {
        let mut counts: Vec<u64> = Vec::new();
        let mut total = 0u64;
        for s in samples {
            let s = s.into() as usize;
            if s >= counts.len() {
                counts.resize(s + 1, 0);
            }
            counts[s] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(domain("samples", "empty sample"));
        }
        Ok(Self::from_counts(&counts, total))
    }

    pub(crate) fn from_counts(counts: &[u64], total: u64) -> Self {
        let inv = 1.0 / total as f64;
        Self::from_parts(counts.iter().map(|&c| c as f64 * inv).collect(), 0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Largest index carried explicitly.
    pub fn support_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `P(X <= k)` over the explicit support.
    pub fn cdf(&self, k: usize) -> f64 {
        self.probs.iter().take(k + 1).sum()
    }

    /// Total-variation distance `(1/2) Σ |p(k) - q(k)|` over the union of the
    /// explicit supports. Declared tail masses are ignored.
    pub fn tv_distance(&self, other: &DiscreteDist) -> f64 {
        let len = self.probs.len().max(other.probs.len());
        let sum: f64 = (0..len)
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum();
        (0.5 * sum).min(1.0)
    }
}
