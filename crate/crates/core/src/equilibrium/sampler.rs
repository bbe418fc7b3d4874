//! Exact sampling from the stationary law `π` on `{x : Σ x_i = m}`.
//!
//! `π` is the law of `n` i.i.d. `q(z)` coordinates conditioned on their sum
//! being `m`, for any `z`; the samplers tilt with `z = Ψ^{-1}(m/n)` so that
//! the unconditioned sum is centred on `m`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::OccupancyConfig;
use crate::error::{domain, Result};
use crate::rates::RateFunction;
use crate::seeding;

/// Largest partial-sum table built by the sequential sampler.
const TABLE_CAP: usize = 10_000_000;
/// Work budget (table cells times support) for choosing the sequential sampler.
const TABLE_WORK_CAP: f64 = 4e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SamplerMethod {
    /// Draw i.i.d. coordinates, keep the draw iff the sum equals `m`.
    Rejection,
    /// Draw coordinates one by one from their exact conditional laws.
    Sequential,
    #[default]
    Auto,
}

#[derive(Debug, Clone)]
pub struct StationarySampler {
    n: usize,
    m: u64,
    method: SamplerMethod,
    /// Cumulative distribution of the tilted single-site law.
    cdf: Vec<f64>,
    /// Unnormalized tilted weights `z^k / Π r(j)` on the truncated support.
    weights: Vec<f64>,
    table: Option<PartialSums>,
}

/// `P(S_j = s)` for `j <= n`, `s <= m`, stored row-wise as normalized
/// linear values with one log-scale per row.
#[derive(Debug, Clone)]
struct PartialSums {
    width: usize,
    rows: Vec<f64>,
    log_scale: Vec<f64>,
}

impl PartialSums {
    fn build(weights: &[f64], n: usize, m: usize) -> Self {
        let width = m + 1;
        let mut rows = vec![0.0; (n + 1) * width];
        let mut log_scale = vec![0.0; n + 1];
        rows[0] = 1.0;
        for j in 1..=n {
            let (prev, cur) = rows.split_at_mut(j * width);
            let prev = &prev[(j - 1) * width..];
            let cur = &mut cur[..width];
            for (s, slot) in cur.iter_mut().enumerate() {
                let kmax = s.min(weights.len() - 1);
                let mut acc = 0.0;
                for k in 0..=kmax {
                    acc += weights[k] * prev[s - k];
                }
                *slot = acc;
            }
            let max = cur.iter().copied().fold(0.0, f64::max);
            if max > 0.0 {
                cur.iter_mut().for_each(|v| *v /= max);
                log_scale[j] = log_scale[j - 1] + max.ln();
            } else {
                log_scale[j] = log_scale[j - 1];
            }
        }
        Self {
            width,
            rows,
            log_scale,
        }
    }

    #[inline]
    fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.width..(j + 1) * self.width]
    }

    /// `ln Σ_{x: Σx = s, j sites} Π w(x_i)`.
    fn ln_total(&self, j: usize, s: usize) -> f64 {
        self.row(j)[s].ln() + self.log_scale[j]
    }
}

impl StationarySampler {
    pub fn new(rate: &RateFunction, n: usize, m: u64, method: SamplerMethod) -> Result<Self> {
        if n == 0 {
            return Err(domain("n", "need at least one site"));
        }
        let rho = m as f64 / n as f64;
        let z = rate.psi_inv(rho)?;
        let q = if m == 0 { crate::dist::DiscreteDist::dirac(0) } else { rate.q_dist(z)? };
        let support = q.support_max().min(m as usize);
        let weights: Vec<f64> = q.probs()[..=support].to_vec();
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cdf.push(acc);
        }
        let cells = (n + 1) * (m as usize + 1);
        let method = match method {
            SamplerMethod::Auto => {
                if cells <= TABLE_CAP && cells as f64 * weights.len() as f64 <= TABLE_WORK_CAP {
                    SamplerMethod::Sequential
                } else {
                    SamplerMethod::Rejection
                }
            }
            SamplerMethod::Sequential if cells > TABLE_CAP => {
                return Err(domain("n", "partial-sum table too large for sequential sampling"))
            }
            other => other,
        };
        let table = (method == SamplerMethod::Sequential)
            .then(|| PartialSums::build(&weights, n, m as usize));
        Ok(Self {
            n,
            m,
            method,
            cdf,
            weights,
            table,
        })
    }

    pub fn method(&self) -> SamplerMethod {
        self.method
    }

    /// Exact law of one coordinate under `π`, from the partial-sum table
    /// (sequential method only).
    pub fn coordinate_law(&self) -> Option<Vec<f64>> {
        let table = self.table.as_ref()?;
        let m = self.m as usize;
        let total = table.ln_total(self.n, m);
        Some(
            (0..=m)
                .map(|k| {
                    if k >= self.weights.len() {
                        return 0.0;
                    }
                    let rest = table.ln_total(self.n - 1, m - k);
                    (self.weights[k].ln() + rest - total).exp()
                })
                .collect(),
        )
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupancyConfig {
        if self.m == 0 {
            return OccupancyConfig::empty(self.n).expect("n >= 1");
        }
        if self.n == 1 {
            return OccupancyConfig::dirac(1, self.m).expect("n >= 1");
        }
        match self.method {
            SamplerMethod::Sequential => self.sample_sequential(rng),
            _ => self.sample_rejection(rng),
        }
    }

    fn sample_rejection<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupancyConfig {
        let mut x = vec![0u32; self.n];
        let top = *self.cdf.last().expect("nonempty support");
        'attempt: loop {
            let mut sum = 0u64;
            for slot in x.iter_mut() {
                let u = rng.gen::<f64>() * top;
                let k = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
                sum += k as u64;
                if sum > self.m {
                    continue 'attempt;
                }
                *slot = k as u32;
            }
            if sum == self.m {
                return OccupancyConfig::new(x).expect("n >= 1");
            }
        }
    }

    fn sample_sequential<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupancyConfig {
        let table = self.table.as_ref().expect("sequential sampler has a table");
        let mut x = vec![0u32; self.n];
        let mut left = self.m as usize;
        let mut probs = Vec::with_capacity(self.weights.len());
        for (i, slot) in x.iter_mut().enumerate() {
            let rest = self.n - i - 1;
            let row = table.row(rest);
            probs.clear();
            let kmax = left.min(self.weights.len() - 1);
            let mut total = 0.0;
            for k in 0..=kmax {
                let w = self.weights[k] * row[left - k];
                total += w;
                probs.push(w);
            }
            let mut u = rng.gen::<f64>() * total;
            let mut k = kmax;
            for (j, p) in probs.iter().enumerate() {
                if u < *p {
                    k = j;
                    break;
                }
                u -= p;
            }
            // Rounding may pick a k with zero weight; step back to the last feasible one.
            while probs[k] == 0.0 && k > 0 {
                k -= 1;
            }
            *slot = k as u32;
            left -= k;
        }
        debug_assert_eq!(left, 0);
        OccupancyConfig::new(x).expect("n >= 1")
    }
}

/// One exact draw from `π`.
pub fn sample_pi(rate: &RateFunction, n: usize, m: u64, seed: u64) -> Result<OccupancyConfig> {
    let sampler = StationarySampler::new(rate, n, m, SamplerMethod::Auto)?;
    Ok(sampler.sample(&mut seeding::rng(seed)))
}
