//! Exact oracle for small instances: the full state space, the generator,
//! the stationary law, and time-`t` laws by uniformization.

use std::collections::HashMap;
use std::io::Write;

use crate::config::OccupancyConfig;
use crate::error::{Result, ZrpError};
use crate::rates::RateFunction;

/// Largest state space the oracle will build.
pub const STATE_CAP: usize = 1_000_000;

/// Total truncation budget for one uniformized propagation.
const UNIFORMIZATION_TOL: f64 = 1e-13;
/// Largest Poisson mean handled in one uniformization chunk.
const CHUNK_MEAN: f64 = 64.0;

/// Number of compositions of `m` into `n` parts, `C(m+n-1, n-1)`.
pub fn state_count(n: usize, m: u64) -> u128 {
    if n == 0 {
        return 0;
    }
    let k = (n - 1) as u128;
    let total = m as u128 + k;
    let mut acc: u128 = 1;
    for i in 1..=k.min(total - k) {
        acc = acc * (total + 1 - i) / i;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct ExactChain {
    rate: RateFunction,
    n: usize,
    m: u64,
    states: Vec<OccupancyConfig>,
    index: HashMap<Vec<u32>, usize>,
    /// Off-diagonal transitions `(target, rate)` per state, CSR layout.
    row_start: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    exit_rate: Vec<f64>,
    pi: Vec<f64>,
}

fn enumerate(n: usize, m: u64) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, n: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for x in 0..=left {
            prefix.push(x);
            rec(prefix, n, left - x, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), n, m as u32, &mut out);
    // Colexicographic: compare from the last coordinate backwards.
    out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    out
}

impl ExactChain {
    pub fn new(rate: &RateFunction, n: usize, m: u64) -> Result<Self> {
        if n == 0 {
            return Err(ZrpError::InvalidConfig("need at least one site".into()));
        }
        let size = state_count(n, m);
        if size > STATE_CAP as u128 {
            return Err(ZrpError::StateSpaceTooLarge {
                size,
                cap: STATE_CAP,
            });
        }
        let raw = enumerate(n, m);
        let index: HashMap<Vec<u32>, usize> =
            raw.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let inv_n = 1.0 / n as f64;
        let mut row_start = Vec::with_capacity(raw.len() + 1);
        let mut targets = Vec::new();
        let mut rates = Vec::new();
        let mut exit_rate = Vec::with_capacity(raw.len());
        let mut scratch = Vec::with_capacity(n);
        for s in &raw {
            row_start.push(targets.len());
            let mut exit = 0.0;
            for i in 0..n {
                if s[i] == 0 {
                    continue;
                }
                let q = rate.rate(s[i] as u64) * inv_n;
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    scratch.clear();
                    scratch.extend_from_slice(s);
                    scratch[i] -= 1;
                    scratch[j] += 1;
                    targets.push(index[&scratch] as u32);
                    rates.push(q);
                    exit += q;
                }
            }
            exit_rate.push(exit);
        }
        row_start.push(targets.len());

        let log_w: Vec<f64> = raw
            .iter()
            .map(|s| -s.iter().map(|&x| rate.log_rate_product(x as u64)).sum::<f64>())
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut pi: Vec<f64> = log_w.iter().map(|w| (w - max).exp()).collect();
        let z: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= z);

        let states = raw
            .into_iter()
            .map(|s| OccupancyConfig::new(s).expect("n >= 1"))
            .collect();
        Ok(Self {
            rate: rate.clone(),
            n,
            m,
            states,
            index,
            row_start,
            targets,
            rates,
            exit_rate,
            pi,
        })
    }

    pub fn rate(&self) -> &RateFunction {
        &self.rate
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupancyConfig] {
        &self.states
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn index_of(&self, x: &OccupancyConfig) -> Result<usize> {
        self.index
            .get(x.occupancies())
            .copied()
            .ok_or(ZrpError::UnknownState)
    }

    /// Off-diagonal transitions out of `state`.
    pub fn transitions(&self, state: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[state]..self.row_start[state + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.rates[range])
            .map(|(&t, &r)| (t as usize, r))
    }

    pub fn exit_rate(&self, state: usize) -> f64 {
        self.exit_rate[state]
    }

    /// `v ↦ v Q`.
    pub fn apply_generator(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for s in 0..self.len() {
            let mass = v[s];
            if mass == 0.0 {
                continue;
            }
            out[s] -= mass * self.exit_rate[s];
            for (t, r) in self.transitions(s) {
                out[t] += mass * r;
            }
        }
    }

    /// `max_s |(π Q)_s|`.
    pub fn stationarity_residual(&self) -> f64 {
        let mut out = vec![0.0; self.len()];
        self.apply_generator(&self.pi, &mut out);
        out.iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    /// `max |π(x) q(x,y) - π(y) q(y,x)|` over transitions.
    pub fn detailed_balance_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in 0..self.len() {
            for (t, r) in self.transitions(s) {
                let back = self
                    .transitions(t)
                    .find(|&(u, _)| u == s)
                    .map(|(_, q)| q)
                    .unwrap_or(0.0);
                worst = worst.max((self.pi[s] * r - self.pi[t] * back).abs());
            }
        }
        worst
    }

    /// Point mass at `x0` as a law on the state space.
    pub fn point_mass(&self, x0: &OccupancyConfig) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.len()];
        v[self.index_of(x0)?] = 1.0;
        Ok(v)
    }

    /// `law · exp(t Q)` by uniformization. The Poisson series is cut where
    /// the analytic tail bound `P(N > K) <= p(K+1) (K+2) / (K+2-a)` drops
    /// below the per-chunk budget.
    pub fn propagate(&self, law: &[f64], t: f64) -> Vec<f64> {
        let lambda = self.exit_rate.iter().copied().fold(0.0, f64::max);
        if t <= 0.0 || lambda == 0.0 {
            return law.to_vec();
        }
        let chunks = ((lambda * t) / CHUNK_MEAN).ceil().max(1.0) as usize;
        let dt = t / chunks as f64;
        let a = lambda * dt;
        let tol = UNIFORMIZATION_TOL / chunks as f64;
        let mut current = law.to_vec();
        let mut term = vec![0.0; self.len()];
        let mut scratch = vec![0.0; self.len()];
        for _ in 0..chunks {
            let mut weight = (-a).exp();
            let mut acc: Vec<f64> = current.iter().map(|v| v * weight).collect();
            term.copy_from_slice(&current);
            let mut k = 0usize;
            loop {
                let next_weight = weight * a / (k + 1) as f64;
                let kk = (k + 2) as f64;
                if kk > a && next_weight * kk / (kk - a) < tol {
                    break;
                }
                // term <- term (I + Q / Λ)
                self.apply_generator(&term, &mut scratch);
                for (x, d) in term.iter_mut().zip(&scratch) {
                    *x += d / lambda;
                }
                k += 1;
                weight = next_weight;
                for (s, x) in acc.iter_mut().zip(&term) {
                    *s += weight * x;
                }
            }
            current = acc;
        }
        current
    }

    pub fn law_at(&self, x0: &OccupancyConfig, t: f64) -> Result<Vec<f64>> {
        Ok(self.propagate(&self.point_mass(x0)?, t))
    }

    pub fn tv_to_pi(&self, law: &[f64]) -> f64 {
        0.5 * law
            .iter()
            .zip(&self.pi)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// `d_TV(P_{x0}^t, π)` on an increasing grid.
    pub fn tv_curve(&self, x0: &OccupancyConfig, grid: &[f64]) -> Result<Vec<f64>> {
        crate::sim::check_grid(grid)?;
        let mut law = self.point_mass(x0)?;
        let mut now = 0.0;
        let mut out = Vec::with_capacity(grid.len());
        for &t in grid {
            law = self.propagate(&law, t - now);
            now = t;
            out.push(self.tv_to_pi(&law));
        }
        Ok(out)
    }

    /// `min{t : d_TV(P_{x0}^t, π) <= eps}`, bracketed by doubling and then
    /// bisected to `1e-9`.
    pub fn tmix(&self, x0: &OccupancyConfig, eps: f64) -> Result<f64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(crate::error::domain("eps", "need 0 < eps < 1"));
        }
        let start = self.point_mass(x0)?;
        if self.tv_to_pi(&start) <= eps {
            return Ok(0.0);
        }
        let mut lo = 0.0;
        let mut lo_law = start;
        let mut step = 0.25;
        let mut hi = loop {
            let law = self.propagate(&lo_law, step);
            if self.tv_to_pi(&law) <= eps {
                break lo + step;
            }
            lo += step;
            lo_law = law;
            step *= 2.0;
            if lo > 1e12 {
                return Err(crate::error::domain("eps", "threshold not reached"));
            }
        };
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            let law = self.propagate(&lo_law, mid - lo);
            if self.tv_to_pi(&law) <= eps {
                hi = mid;
            } else {
                lo = mid;
                lo_law = law;
            }
        }
        Ok(hi)
    }

    /// Writes `states.csv` (index, x1..xn), `stationary.csv` (index, pi) and
    /// `generator.csv` (row, col, rate, diagonal included).
    pub fn dump_csv<W: Write>(&self, states: W, stationary: W, generator: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(states);
        let mut header = vec!["index".to_string()];
        header.extend((1..=self.n).map(|i| format!("x{i}")));
        w.write_record(&header)?;
        for (i, s) in self.states.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(s.occupancies().iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_writer(stationary);
        w.write_record(["index", "pi"])?;
        for (i, p) in self.pi.iter().enumerate() {
            w.write_record([i.to_string(), p.to_string()])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_writer(generator);
        w.write_record(["row", "col", "rate"])?;
        for s in 0..self.len() {
            w.write_record([s.to_string(), s.to_string(), (-self.exit_rate[s]).to_string()])?;
            for (t, r) in self.transitions(s) {
                w.write_record([s.to_string(), t.to_string(), r.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn exact_small_chain(rate: &RateFunction, n: usize, m: u64) -> Result<ExactChain> {
    ExactChain::new(rate, n, m)
}

pub fn exact_tv_curve(chain: &ExactChain, x0: &OccupancyConfig, grid: &[f64]) -> Result<Vec<f64>> {
    chain.tv_curve(x0, grid)
}

pub fn exact_tmix(chain: &ExactChain, x0: &OccupancyConfig, eps: f64) -> Result<f64> {
    chain.tmix(x0, eps)
}
