//! Experiment computations. Each returns plain data; writing files is left
//! to [`super::output`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::OccupancyConfig;
use crate::equilibrium::{
    state_count, tv_lower_bound, ExactChain, Reference, SamplerMethod, Statistic,
    StationarySampler, TvEstimate,
};
use crate::error::Result;
use crate::hydro::{HydroSolution, Profile};
use crate::rates::RateFunction;
use crate::seeding;
use crate::sim::{check_grid, SimulatorKind};
use crate::stats::median;

/// Stream tags for [`seeding::derive`], so that different uses of one root
/// seed never share randomness.
pub(crate) mod stream {
    pub const SIZE: u64 = 0x5157;
    pub const REPLICA: u64 = 0x5245;
    pub const PI: u64 = 0x5049;
    pub const BOOTSTRAP: u64 = 0x424f;
}

fn size_seed(seed: u64, n: usize) -> u64 {
    seeding::derive(seeding::derive(seed, stream::SIZE), n as u64)
}

fn replica_seed(seed: u64, n: usize, r: u64) -> u64 {
    seeding::derive(seeding::derive(size_seed(seed, n), stream::REPLICA), r)
}

/// One grid row of a hydrodynamic run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroRow {
    pub t_over_n: f64,
    /// `max_k |X_k(nt)/n - [u_k - f(t)]_+|` over all sites (`u_k = 0` past the profile).
    pub error: f64,
    /// `max_{k > L} X_k(nt) / n`.
    pub rest_max: f64,
    /// `X_k(nt)/n` for the profile sites.
    pub sites: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroReplica {
    pub sup_error: f64,
    pub rows: Vec<HydroRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroRun {
    pub n: usize,
    pub m: u64,
    pub replicas: Vec<HydroReplica>,
}

impl HydroRun {
    pub fn median_sup_error(&self) -> f64 {
        let v: Vec<f64> = self.replicas.iter().map(|r| r.sup_error).collect();
        median(&v)
    }
}

/// Simulates from `x0` and compares the profile sites with `[u_k - f]_+`
/// on a grid in rescaled time.
#[allow(clippy::too_many_arguments)]
pub fn hydro_run(
    rate: &RateFunction,
    profile: &Profile,
    x0: &OccupancyConfig,
    grid_over_n: &[f64],
    replicas: usize,
    kind: SimulatorKind,
    seed: u64,
) -> Result<HydroRun> {
    check_grid(grid_over_n)?;
    let n = x0.n();
    let nf = n as f64;
    let l = profile.len().min(n);
    let solution = HydroSolution::new(rate, profile);
    let limits: Vec<Vec<f64>> = grid_over_n
        .iter()
        .map(|&t| (1..=l).map(|k| solution.solid_site(k, t)).collect())
        .collect();
    let replicas = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut sim = kind.build(rate, x0.clone(), replica_seed(seed, n, r));
            let mut rows = Vec::with_capacity(grid_over_n.len());
            let mut sup = 0.0f64;
            for (&t, limit) in grid_over_n.iter().zip(&limits) {
                sim.advance_to(t * nf);
                let x = sim.config().occupancies();
                let sites: Vec<f64> = x[..l].iter().map(|&v| v as f64 / nf).collect();
                let rest_max = x[l..].iter().copied().max().unwrap_or(0) as f64 / nf;
                let error = sites
                    .iter()
                    .zip(limit)
                    .map(|(s, u)| (s - u).abs())
                    .fold(rest_max, f64::max);
                sup = sup.max(error);
                rows.push(HydroRow {
                    t_over_n: t,
                    error,
                    rest_max,
                    sites,
                });
            }
            HydroReplica {
                sup_error: sup,
                rows,
            }
        })
        .collect();
    Ok(HydroRun {
        n,
        m: x0.m(),
        replicas,
    })
}

/// TV lower bounds (and exact TV when affordable) along a rescaled grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCurve {
    pub n: usize,
    pub m: u64,
    pub t_over_n: Vec<f64>,
    pub tv_lb: Vec<TvEstimate>,
    pub tv_exact: Option<Vec<f64>>,
}

impl CutoffCurve {
    /// First rescaled time at which the lower bound is at most `level`,
    /// linearly interpolated between grid points.
    pub fn crossing(&self, level: f64) -> Option<f64> {
        let v: Vec<f64> = self.tv_lb.iter().map(|e| e.estimate).collect();
        let k = v.iter().position(|&x| x <= level)?;
        if k == 0 {
            return Some(self.t_over_n[0]);
        }
        let (t0, t1) = (self.t_over_n[k - 1], self.t_over_n[k]);
        let (v0, v1) = (v[k - 1], v[k]);
        Some(t0 + (t1 - t0) * (v0 - level) / (v0 - v1))
    }

    /// Rescaled time for the lower bound to fall from `hi` to `lo`.
    pub fn window(&self, hi: f64, lo: f64) -> Option<f64> {
        Some(self.crossing(lo)? - self.crossing(hi)?)
    }

    pub fn estimate_at(&self, t_over_n: f64) -> Option<f64> {
        self.t_over_n
            .iter()
            .position(|&t| (t - t_over_n).abs() < 1e-12)
            .map(|k| self.tv_lb[k].estimate)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn cutoff_curve(
    rate: &RateFunction,
    x0: &OccupancyConfig,
    grid_over_n: &[f64],
    replicas: usize,
    pi_samples: usize,
    statistic: Statistic,
    exact_max_states: usize,
    kind: SimulatorKind,
    seed: u64,
) -> Result<CutoffCurve> {
    check_grid(grid_over_n)?;
    let n = x0.n();
    let m = x0.m();
    let nf = n as f64;
    let base = size_seed(seed, n);
    let sampler = StationarySampler::new(rate, n, m, SamplerMethod::Auto)?;
    let pi_seed = seeding::derive(base, stream::PI);
    let reference: Vec<u64> = (0..pi_samples as u64)
        .into_par_iter()
        .map(|i| statistic.eval(&sampler.sample(&mut seeding::rng(seeding::derive(pi_seed, i)))))
        .collect();
    let per_replica: Vec<Vec<u64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut sim = kind.build(rate, x0.clone(), replica_seed(seed, n, r));
            grid_over_n
                .iter()
                .map(|&t| {
                    sim.advance_to(t * nf);
                    statistic.eval(sim.config())
                })
                .collect()
        })
        .collect();
    let reference = Reference::Samples(reference);
    let boot = seeding::derive(base, stream::BOOTSTRAP);
    let tv_lb = (0..grid_over_n.len())
        .map(|k| {
            let column: Vec<u64> = per_replica.iter().map(|row| row[k]).collect();
            tv_lower_bound(&column, &reference, seeding::derive(boot, k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let tv_exact = if state_count(n, m) <= exact_max_states as u128 {
        let chain = ExactChain::new(rate, n, m)?;
        let raw: Vec<f64> = grid_over_n.iter().map(|t| t * nf).collect();
        Some(chain.tv_curve(x0, &raw)?)
    } else {
        None
    };
    Ok(CutoffCurve {
        n,
        m,
        t_over_n: grid_over_n.to_vec(),
        tv_lb,
        tv_exact,
    })
}
