//! Tagged particles on a shared background, coalescence times, and the
//! path-coupling upper bound on total variation.
//!
//! A tagged pair lives on top of a background configuration `X` (driven by
//! the graphical marks `Ξ`). An independent Poisson stream `Θ` of total rate
//! one carries marks `(t, u, k)`; each tag jumps to site `k` iff
//! `Δ(X at its current site) >= u`. Then `X + δ_I` is itself a zero-range
//! process, and once `I = J` the tags move together forever.

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::OccupancyConfig;
use crate::error::{domain, Result, ZrpError};
use crate::rates::RateFunction;
use crate::seeding::{self, SimRng};
use crate::sim::state::SiteState;
use crate::sim::{apply_xi, check_grid, XiStream};
use crate::stats::{wilson_interval, Z95};

/// `Δ(k) = r(k+1) - r(k)`.
pub fn delta_rate(rate: &RateFunction, k: u64) -> f64 {
    rate.delta(k)
}

/// Marks `(t, u, k)` of the tag stream, rate one in total.
struct ThetaStream {
    rng: SimRng,
    n: usize,
    clock: Exp<f64>,
    next_t: f64,
}

impl ThetaStream {
    fn new(n: usize, seed: u64) -> Self {
        let mut rng = seeding::rng(seed);
        let clock = Exp::new(1.0).expect("positive rate");
        let next_t = clock.sample(&mut rng);
        Self {
            rng,
            n,
            clock,
            next_t,
        }
    }

    fn pop(&mut self) -> (f64, f64, usize) {
        let ev = (
            self.next_t,
            1.0 - self.rng.gen::<f64>(),
            self.rng.gen_range(0..self.n),
        );
        self.next_t += self.clock.sample(&mut self.rng);
        ev
    }
}

/// One realization of two tags `I`, `J` on a common background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedPairRun {
    pub background_seed: u64,
    pub theta_seed: u64,
    pub grid: Vec<f64>,
    /// `(I(t), J(t))` at each grid time (0-based sites).
    pub positions: Vec<(usize, usize)>,
    /// First time `I = J`; `None` if it did not happen by the horizon.
    pub tau: Option<f64>,
    pub censored: bool,
    pub background_final: OccupancyConfig,
}

impl TaggedPairRun {
    /// `X(t) + δ_{I(t)}` at the horizon.
    pub fn tagged_config_i(&self) -> OccupancyConfig {
        let mut x = self.background_final.clone();
        x.add_particle(self.positions.last().expect("nonempty grid").0);
        x
    }

    /// Survives past `t` iff not coalesced by `t` (censored runs survive).
    pub fn survives(&self, t: f64) -> bool {
        match self.tau {
            Some(tau) => tau > t,
            None => true,
        }
    }
}

/// Runs the tagged pair from tags at `i`, `j` (0-based) on background `x`
/// up to the last grid time.
pub fn tagged_pair_simulate(
    rate: &RateFunction,
    x: &OccupancyConfig,
    i: usize,
    j: usize,
    grid: &[f64],
    background_seed: u64,
    theta_seed: u64,
) -> Result<TaggedPairRun> {
    let n = x.n();
    if i >= n || j >= n {
        return Err(domain("i/j", format!("sites must be below n = {n}")));
    }
    check_grid(grid)?;
    let mut state = SiteState::new(rate, x.clone());
    let mut xi = XiStream::new(n, background_seed);
    let mut theta = ThetaStream::new(n, theta_seed);
    let (mut a, mut b) = (i, j);
    let mut tau = (a == b).then_some(0.0);
    let mut positions = Vec::with_capacity(grid.len());
    for &target in grid {
        loop {
            let tx = xi.peek_time();
            let tt = theta.next_t;
            if tx.min(tt) > target {
                break;
            }
            if tx <= tt {
                let ev = xi.pop();
                apply_xi(rate, &mut state, &ev);
            } else {
                let (t, u, k) = theta.pop();
                if rate.delta(state.config.get(a) as u64) >= u {
                    a = k;
                }
                if rate.delta(state.config.get(b) as u64) >= u {
                    b = k;
                }
                if tau.is_none() && a == b {
                    tau = Some(t);
                }
            }
        }
        positions.push((a, b));
    }
    Ok(TaggedPairRun {
        background_seed,
        theta_seed,
        grid: grid.to_vec(),
        positions,
        censored: tau.is_none(),
        tau,
        background_final: state.config,
    })
}

fn replica_seeds(seed: u64, r: u64) -> (u64, u64) {
    let s = seeding::derive(seed, r);
    (seeding::derive(s, 0), seeding::derive(s, 1))
}

/// Monte Carlo estimate of `P(τ > t)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceTail {
    pub t: Vec<f64>,
    pub survival: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// Fraction of runs not coalesced by the horizon.
    pub censored_fraction: f64,
    pub replicas: usize,
}

impl CoalescenceTail {
    /// CSV `t,survival,ci_low,ci_high,censored_fraction`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "survival", "ci_low", "ci_high", "censored_fraction"])?;
        for k in 0..self.t.len() {
            w.serialize((
                self.t[k],
                self.survival[k],
                self.ci_low[k],
                self.ci_high[k],
                self.censored_fraction,
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn coalescence_tail(
    rate: &RateFunction,
    x: &OccupancyConfig,
    i: usize,
    j: usize,
    grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<CoalescenceTail> {
    if replicas == 0 {
        return Err(domain("replicas", "need at least one replica"));
    }
    check_grid(grid)?;
    let runs: Vec<TaggedPairRun> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let (bs, ts) = replica_seeds(seed, r);
            tagged_pair_simulate(rate, x, i, j, grid, bs, ts)
        })
        .collect::<Result<_>>()?;
    let total = replicas as u64;
    let mut survival = Vec::with_capacity(grid.len());
    let mut ci_low = Vec::with_capacity(grid.len());
    let mut ci_high = Vec::with_capacity(grid.len());
    for &t in grid {
        let alive = runs.iter().filter(|r| r.survives(t)).count() as u64;
        let (lo, hi) = wilson_interval(alive, total, Z95);
        survival.push(alive as f64 / total as f64);
        ci_low.push(lo);
        ci_high.push(hi);
    }
    let censored = runs.iter().filter(|r| r.censored).count();
    Ok(CoalescenceTail {
        t: grid.to_vec(),
        survival,
        ci_low,
        ci_high,
        censored_fraction: censored as f64 / replicas as f64,
        replicas,
    })
}

/// Moves `(from, to)` turning `x` into `y` one particle at a time: each
/// step takes a particle from the site with the largest excess over `y`
/// to the site with the largest deficit, ties to the smallest index.
pub fn shortest_path(x: &OccupancyConfig, y: &OccupancyConfig) -> Result<Vec<(usize, usize)>> {
    if x.n() != y.n() {
        return Err(domain("y", "site counts differ"));
    }
    if x.m() != y.m() {
        return Err(ZrpError::ParticleCountMismatch {
            left: x.m(),
            right: y.m(),
        });
    }
    let mut diff: Vec<i64> = x
        .occupancies()
        .iter()
        .zip(y.occupancies())
        .map(|(&a, &b)| a as i64 - b as i64)
        .collect();
    let mut moves = Vec::new();
    loop {
        let mut from = None;
        let mut to = None;
        for (s, &d) in diff.iter().enumerate() {
            if d > 0 && from.map_or(true, |f: usize| d > diff[f]) {
                from = Some(s);
            }
            if d < 0 && to.map_or(true, |t: usize| d < diff[t]) {
                to = Some(s);
            }
        }
        match (from, to) {
            (Some(f), Some(t)) => {
                diff[f] -= 1;
                diff[t] += 1;
                moves.push((f, t));
            }
            _ => break,
        }
    }
    Ok(moves)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEstimate {
    pub step: usize,
    pub from: usize,
    pub to: usize,
    pub survival: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// JSON report of [`path_coupling_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCouplingReport {
    pub t: f64,
    pub replicas: usize,
    pub path_length: usize,
    pub edges: Vec<EdgeEstimate>,
    /// `min(1, Σ_ℓ P(τ_ℓ > t))`.
    pub bound: f64,
    /// Same sum over the upper confidence limits.
    pub bound_ci_high: f64,
}

/// Upper bound on `d_TV(P_x^t, P_y^t)` by summing coalescence failure
/// probabilities along [`shortest_path`].
pub fn path_coupling_bound(
    rate: &RateFunction,
    x: &OccupancyConfig,
    y: &OccupancyConfig,
    t: f64,
    replicas: usize,
    seed: u64,
) -> Result<PathCouplingReport> {
    let moves = shortest_path(x, y)?;
    let mut w = x.clone();
    let mut edges = Vec::with_capacity(moves.len());
    for (step, &(from, to)) in moves.iter().enumerate() {
        // w_{l-1} = X + δ_from and w_l = X + δ_to on the background X.
        let mut background = w.clone();
        background.remove_particle(from)?;
        let tail = coalescence_tail(
            rate,
            &background,
            from,
            to,
            &[t],
            replicas,
            seeding::derive(seed, step as u64),
        )?;
        edges.push(EdgeEstimate {
            step,
            from,
            to,
            survival: tail.survival[0],
            ci_low: tail.ci_low[0],
            ci_high: tail.ci_high[0],
        });
        w.move_particle(from, to);
    }
    let bound = edges.iter().map(|e| e.survival).sum::<f64>().min(1.0);
    let bound_ci_high = edges.iter().map(|e| e.ci_high).sum::<f64>().min(1.0);
    Ok(PathCouplingReport {
        t,
        replicas,
        path_length: moves.len(),
        edges,
        bound,
        bound_ci_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::ExactChain;

    fn cfg(v: &[u32]) -> OccupancyConfig {
        OccupancyConfig::new(v.to_vec()).unwrap()
    }

    #[test]
    fn delta_values() {
        let one = RateFunction::rate_one();
        assert_eq!(delta_rate(&one, 0), 1.0);
        assert_eq!(delta_rate(&one, 1), 0.0);
        assert_eq!(delta_rate(&one, 7), 0.0);
        let half = RateFunction::new(&[0.5]).unwrap();
        assert_eq!(delta_rate(&half, 1), 0.5);
        let r = RateFunction::new(&[0.2, 0.3, 0.9]).unwrap();
        let total: f64 = (0..=r.k() as u64).map(|k| delta_rate(&r, k)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equal_tags_coalesce_at_zero() {
        let run = tagged_pair_simulate(&RateFunction::rate_one(), &cfg(&[1, 2]), 1, 1, &[1.0], 1, 2)
            .unwrap();
        assert_eq!(run.tau, Some(0.0));
        assert!(!run.censored);
    }

    #[test]
    fn out_of_range_tag() {
        assert!(tagged_pair_simulate(&RateFunction::rate_one(), &cfg(&[0, 0]), 0, 2, &[1.0], 1, 2)
            .is_err());
    }

    #[test]
    fn absorption_on_grid() {
        let rate = RateFunction::new(&[0.4, 0.7]).unwrap();
        let grid: Vec<f64> = (1..=50).map(|k| k as f64 * 0.2).collect();
        for r in 0..50 {
            let run = tagged_pair_simulate(&rate, &cfg(&[2, 0, 1, 3, 0]), 0, 4, &grid, r, r + 1000)
                .unwrap();
            let mut met = false;
            for (t, &(a, b)) in grid.iter().zip(&run.positions) {
                met |= a == b;
                assert!(!met || a == b);
                if let Some(tau) = run.tau {
                    assert_eq!(a == b, tau <= *t);
                }
            }
        }
    }

    #[test]
    fn exponential_coalescence_rate_one() {
        let grid = [0.0, 0.5, 1.0, 2.0];
        let tail =
            coalescence_tail(&RateFunction::rate_one(), &cfg(&[0, 0]), 0, 1, &grid, 4000, 9).unwrap();
        assert_eq!(tail.survival[0], 1.0);
        for (k, t) in grid.iter().enumerate() {
            let e = (-t).exp();
            let half = 4.0 * (e * (1.0 - e) / 4000.0).sqrt() + 1e-12;
            assert!((tail.survival[k] - e).abs() <= half, "t={t}: {}", tail.survival[k]);
        }
        assert!(tail.survival.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn superposition_small_case() {
        // X(t) + δ_I(t) should be distributed as the process from x + δ_i.
        let rate = RateFunction::new(&[0.5]).unwrap();
        let x = cfg(&[1, 0, 1]);
        let mut plus = x.clone();
        plus.add_particle(1);
        let chain = ExactChain::new(&rate, 3, 3).unwrap();
        let law = chain.law_at(&plus, 1.0).unwrap();
        let mut counts = vec![0u64; chain.len()];
        for r in 0..20_000u64 {
            let (bs, ts) = replica_seeds(77, r);
            let run = tagged_pair_simulate(&rate, &x, 1, 2, &[1.0], bs, ts).unwrap();
            counts[chain.index_of(&run.tagged_config_i()).unwrap()] += 1;
        }
        let res = crate::stats::chi_square_gof(&counts, &law).unwrap();
        assert!(res.passes(0.001), "{res:?}");
    }

    #[test]
    fn shortest_path_basic() {
        let x = cfg(&[3, 0, 1]);
        let y = cfg(&[1, 2, 1]);
        assert_eq!(shortest_path(&x, &y).unwrap(), vec![(0, 1), (0, 1)]);
        assert!(shortest_path(&x, &x).unwrap().is_empty());
        assert!(matches!(
            shortest_path(&x, &cfg(&[0, 0, 1])),
            Err(ZrpError::ParticleCountMismatch { .. })
        ));
    }

    #[test]
    fn bound_of_identical_configs_is_zero() {
        let x = cfg(&[1, 2, 0]);
        let r = path_coupling_bound(&RateFunction::rate_one(), &x, &x, 1.0, 10, 1).unwrap();
        assert_eq!(r.bound, 0.0);
        assert_eq!(r.path_length, 0);
    }

    #[test]
    fn csv_shape() {
        let tail =
            coalescence_tail(&RateFunction::rate_one(), &cfg(&[0, 1]), 0, 1, &[0.0, 1.0], 10, 3)
                .unwrap();
        let mut buf = Vec::new();
        tail.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,survival,ci_low,ci_high,censored_fraction\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
