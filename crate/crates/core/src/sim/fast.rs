//! Rejection-free simulator: events arrive at total rate `Λ = Σ_i r(x_i)`,
//! the source is picked with probability `r(x_i)/Λ` and the destination
//! uniformly on all `n` sites (a self-destination is a no-op, exactly as in
//! the generator). Same law as [`GraphicalSimulator`](super::GraphicalSimulator),
//! but no work is spent on rejected marks.
//!
//! Sites are bucketed by rate class, so sampling a source costs `O(K)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use super::state::{class_of, SiteState};
use super::Dynamics;
use crate::config::OccupancyConfig;
use crate::rates::RateFunction;
use crate::seeding::{self, SimRng};

#[derive(Debug, Clone)]
pub struct FastSimulator {
    state: SiteState,
    /// `members[c]` lists the sites currently in rate class `c`.
    members: Vec<Vec<u32>>,
    /// Index of each site inside its class list.
    slot: Vec<u32>,
    rng: SimRng,
    time: f64,
    next_t: f64,
    lambda: f64,
    events: u64,
    zeta_integral: f64,
}

impl FastSimulator {
    pub fn new(rate: &RateFunction, x: OccupancyConfig, seed: u64) -> Self {
        let k = rate.k();
        let mut members = vec![Vec::new(); k + 2];
        let mut slot = vec![0u32; x.n()];
        for (site, &occ) in x.occupancies().iter().enumerate() {
            let c = class_of(k, occ);
            slot[site] = members[c].len() as u32;
            members[c].push(site as u32);
        }
        let state = SiteState::new(rate, x);
        let mut sim = Self {
            state,
            members,
            slot,
            rng: seeding::rng(seed),
            time: 0.0,
            next_t: f64::INFINITY,
            lambda: 0.0,
            events: 0,
            zeta_integral: 0.0,
        };
        sim.lambda = sim.state.total_rate();
        sim.next_t = sim.draw_next(0.0);
        sim
    }

    /// Current total jump rate `Λ`.
    pub fn total_rate(&self) -> f64 {
        self.lambda
    }

    fn draw_next(&mut self, from: f64) -> f64 {
        if self.lambda > 0.0 {
            let e: f64 = Exp1.sample(&mut self.rng);
            from + e / self.lambda
        } else {
            f64::INFINITY
        }
    }

    fn relocate(&mut self, site: usize, old: usize, new: usize) {
        if old == new {
            return;
        }
        let idx = self.slot[site] as usize;
        let list = &mut self.members[old];
        list.swap_remove(idx);
        if let Some(&moved) = list.get(idx) {
            self.slot[moved as usize] = idx as u32;
        }
        self.slot[site] = self.members[new].len() as u32;
        self.members[new].push(site as u32);
    }

    fn pick_source(&mut self) -> usize {
        let k = self.state.k();
        let mut target = self.rng.gen::<f64>() * self.lambda;
        let mut chosen = None;
        for c in 1..=k + 1 {
            let w = self.state.class_count(c) as f64 * self.state.class_rate(c);
            if w <= 0.0 {
                continue;
            }
            chosen = Some(c);
            if target < w {
                break;
            }
            target -= w;
        }
        // Rounding can leave `target` just above the last weight; the last
        // nonempty class absorbs it.
        let c = chosen.expect("positive total rate has a nonempty class");
        let list = &self.members[c];
        list[self.rng.gen_range(0..list.len())] as usize
    }

    fn step(&mut self) {
        let n = self.state.config.n();
        let t = self.next_t;
        self.zeta_integral += self.lambda / n as f64 * (t - self.time);
        self.time = t;
        self.events += 1;
        let from = self.pick_source();
        let to = self.rng.gen_range(0..n);
        if from != to {
            let [ci, cj] = self.state.move_particle(from, to);
            self.relocate(from, ci.0, ci.1);
            self.relocate(to, cj.0, cj.1);
            self.lambda = self.state.total_rate();
        }
        self.next_t = self.draw_next(t);
    }
}

impl Dynamics for FastSimulator {
    fn time(&self) -> f64 {
        self.time
    }

    fn config(&self) -> &OccupancyConfig {
        &self.state.config
    }

    fn events(&self) -> u64 {
        self.events
    }

    fn max_occupancy(&self) -> u32 {
        self.state.max_occupancy()
    }

    fn zeta(&self) -> f64 {
        self.lambda / self.state.config.n() as f64
    }

    fn zeta_integral(&self) -> f64 {
        self.zeta_integral
    }

    fn advance_to(&mut self, t: f64) {
        while self.next_t <= t {
            self.step();
        }
        if t > self.time {
            let n = self.state.config.n() as f64;
            self.zeta_integral += self.lambda / n * (t - self.time);
            self.time = t;
        }
        self.state.config.debug_check();
    }
}
