//! Graphical construction: a Poisson point process of marks `(t, u, i, j)`
//! with total rate `n` (intensity `1/n` on each of the `n²` ordered pairs),
//! and the jump `x -> x + δ_j - δ_i` applied iff `r(x_i) >= u`.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::state::SiteState;
use super::Dynamics;
use crate::config::OccupancyConfig;
use crate::error::{Result, ZrpError};
use crate::rates::RateFunction;
use crate::seeding::{self, SimRng};

/// One point of the background process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEvent {
    pub t: f64,
    pub u: f64,
    pub from: usize,
    pub to: usize,
}

/// Marks of the background Poisson process, generated lazily in time order.
#[derive(Debug, Clone)]
pub struct XiStream {
    rng: SimRng,
    n: usize,
    clock: Exp<f64>,
    next_t: f64,
}

impl XiStream {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = seeding::rng(seed);
        let clock = Exp::new(n as f64).expect("positive rate");
        let next_t = clock.sample(&mut rng);
        Self {
            rng,
            n,
            clock,
            next_t,
        }
    }

    #[inline]
    pub fn peek_time(&self) -> f64 {
        self.next_t
    }

    /// Pops the next mark. `u` is drawn from `(0, 1]` so that an empty site
    /// (`r(0) = 0`) never jumps.
    #[inline]
    pub fn pop(&mut self) -> XiEvent {
        let ev = XiEvent {
            t: self.next_t,
            u: 1.0 - self.rng.gen::<f64>(),
            from: self.rng.gen_range(0..self.n),
            to: self.rng.gen_range(0..self.n),
        };
        self.next_t += self.clock.sample(&mut self.rng);
        ev
    }
}

/// Applies one mark; returns whether a particle moved.
#[inline]
pub(crate) fn apply_xi(rate: &RateFunction, state: &mut SiteState, ev: &XiEvent) -> bool {
    if ev.from == ev.to {
        return false;
    }
    let x = state.config.get(ev.from) as u64;
    if rate.rate(x) >= ev.u {
        state.move_particle(ev.from, ev.to);
        true
    } else {
        false
    }
}

/// Exact simulator driven by the graphical construction.
#[derive(Debug, Clone)]
pub struct GraphicalSimulator {
    rate: RateFunction,
    state: SiteState,
    xi: XiStream,
    time: f64,
    events: u64,
    zeta_integral: f64,
    site_events: Option<SiteEventCounts>,
}

/// Per-site counts of marks leaving (`i = site`) and targeting (`j = site`)
/// each site, whether or not they were accepted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SiteEventCounts {
    pub leaving: Vec<u64>,
    pub targeting: Vec<u64>,
}

impl GraphicalSimulator {
    pub fn new(rate: &RateFunction, x: OccupancyConfig, seed: u64) -> Self {
        let n = x.n();
        Self {
            rate: rate.clone(),
            state: SiteState::new(rate, x),
            xi: XiStream::new(n, seed),
            time: 0.0,
            events: 0,
            zeta_integral: 0.0,
            site_events: None,
        }
    }

    /// Starts recording [`SiteEventCounts`] from now on.
    pub fn track_site_events(&mut self) {
        let n = self.state.config.n();
        self.site_events = Some(SiteEventCounts {
            leaving: vec![0; n],
            targeting: vec![0; n],
        });
    }

    pub fn site_events(&self) -> Option<&SiteEventCounts> {
        self.site_events.as_ref()
    }
}

impl Dynamics for GraphicalSimulator {
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
        self.state.total_rate() / self.state.config.n() as f64
    }

    fn zeta_integral(&self) -> f64 {
        self.zeta_integral
    }

    fn advance_to(&mut self, t: f64) {
        let n = self.state.config.n() as f64;
        let mut lambda = self.state.total_rate();
        while self.xi.peek_time() <= t {
            let ev = self.xi.pop();
            self.zeta_integral += lambda / n * (ev.t - self.time);
            self.time = ev.t;
            self.events += 1;
            if let Some(counts) = self.site_events.as_mut() {
                counts.leaving[ev.from] += 1;
                counts.targeting[ev.to] += 1;
            }
            if apply_xi(&self.rate, &mut self.state, &ev) {
                lambda = self.state.total_rate();
            }
        }
        if t > self.time {
            self.zeta_integral += lambda / n * (t - self.time);
            self.time = t;
        }
        self.state.config.debug_check();
    }
}

/// Two processes started from `x <= y` and driven by the same marks.
#[derive(Debug, Clone)]
pub struct MonotonePair {
    rate: RateFunction,
    lower: SiteState,
    upper: SiteState,
    xi: XiStream,
    time: f64,
    events: u64,
    order_violations: u64,
}

impl MonotonePair {
    pub fn new(
        rate: &RateFunction,
        lower: OccupancyConfig,
        upper: OccupancyConfig,
        seed: u64,
    ) -> Result<Self> {
        if lower.n() != upper.n() {
            return Err(ZrpError::InvalidConfig(format!(
                "site counts differ: {} vs {}",
                lower.n(),
                upper.n()
            )));
        }
        if let Some(site) = lower.first_order_violation(&upper) {
            return Err(ZrpError::OrderViolation { site });
        }
        let n = lower.n();
        Ok(Self {
            rate: rate.clone(),
            lower: SiteState::new(rate, lower),
            upper: SiteState::new(rate, upper),
            xi: XiStream::new(n, seed),
            time: 0.0,
            events: 0,
            order_violations: 0,
        })
    }

    pub fn lower(&self) -> &OccupancyConfig {
        &self.lower.config
    }

    pub fn upper(&self) -> &OccupancyConfig {
        &self.upper.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Number of marks after which some touched coordinate had `x_k > y_k`.
    pub fn order_violations(&self) -> u64 {
        self.order_violations
    }

    pub fn advance_to(&mut self, t: f64) {
        while self.xi.peek_time() <= t {
            let ev = self.xi.pop();
            self.time = ev.t;
            self.events += 1;
            apply_xi(&self.rate, &mut self.lower, &ev);
            apply_xi(&self.rate, &mut self.upper, &ev);
            // Only the two touched coordinates can change order.
            let (x, y) = (&self.lower.config, &self.upper.config);
            if x.get(ev.from) > y.get(ev.from) || x.get(ev.to) > y.get(ev.to) {
                self.order_violations += 1;
            }
        }
        self.time = self.time.max(t);
    }
}

/// Paired run record.
#[derive(Debug, Clone)]
pub struct PairTrajectory {
    pub sample_times: Vec<f64>,
    pub lower: Vec<OccupancyConfig>,
    pub upper: Vec<OccupancyConfig>,
    pub event_count: u64,
    pub order_violations: u64,
    pub seed: u64,
}

/// Runs the monotone coupling from `x <= y` and snapshots both chains on
/// `grid` (increasing, nonnegative times).
pub fn monotone_pair_simulate(
    rate: &RateFunction,
    x: &OccupancyConfig,
    y: &OccupancyConfig,
    grid: &[f64],
    seed: u64,
) -> Result<PairTrajectory> {
    super::check_grid(grid)?;
    let mut pair = MonotonePair::new(rate, x.clone(), y.clone(), seed)?;
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for &t in grid {
        pair.advance_to(t);
        lower.push(pair.lower().clone());
        upper.push(pair.upper().clone());
    }
    Ok(PairTrajectory {
        sample_times: grid.to_vec(),
        lower,
        upper,
        event_count: pair.events(),
        order_violations: pair.order_violations(),
        seed,
    })
}
