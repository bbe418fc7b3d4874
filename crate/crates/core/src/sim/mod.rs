//! Exact simulation of the mean-field zero-range process.
//!
//! [`GraphicalSimulator`] realizes the process from the marked Poisson
//! process and is the one to use whenever two processes must share
//! randomness. [`FastSimulator`] only spends work on events that move a
//! particle and is the default for large systems. Both run in raw time; the
//! hydrodynamic time scale `t/n` is exposed as a derived quantity.

mod fast;
mod graphical;
pub(crate) mod state;
mod trajectory;

pub use fast::FastSimulator;
pub use graphical::{
    monotone_pair_simulate, GraphicalSimulator, MonotonePair, PairTrajectory, SiteEventCounts,
    XiEvent, XiStream,
};
pub(crate) use graphical::apply_xi;
pub use trajectory::{RunMetadata, Snapshot, SnapshotPolicy, Trajectory};

use serde::{Deserialize, Serialize};

use crate::config::OccupancyConfig;
use crate::error::{domain, Result};
use crate::rates::RateFunction;

/// A continuous-time realization that can be advanced and inspected.
pub trait Dynamics {
    fn time(&self) -> f64;
    fn config(&self) -> &OccupancyConfig;
    /// Number of events processed so far (including no-op events).
    fn events(&self) -> u64;
    fn max_occupancy(&self) -> u32;
    fn zeta(&self) -> f64;
    /// `∫_0^t ζ(s) ds` up to the current time.
    fn zeta_integral(&self) -> f64;
    /// Applies every event with time `<= t`; the clock then reads `max(t, time())`.
    fn advance_to(&mut self, t: f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SimulatorKind {
    Graphical,
    #[default]
    Fast,
}

impl SimulatorKind {
    pub fn build(self, rate: &RateFunction, x: OccupancyConfig, seed: u64) -> Box<dyn Dynamics> {
        match self {
            SimulatorKind::Graphical => Box::new(GraphicalSimulator::new(rate, x, seed)),
            SimulatorKind::Fast => Box::new(FastSimulator::new(rate, x, seed)),
        }
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(domain("grid", "times must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("grid", "times must be strictly increasing"));
    }
    Ok(())
}

/// Grid `{0, horizon}`, or `{0}` when the horizon is zero.
pub fn endpoint_grid(horizon: f64) -> Vec<f64> {
    if horizon > 0.0 {
        vec![0.0, horizon]
    } else {
        vec![0.0]
    }
}

/// Runs `sim` through `grid`, taking a snapshot at every grid time.
pub fn record<D: Dynamics + ?Sized>(
    sim: &mut D,
    kind: SimulatorKind,
    grid: &[f64],
    policy: &SnapshotPolicy,
    seed: u64,
) -> Result<Trajectory> {
    check_grid(grid)?;
    let n = sim.config().n();
    let m = sim.config().m();
    let mut snapshots = Vec::with_capacity(grid.len());
    for &t in grid {
        sim.advance_to(t);
        snapshots.push(Snapshot::take(&*sim, policy));
    }
    Ok(Trajectory {
        simulator: kind,
        n,
        m,
        seed,
        policy: policy.clone(),
        event_count: sim.events(),
        snapshots,
    })
}

/// Graphical-construction run recorded on `grid`.
pub fn simulate_graphical(
    rate: &RateFunction,
    x: &OccupancyConfig,
    grid: &[f64],
    policy: &SnapshotPolicy,
    seed: u64,
) -> Result<Trajectory> {
    let mut sim = GraphicalSimulator::new(rate, x.clone(), seed);
    record(&mut sim, SimulatorKind::Graphical, grid, policy, seed)
}

/// Rejection-free run recorded on `grid`.
pub fn simulate_fast(
    rate: &RateFunction,
    x: &OccupancyConfig,
    grid: &[f64],
    policy: &SnapshotPolicy,
    seed: u64,
) -> Result<Trajectory> {
    let mut sim = FastSimulator::new(rate, x.clone(), seed);
    record(&mut sim, SimulatorKind::Fast, grid, policy, seed)
}

/// Configuration at time `t`, without any recording.
pub fn state_at(
    kind: SimulatorKind,
    rate: &RateFunction,
    x: &OccupancyConfig,
    t: f64,
    seed: u64,
) -> OccupancyConfig {
    let mut sim = kind.build(rate, x.clone(), seed);
    sim.advance_to(t);
    sim.config().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[0.0, 1.0, 2.0]).is_ok());
        assert!(check_grid(&[0.0, 0.0]).is_err());
        assert!(check_grid(&[-1.0]).is_err());
        assert!(check_grid(&[f64::NAN]).is_err());
    }

    #[test]
    fn zero_horizon_gives_initial_snapshot() {
        let rate = RateFunction::rate_one();
        let x = OccupancyConfig::dirac(4, 6).unwrap();
        let policy = SnapshotPolicy::default();
        for traj in [
            simulate_graphical(&rate, &x, &endpoint_grid(0.0), &policy, 1).unwrap(),
            simulate_fast(&rate, &x, &endpoint_grid(0.0), &policy, 1).unwrap(),
        ] {
            assert_eq!(traj.snapshots.len(), 1);
            assert_eq!(traj.snapshots[0].max_occupancy, 6);
            assert_eq!(traj.event_count, 0);
        }
    }

    #[test]
    fn frozen_fast_matches_graphical() {
        let rate = RateFunction::rate_one();
        let x = OccupancyConfig::empty(3).unwrap();
        let grid = [0.0, 1.0, 5.0];
        let policy = SnapshotPolicy {
            full_config: true,
            ..SnapshotPolicy::default()
        };
        let a = simulate_fast(&rate, &x, &grid, &policy, 5).unwrap();
        let b = simulate_graphical(&rate, &x, &grid, &policy, 5).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            assert_eq!(sa.config, sb.config);
            assert_eq!(sa.max_occupancy, sb.max_occupancy);
            assert_eq!(sa.zeta, sb.zeta);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let rate = RateFunction::threshold(3).unwrap();
        let x = OccupancyConfig::dirac(20, 60).unwrap();
        let grid: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let policy = SnapshotPolicy {
            full_config: true,
            top_k: 3,
            solid_l: 2,
            ..SnapshotPolicy::default()
        };
        for kind in [SimulatorKind::Fast, SimulatorKind::Graphical] {
            let mut s1 = kind.build(&rate, x.clone(), 77);
            let mut s2 = kind.build(&rate, x.clone(), 77);
            let a = record(&mut *s1, kind, &grid, &policy, 77).unwrap();
            let b = record(&mut *s2, kind, &grid, &policy, 77).unwrap();
            assert_eq!(a, b);
            let c = record(&mut *kind.build(&rate, x.clone(), 78), kind, &grid, &policy, 78).unwrap();
            assert_ne!(a.snapshots, c.snapshots);
        }
    }
}
