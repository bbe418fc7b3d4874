use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Dynamics, SimulatorKind};
use crate::config::OccupancyConfig;
use crate::error::Result;
use crate::observables::Observables;

/// What to record at each grid time. Maximum occupancy and `ζ` are always
/// recorded; everything else is opt-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotPolicy {
    /// `L` in the `solid_mass_L` column.
    pub solid_l: usize,
    /// Number of sorted top occupancies to keep.
    pub top_k: usize,
    pub full_config: bool,
    /// Site indices (0-based) whose occupancies are kept.
    pub coords: Vec<usize>,
}

impl Default for SnapshotPolicy {
    fn default() -> Self {
        Self {
            solid_l: 1,
            top_k: 1,
            full_config: false,
            coords: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub max_occupancy: u32,
    pub zeta: f64,
    pub zeta_integral: f64,
    pub solid_mass: u64,
    pub top: Vec<u32>,
    pub coords: Vec<u32>,
    pub config: Option<OccupancyConfig>,
    pub events: u64,
}

impl Snapshot {
    pub(crate) fn take<D: Dynamics + ?Sized>(sim: &D, policy: &SnapshotPolicy) -> Self {
        let x = sim.config();
        let (solid_mass, top) = if policy.solid_l > 0 || policy.top_k > 0 {
            let obs = Observables::of(x);
            (
                obs.solid_mass(policy.solid_l),
                obs.sorted_top(policy.top_k).to_vec(),
            )
        } else {
            (0, Vec::new())
        };
        Self {
            t: sim.time(),
            max_occupancy: sim.max_occupancy(),
            zeta: sim.zeta(),
            zeta_integral: sim.zeta_integral(),
            solid_mass,
            top,
            coords: policy.coords.iter().map(|&i| x.get(i)).collect(),
            config: policy.full_config.then(|| x.clone()),
            events: sim.events(),
        }
    }
}

/// Observables of one run on a fixed time grid. Times are raw (unrescaled).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub simulator: SimulatorKind,
    pub n: usize,
    pub m: u64,
    pub seed: u64,
    pub policy: SnapshotPolicy,
    pub event_count: u64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn sample_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }

    /// Hydrodynamic time `t / n`.
    pub fn rescaled_times(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n as f64;
        self.snapshots.iter().map(move |s| s.t / n)
    }

    /// `V(t/n) = (1/n) ∫_0^t (1 - ζ(s)) ds`, the rescaled cumulative
    /// deficit of the mean-field jump rate.
    pub fn rescaled_rate_deficit(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n as f64;
        self.snapshots
            .iter()
            .map(move |s| (s.t - s.zeta_integral) / n)
    }

    /// CSV with columns `t, max_occ, zeta, solid_mass_L, top1..topk`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "t".to_string(),
            "max_occ".to_string(),
            "zeta".to_string(),
            format!("solid_mass_{}", self.policy.solid_l),
        ];
        let k = self.policy.top_k.min(self.n);
        header.extend((1..=k).map(|i| format!("top{i}")));
        w.write_record(&header)?;
        for s in &self.snapshots {
            let mut row = vec![
                s.t.to_string(),
                s.max_occupancy.to_string(),
                s.zeta.to_string(),
                s.solid_mass.to_string(),
            ];
            row.extend(s.top.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn metadata(&self, rate: &str, grid: &[f64]) -> RunMetadata {
        RunMetadata {
            seed: self.seed,
            n: self.n,
            m: self.m,
            rate: rate.to_string(),
            horizon: grid.last().copied().unwrap_or(0.0),
            grid: grid.to_vec(),
            simulator: self.simulator,
            event_count: self.event_count,
        }
    }
}

/// Sidecar JSON describing one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub n: usize,
    pub m: u64,
    pub rate: String,
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub simulator: SimulatorKind,
    pub event_count: u64,
}
