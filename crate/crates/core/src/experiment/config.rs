//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::OccupancyConfig;
use crate::equilibrium::Statistic;
use crate::error::{Result, ZrpError};
use crate::hydro::Profile;
use crate::rates::{RateFunction, RateSpec};
use crate::sim::SimulatorKind;

/// Which experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Hydro,
    Cutoff,
    Coalescence,
    Equilibrium,
    Exact,
    Predict,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Hydro => "hydro",
            ExperimentKind::Cutoff => "cutoff",
            ExperimentKind::Coalescence => "coalescence",
            ExperimentKind::Equilibrium => "equilibrium",
            ExperimentKind::Exact => "exact",
            ExperimentKind::Predict => "predict",
        }
    }
}

/// Initial condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Start {
    /// All particles on site 0.
    #[default]
    Dirac,
    /// `⌊n u_k⌋` particles on site `k`, the remainder one per site after.
    Profile,
    /// An explicit occupancy vector.
    Config(Vec<u32>),
}

/// Every field an experiment may read. Fields an experiment does not use
/// are ignored by it. Times are rescaled (`t/n`) for hydro and cutoff and
/// raw otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub rate: RateSpec,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub profile: Vec<f64>,
    #[serde(default)]
    pub start: Start,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub simulator: SimulatorKind,
    /// Cutoff: statistic pushed through both laws.
    #[serde(default)]
    pub statistic: Statistic,
    /// Cutoff and equilibrium: number of exact draws from `π`.
    #[serde(default = "default_pi_samples")]
    pub pi_samples: usize,
    /// Cutoff: exact TV is added for `n` whose state space is at most this.
    #[serde(default = "default_exact_max_states")]
    pub exact_max_states: usize,
    /// Coalescence: the two tagged sites (0-based).
    #[serde(default)]
    pub tags: Option<(usize, usize)>,
    /// Coalescence: second configuration for the path-coupling bound.
    #[serde(default)]
    pub target: Option<Vec<u32>>,
    /// Exact: TV levels for which the mixing time is reported.
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Exact: also dump states, `π` and the generator.
    #[serde(default)]
    pub dump: bool,
}

fn default_steps() -> usize {
    100
}
fn default_replicas() -> usize {
    100
}
fn default_pi_samples() -> usize {
    1000
}
fn default_exact_max_states() -> usize {
    100_000
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

fn invalid(msg: impl Into<String>) -> ZrpError {
    ZrpError::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| invalid("a seed is required (config `seed` or --seed)"))
    }

    pub fn rate_function(&self, base_dir: Option<&Path>) -> Result<RateFunction> {
        self.rate.resolve(base_dir)
    }

    pub fn sizes(&self) -> Result<&[usize]> {
        if self.n.is_empty() {
            return Err(invalid("`n` must list at least one system size"));
        }
        if self.n.contains(&0) {
            return Err(invalid("system sizes must be at least 1"));
        }
        Ok(&self.n)
    }

    /// Particle count at size `n`: `m` if given, else `round(ρ n)`.
    pub fn particles(&self, n: usize) -> Result<u64> {
        match (self.m, self.rho) {
            (Some(m), _) => Ok(m),
            (None, Some(rho)) if rho.is_finite() && rho >= 0.0 => Ok((rho * n as f64).round() as u64),
            (None, Some(_)) => Err(invalid("`rho` must be finite and nonnegative")),
            (None, None) => Err(invalid("one of `rho` or `m` is required")),
        }
    }

    /// Density used by the limit objects.
    pub fn density(&self) -> Result<f64> {
        match (self.rho, self.m, self.n.first()) {
            (Some(rho), _, _) => Ok(rho),
            (None, Some(m), Some(&n)) if n > 0 => Ok(m as f64 / n as f64),
            _ => Err(invalid("one of `rho` or (`m`, `n`) is required")),
        }
    }

    pub fn hydro_profile(&self) -> Result<Profile> {
        Profile::new(self.profile.clone(), self.density()?)
    }

    /// Explicit grid, or `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn time_grid(&self) -> Result<Vec<f64>> {
        let grid = match (&self.grid, self.horizon) {
            (Some(g), _) => g.clone(),
            (None, Some(h)) if h.is_finite() && h >= 0.0 => {
                if h == 0.0 || self.steps == 0 {
                    vec![0.0]
                } else {
                    (0..=self.steps)
                        .map(|k| h * k as f64 / self.steps as f64)
                        .collect()
                }
            }
            (None, Some(_)) => return Err(invalid("`horizon` must be finite and nonnegative")),
            (None, None) => return Err(invalid("one of `grid` or `horizon` is required")),
        };
        crate::sim::check_grid(&grid)?;
        if grid.is_empty() {
            return Err(invalid("time grid is empty"));
        }
        Ok(grid)
    }

    pub fn initial_config(&self, n: usize) -> Result<OccupancyConfig> {
        match &self.start {
            Start::Dirac => OccupancyConfig::dirac(n, self.particles(n)?),
            Start::Profile => profile_config(n, self.particles(n)?, &self.profile),
            Start::Config(v) => {
                if v.len() != n {
                    return Err(invalid(format!(
                        "start config has {} sites, expected {n}",
                        v.len()
                    )));
                }
                OccupancyConfig::new(v.clone())
            }
        }
    }
}

/// Site `k` gets `⌊n u_k⌋` particles; the remaining ones go one per site to
/// the sites after the profile, cycling if there are more than sites.
pub fn profile_config(n: usize, m: u64, u: &[f64]) -> Result<OccupancyConfig> {
    if u.len() > n {
        return Err(ZrpError::InvalidProfile(format!(
            "profile has {} entries but only {n} sites",
            u.len()
        )));
    }
    let mut x = vec![0u32; n];
    let mut placed = 0u64;
    for (slot, &uk) in x.iter_mut().zip(u) {
        let k = (n as f64 * uk).floor() as u64;
        *slot = k as u32;
        placed += k;
    }
    if placed > m {
        return Err(ZrpError::InvalidProfile(format!(
            "profile places {placed} particles but m = {m}"
        )));
    }
    let fresh = n - u.len();
    let rest = m - placed;
    if rest > 0 && fresh == 0 {
        return Err(ZrpError::InvalidProfile(
            "no free sites for the liquid remainder".into(),
        ));
    }
    for r in 0..rest {
        x[u.len() + (r as usize % fresh)] += 1;
    }
    OccupancyConfig::new(x)
}
