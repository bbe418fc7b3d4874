use serde::{Deserialize, Serialize};

use crate::error::{domain, Result, ZrpError};

/// Occupancies `x_1..x_n` of the `n` sites, with the particle count cached.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct OccupancyConfig {
    occupancies: Vec<u32>,
    m: u64,
}

impl OccupancyConfig {
    pub fn new(occupancies: Vec<u32>) -> Result<Self> {
        if occupancies.is_empty() {
            return Err(ZrpError::InvalidConfig("need at least one site".into()));
        }
        let m = occupancies.iter().map(|&x| x as u64).sum();
        Ok(Self { occupancies, m })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(vec![0; n])
    }

    /// All `m` particles on the first site.
    pub fn dirac(n: usize, m: u64) -> Result<Self> {
        if n == 0 {
            return Err(ZrpError::InvalidConfig("need at least one site".into()));
        }
        let top = u32::try_from(m).map_err(|_| domain("m", "particle count exceeds u32"))?;
        let mut occupancies = vec![0; n];
        occupancies[0] = top;
        Ok(Self { occupancies, m })
    }

    pub fn n(&self) -> usize {
        self.occupancies.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn occupancies(&self) -> &[u32] {
        &self.occupancies
    }

    pub fn get(&self, site: usize) -> u32 {
        self.occupancies[site]
    }

    pub fn into_vec(self) -> Vec<u32> {
        self.occupancies
    }

    pub fn max_occupancy(&self) -> u32 {
        self.occupancies.iter().copied().max().unwrap_or(0)
    }

    /// Moves one particle from `from` to `to`. Panics if `from` is empty.
    #[inline]
    pub fn move_particle(&mut self, from: usize, to: usize) {
        assert!(self.occupancies[from] > 0, "jump from empty site {from}");
        self.occupancies[from] -= 1;
        self.occupancies[to] += 1;
    }

    pub fn add_particle(&mut self, site: usize) {
        self.occupancies[site] += 1;
        self.m += 1;
    }

    pub fn remove_particle(&mut self, site: usize) -> Result<()> {
        if self.occupancies[site] == 0 {
            return Err(domain("site", format!("site {site} is empty")));
        }
        self.occupancies[site] -= 1;
        self.m -= 1;
        Ok(())
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.first_order_violation(other).is_none()
    }

    pub(crate) fn first_order_violation(&self, other: &Self) -> Option<usize> {
        if self.n() != other.n() {
            return Some(0);
        }
        self.occupancies
            .iter()
            .zip(&other.occupancies)
            .position(|(a, b)| a > b)
    }

    /// Zeroes the first `l` coordinates.
    pub fn truncate_solid(&self, l: usize) -> Result<Self> {
        if l > self.n() {
            return Err(domain("l", format!("{l} exceeds site count {}", self.n())));
        }
        let mut occupancies = self.occupancies.clone();
        occupancies[..l].iter_mut().for_each(|x| *x = 0);
        Self::new(occupancies)
    }

    pub(crate) fn debug_check(&self) {
        debug_assert_eq!(
            self.occupancies.iter().map(|&x| x as u64).sum::<u64>(),
            self.m,
            "particle count drifted"
        );
    }
}

impl TryFrom<Vec<u32>> for OccupancyConfig {
    type Error = ZrpError;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OccupancyConfig> for Vec<u32> {
    fn from(c: OccupancyConfig) -> Self {
        c.occupancies
    }
}

/// Free-function form of [`OccupancyConfig::dirac`].
pub fn dirac_config(n: usize, m: u64) -> Result<OccupancyConfig> {
    OccupancyConfig::dirac(n, m)
}

/// Free-function form of [`OccupancyConfig::truncate_solid`].
pub fn truncate_solid(x: &OccupancyConfig, l: usize) -> Result<OccupancyConfig> {
    x.truncate_solid(l)
}
