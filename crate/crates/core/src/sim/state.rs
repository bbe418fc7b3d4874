use crate::config::OccupancyConfig;
use crate::rates::RateFunction;

/// Occupancy vector plus the bookkeeping every simulator needs: a histogram
/// of occupancies for O(1) maximum tracking, and per-rate-class site counts
/// from which the total jump rate is recomputed exactly.
///
/// Rate classes are `1..=K` (occupancy equal to the class) and `K+1`
/// (occupancy above `K`, rate one). Class counts are integers, so the total
/// rate never accumulates floating-point drift.
#[derive(Debug, Clone)]
pub(crate) struct SiteState {
    pub(crate) config: OccupancyConfig,
    hist: Vec<u32>,
    max: u32,
    class_count: Vec<u64>,
    class_rate: Vec<f64>,
}

impl SiteState {
    pub(crate) fn new(rate: &RateFunction, config: OccupancyConfig) -> Self {
        let k = rate.k();
        let mut hist = vec![0u32; config.m() as usize + 2];
        let mut class_count = vec![0u64; k + 2];
        for &x in config.occupancies() {
            hist[x as usize] += 1;
            class_count[class_of(k, x)] += 1;
        }
        let class_rate = (0..k + 2).map(|c| rate.rate(c as u64)).collect();
        let max = config.max_occupancy();
        Self {
            config,
            hist,
            max,
            class_count,
            class_rate,
        }
    }

    #[inline]
    pub(crate) fn k(&self) -> usize {
        self.class_count.len() - 2
    }

    #[inline]
    pub(crate) fn max_occupancy(&self) -> u32 {
        self.max
    }

    /// `Σ_i r(x_i)`.
    #[inline]
    pub(crate) fn total_rate(&self) -> f64 {
        self.class_count
            .iter()
            .zip(&self.class_rate)
            .skip(1)
            .map(|(&c, &r)| c as f64 * r)
            .sum()
    }

    #[inline]
    pub(crate) fn class_count(&self, class: usize) -> u64 {
        self.class_count[class]
    }

    #[inline]
    pub(crate) fn class_rate(&self, class: usize) -> f64 {
        self.class_rate[class]
    }

    /// Moves one particle `from -> to` (distinct sites). Returns the old
    /// and new rate classes of both sites.
    #[inline]
    pub(crate) fn move_particle(&mut self, from: usize, to: usize) -> [(usize, usize); 2] {
        let k = self.k();
        let xi = self.config.get(from);
        let xj = self.config.get(to);
        self.config.move_particle(from, to);
        if (xj + 1) as usize >= self.hist.len() {
            self.hist.resize(xj as usize + 2, 0);
        }
        self.hist[xi as usize] -= 1;
        self.hist[xi as usize - 1] += 1;
        self.hist[xj as usize] -= 1;
        self.hist[xj as usize + 1] += 1;
        if xj + 1 > self.max {
            self.max = xj + 1;
        }
        if xi == self.max && self.hist[xi as usize] == 0 {
            self.max -= 1;
        }
        let ci = (class_of(k, xi), class_of(k, xi - 1));
        let cj = (class_of(k, xj), class_of(k, xj + 1));
        self.class_count[ci.0] -= 1;
        self.class_count[ci.1] += 1;
        self.class_count[cj.0] -= 1;
        self.class_count[cj.1] += 1;
        [ci, cj]
    }
}

#[inline]
pub(crate) fn class_of(k: usize, x: u32) -> usize {
    (x as usize).min(k + 1)
}
