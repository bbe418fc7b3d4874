//! Total-variation estimators built from scalar statistics and empirical
//! measures.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{SamplerMethod, StationarySampler};
use crate::config::OccupancyConfig;
use crate::dist::DiscreteDist;
use crate::error::{Result, ZrpError};
use crate::observables::Observables;
use crate::rates::RateFunction;
use crate::seeding;
use crate::stats::mean_ci;

/// Minimum sample size accepted by [`tv_lower_bound`].
pub const MIN_SAMPLES: usize = 100;
/// Bootstrap resamples used for the confidence interval.
pub const BOOTSTRAP_ROUNDS: usize = 200;

/// Scalar statistic of a configuration. Pushing both laws through a fixed
/// map can only shrink TV, so TV between statistic laws is a lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    MaxOccupancy,
    EmptySites,
    SolidMass(usize),
}

impl Statistic {
    pub fn eval(&self, x: &OccupancyConfig) -> u64 {
        match *self {
            Statistic::MaxOccupancy => x.max_occupancy() as u64,
            Statistic::EmptySites => x.occupancies().iter().filter(|&&v| v == 0).count() as u64,
            Statistic::SolidMass(l) => Observables::of(x).solid_mass(l),
        }
    }
}

/// Law of the statistic under `π`: either known exactly or sampled.
#[derive(Debug, Clone)]
pub enum Reference {
    Exact(DiscreteDist),
    Samples(Vec<u64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn empirical(values: &[u64]) -> DiscreteDist {
    DiscreteDist::from_samples(values.iter().copied()).expect("nonempty sample")
}

fn resample<R: Rng>(values: &[u64], rng: &mut R) -> Vec<u64> {
    (0..values.len())
        .map(|_| values[rng.gen_range(0..values.len())])
        .collect()
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

/// Plug-in TV between the empirical law of `samples` and the reference,
/// with a percentile bootstrap 95% interval. The plug-in estimate is biased
/// upward for small samples.
pub fn tv_lower_bound(samples: &[u64], reference: &Reference, seed: u64) -> Result<TvEstimate> {
    if samples.len() < MIN_SAMPLES {
        return Err(ZrpError::TooFewSamples {
            got: samples.len(),
            need: MIN_SAMPLES,
        });
    }
    if let Reference::Samples(r) = reference {
        if r.len() < MIN_SAMPLES {
            return Err(ZrpError::TooFewSamples {
                got: r.len(),
                need: MIN_SAMPLES,
            });
        }
    }
    let tv = |s: &[u64], r: &Reference| -> f64 {
        let p = empirical(s);
        match r {
            Reference::Exact(d) => p.tv_distance(d),
            Reference::Samples(v) => p.tv_distance(&empirical(v)),
        }
    };
    let estimate = tv(samples, reference);
    let mut rng = seeding::rng(seed);
    let mut boot: Vec<f64> = (0..BOOTSTRAP_ROUNDS)
        .map(|_| {
            let s = resample(samples, &mut rng);
            match reference {
                Reference::Exact(_) => tv(&s, reference),
                Reference::Samples(v) => tv(&s, &Reference::Samples(resample(v, &mut rng))),
            }
        })
        .collect();
    boot.sort_by(|a, b| a.total_cmp(b));
    Ok(TvEstimate {
        estimate,
        ci_low: percentile(&boot, 0.025),
        ci_high: percentile(&boot, 0.975),
    })
}

/// Per-sample distances between the empirical measure `(1/n) Σ δ_{x_i}` of
/// a `π`-sample and `q̄(m/n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    pub n: usize,
    pub m: u64,
    pub distances: Vec<f64>,
    pub max_occupancies: Vec<u32>,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn equilibrium_profile_check(
    rate: &RateFunction,
    n: usize,
    m: u64,
    samples: usize,
    seed: u64,
) -> Result<ProfileCheck> {
    let sampler = StationarySampler::new(rate, n, m, SamplerMethod::Auto)?;
    let target = if m == 0 {
        DiscreteDist::dirac(0)
    } else {
        rate.q_bar(m as f64 / n as f64)?
    };
    let draws: Vec<(f64, u32)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = sampler.sample(&mut seeding::rng(seeding::derive(seed, i)));
            let obs = Observables::of(&x);
            (obs.empirical_measure().tv_distance(&target), obs.max_occupancy())
        })
        .collect();
    let (distances, max_occupancies): (Vec<f64>, Vec<u32>) = draws.into_iter().unzip();
    let (mean, ci_low, ci_high) = mean_ci(&distances);
    Ok(ProfileCheck {
        n,
        m,
        distances,
        max_occupancies,
        mean,
        ci_low,
        ci_high,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_zero() {
        let s: Vec<u64> = (0..200).map(|i| i % 7).collect();
        let r = tv_lower_bound(&s, &Reference::Samples(s.clone()), 1).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn disjoint_supports_give_one() {
        let a = vec![3u64; 150];
        let b = vec![9u64; 150];
        let r = tv_lower_bound(&a, &Reference::Samples(b), 1).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert_eq!(r.ci_low, 1.0);
        let r = tv_lower_bound(&a, &Reference::Exact(DiscreteDist::dirac(0)), 1).unwrap();
        assert_eq!(r.estimate, 1.0);
    }

    #[test]
    fn too_few_samples() {
        let a = vec![0u64; 99];
        assert!(matches!(
            tv_lower_bound(&a, &Reference::Exact(DiscreteDist::dirac(0)), 0),
            Err(ZrpError::TooFewSamples { got: 99, .. })
        ));
    }

    #[test]
    fn statistics() {
        let x = OccupancyConfig::new(vec![3, 0, 1, 0, 2]).unwrap();
        assert_eq!(Statistic::MaxOccupancy.eval(&x), 3);
        assert_eq!(Statistic::EmptySites.eval(&x), 2);
        assert_eq!(Statistic::SolidMass(2).eval(&x), 5);
    }

    #[test]
    fn empty_system_profile_is_exact() {
        let c = equilibrium_profile_check(&RateFunction::rate_one(), 10, 0, 3, 5).unwrap();
        assert!(c.distances.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn profile_distance_shrinks_with_n() {
        let one = RateFunction::rate_one();
        let means: Vec<f64> = [100, 1000, 10_000]
            .iter()
            .map(|&n| equilibrium_profile_check(&one, n, n as u64, 20, 3).unwrap().mean)
            .collect();
        assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
    }
}
