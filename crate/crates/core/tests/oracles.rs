//! Monte Carlo estimators checked against exact or closed-form answers.

use zrp_core::coupling::{coalescence_tail, path_coupling_bound, tagged_pair_simulate};
use zrp_core::equilibrium::{
    sample_pi, tv_lower_bound, ExactChain, Reference, SamplerMethod, Statistic, StationarySampler,
};
use zrp_core::experiment::hydro_run;
use zrp_core::hydro::{HydroSolution, Profile};
use zrp_core::seeding::{derive, rng};
use zrp_core::sim::{state_at, SimulatorKind};
use zrp_core::stats::{chi_square_gof, mean_ci};
use zrp_core::{DiscreteDist, OccupancyConfig, RateFunction};

fn cfg(v: &[u32]) -> OccupancyConfig {
    OccupancyConfig::new(v.to_vec()).unwrap()
}

#[test]
fn sample_pi_two_sites_is_uniform() {
    let one = RateFunction::rate_one();
    let hits = (0..20_000u64)
        .filter(|&s| sample_pi(&one, 2, 1, s).unwrap().get(0) == 1)
        .count() as f64;
    let p = hits / 20_000.0;
    assert!((p - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt(), "{p}");
}

#[test]
fn first_coordinate_matches_convolution_marginal() {
    let rate = RateFunction::new(&[0.5]).unwrap();
    let (n, m) = (20, 30);
    let seq = StationarySampler::new(&rate, n, m, SamplerMethod::Sequential).unwrap();
    let law = seq.coordinate_law().unwrap();
    for method in [SamplerMethod::Rejection, SamplerMethod::Sequential] {
        let s = StationarySampler::new(&rate, n, m, method).unwrap();
        let mut r = rng(31);
        let mut counts = vec![0u64; law.len()];
        for _ in 0..100_000 {
            counts[s.sample(&mut r).get(0) as usize] += 1;
        }
        let res = chi_square_gof(&counts, &law).unwrap();
        assert!(res.passes(0.01), "{method:?}: {res:?}");
    }
}

#[test]
fn coalescence_time_is_exponential_in_two_site_liquid() {
    let one = RateFunction::rate_one();
    let x = cfg(&[0, 0]);
    let taus: Vec<f64> = (0..10_000u64)
        .map(|r| {
            let run = tagged_pair_simulate(&one, &x, 0, 1, &[50.0], derive(1, r), derive(2, r)).unwrap();
            run.tau.expect("coalesces well before the horizon")
        })
        .collect();
    let (mean, _, _) = mean_ci(&taus);
    // Exponential(1): standard deviation of the mean is 1/100.
    assert!((mean - 1.0).abs() <= 0.03, "mean tau {mean}");
}

#[test]
fn coalescence_is_exchangeable() {
    let rate = RateFunction::new(&[0.4, 0.8]).unwrap();
    let x = cfg(&[3, 0, 1, 0, 2]);
    let grid = [0.5, 1.0, 2.0, 4.0];
    let a = coalescence_tail(&rate, &x, 0, 3, &grid, 20_000, 5).unwrap();
    let b = coalescence_tail(&rate, &x, 3, 0, &grid, 20_000, 6).unwrap();
    for k in 0..grid.len() {
        let (p, q) = (a.survival[k], b.survival[k]);
        let pooled = 0.5 * (p + q);
        let se = (2.0 * pooled * (1.0 - pooled) / 20_000.0).sqrt().max(1e-9);
        assert!((p - q).abs() <= 4.0 * se, "t={}: {p} vs {q}", grid[k]);
    }
}

#[test]
fn survival_starts_at_one_and_decreases() {
    let tail = coalescence_tail(
        &RateFunction::rate_one(),
        &cfg(&[2, 0, 1]),
        0,
        1,
        &[0.0, 0.5, 1.0, 3.0],
        500,
        8,
    )
    .unwrap();
    assert_eq!(tail.survival[0], 1.0);
    assert!(tail.survival.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn path_bound_dominates_exact_tv() {
    let rate = RateFunction::new(&[0.5]).unwrap();
    let chain = ExactChain::new(&rate, 3, 3).unwrap();
    let x = cfg(&[3, 0, 0]);
    let y = cfg(&[1, 1, 1]);
    for t in [1.0, 3.0, 6.0] {
        let px = chain.law_at(&x, t).unwrap();
        let py = chain.law_at(&y, t).unwrap();
        let exact: f64 = 0.5 * px.iter().zip(&py).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let reps = 20_000;
        let report = path_coupling_bound(&rate, &x, &y, t, reps, 12).unwrap();
        assert_eq!(report.path_length, 2);
        let var: f64 = report
            .edges
            .iter()
            .map(|e| e.survival * (1.0 - e.survival) / reps as f64)
            .sum();
        assert!(report.bound + 3.0 * var.sqrt() >= exact, "t={t}: {} < {exact}", report.bound);
    }
}

#[test]
fn adjacent_configurations_use_one_edge() {
    let rate = RateFunction::rate_one();
    let x = cfg(&[2, 1, 0]);
    let y = cfg(&[1, 1, 1]);
    let report = path_coupling_bound(&rate, &x, &y, 1.0, 2000, 3).unwrap();
    assert_eq!(report.path_length, 1);
    assert_eq!(report.edges.len(), 1);
    assert_eq!((report.edges[0].from, report.edges[0].to), (0, 2));
    assert_eq!(report.bound, report.edges[0].survival);
}

#[test]
fn dirac_start_is_far_from_equilibrium_early() {
    let one = RateFunction::rate_one();
    let n = 400;
    let x0 = OccupancyConfig::dirac(n, n as u64).unwrap();
    let early: Vec<u64> = (0..200u64)
        .map(|r| Statistic::MaxOccupancy.eval(&state_at(SimulatorKind::Fast, &one, &x0, 0.2 * n as f64, r)))
        .collect();
    let reference: Vec<u64> = (0..500u64)
        .map(|s| Statistic::MaxOccupancy.eval(&sample_pi(&one, n, n as u64, 10_000 + s).unwrap()))
        .collect();
    let est = tv_lower_bound(&early, &Reference::Samples(reference), 1).unwrap();
    assert!(est.estimate > 0.99, "{est:?}");
    assert!(est.ci_low <= est.estimate && est.estimate <= est.ci_high);
}

#[test]
fn exact_reference_for_statistic() {
    // Max occupancy of π on n=3, m=3 under rate one (uniform on 10 states).
    let law = DiscreteDist::new(vec![0.0, 0.1, 0.6, 0.3], 0.0).unwrap();
    let one = RateFunction::rate_one();
    let samples: Vec<u64> = (0..4000u64)
        .map(|s| Statistic::MaxOccupancy.eval(&sample_pi(&one, 3, 3, s).unwrap()))
        .collect();
    let est = tv_lower_bound(&samples, &Reference::Exact(law), 2).unwrap();
    assert!(est.estimate < 0.03, "{est:?}");
}

#[test]
fn liquid_hydro_error_is_small() {
    let one = RateFunction::rate_one();
    let profile = Profile::liquid(1.0).unwrap();
    let n = 1000;
    let x0 = zrp_core::experiment::profile_config(n, n as u64, &[]).unwrap();
    let grid = [0.0, 0.5, 1.0];
    let run = hydro_run(&one, &profile, &x0, &grid, 3, SimulatorKind::Fast, 2).unwrap();
    for rep in &run.replicas {
        assert!(rep.sup_error < 0.03, "{}", rep.sup_error);
    }
}

#[test]
fn late_hydro_error_is_max_occupancy() {
    let one = RateFunction::rate_one();
    let profile = Profile::condensed(1.0).unwrap();
    let t1 = HydroSolution::new(&one, &profile).mixing_prediction();
    let n = 1000;
    let x0 = OccupancyConfig::dirac(n, n as u64).unwrap();
    let grid = [2.0 * t1, 2.5 * t1];
    let run = hydro_run(&one, &profile, &x0, &grid, 3, SimulatorKind::Fast, 4).unwrap();
    for rep in &run.replicas {
        for row in &rep.rows {
            let max = row.sites[0].max(row.rest_max);
            assert_eq!(row.error, max);
            assert!(row.error < 0.05);
        }
    }
}
