//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line per criterion and exits nonzero if any failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use zrp_core::coupling::tagged_pair_simulate;
use zrp_core::equilibrium::{equilibrium_profile_check, ExactChain, Statistic};
use zrp_core::experiment::{cutoff_curve, hydro_run, profile_config};
use zrp_core::hydro::{f_ode, gamma, phi, HydroSolution, Profile};
use zrp_core::seeding::derive;
use zrp_core::sim::{state_at, MonotonePair, SimulatorKind};
use zrp_core::stats::chi_square_gof;
use zrp_core::{OccupancyConfig, RateFunction};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn one() -> RateFunction {
    RateFunction::rate_one()
}

fn half() -> RateFunction {
    RateFunction::new(&[0.5]).unwrap()
}

fn cfg(v: &[u32]) -> OccupancyConfig {
    OccupancyConfig::new(v.to_vec()).unwrap()
}

fn criterion_1() -> Outcome {
    let r = one();
    let mut worst_psi = 0.0f64;
    for k in 0..=100 {
        let s = k as f64 / 10.0;
        let err = (r.psi_inv(s).unwrap() - s / (1.0 + s)).abs();
        worst_psi = worst_psi.max(err);
    }
    check(worst_psi <= 1e-10, format!("psi_inv error {worst_psi:e}"))?;
    let mut worst_phi = 0.0f64;
    for k in 0..=300 {
        let t = k as f64 / 100.0;
        let err = (phi(&r, t).unwrap() - (t + t * t / 2.0)).abs();
        worst_phi = worst_phi.max(err);
    }
    check(worst_phi <= 1e-8, format!("phi error {worst_phi:e}"))?;
    let g = gamma(&r, 1.0).unwrap();
    check((g - 1.5).abs() <= 1e-8, format!("gamma(1) = {g}"))?;
    Ok(format!("psi_inv err {worst_psi:.1e}, phi err {worst_phi:.1e}, gamma(1) = {g}"))
}

fn criterion_2() -> Outcome {
    let cases = [
        ("rate-one u=(1)", one(), vec![1.0], 1.0),
        ("rate-one u=(0.5,0.5)", one(), vec![0.5, 0.5], 1.0),
        ("head=[0.5] u=(0.8,0.3)", half(), vec![0.8, 0.3], 1.5),
    ];
    let mut report = Vec::new();
    for (name, rate, u, rho) in cases {
        let profile = Profile::new(u, rho).unwrap();
        let s = HydroSolution::new(&rate, &profile);
        let g = s.gamma();
        let grid: Vec<f64> = (0..=4000).map(|k| 2.0 * g * k as f64 / 4000.0).collect();
        let ode = f_ode(&rate, &profile, &grid).unwrap();
        let sup = grid
            .iter()
            .zip(&ode)
            .map(|(&t, &v)| (s.f(t) - v).abs())
            .fold(0.0, f64::max);
        check(sup <= 1e-5, format!("{name}: sup |explicit - ode| = {sup:e}"))?;
        report.push(format!("{sup:.1e}"));
    }
    let s = HydroSolution::new(&one(), &Profile::condensed(1.0).unwrap());
    let analytic = (0..=1500)
        .map(|k| {
            let t = k as f64 / 1000.0;
            (s.f(t) - ((1.0 + 2.0 * t).sqrt() - 1.0)).abs()
        })
        .fold(0.0, f64::max);
    check(analytic <= 1e-6, format!("analytic error {analytic:e}"))?;
    Ok(format!("sup errors [{}], analytic {analytic:.1e}", report.join(", ")))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for (rate, rho) in [(one(), 1.0), (one(), 2.0), (half(), 1.5)] {
        let s = HydroSolution::new(&rate, &Profile::condensed(rho).unwrap());
        worst = worst.max((s.mixing_prediction() - gamma(&rate, rho).unwrap()).abs());
    }
    check(worst <= 1e-9, format!("u=(rho) vs gamma: {worst:e}"))?;
    let two = HydroSolution::new(&one(), &Profile::new(vec![0.5, 0.5], 1.0).unwrap());
    let p = two.mixing_prediction();
    check((p - 0.75).abs() <= 1e-9, format!("two-block prediction {p}"))?;
    let liquid = HydroSolution::new(&one(), &Profile::liquid(1.0).unwrap());
    check(liquid.mixing_prediction() == 0.0, "liquid prediction nonzero".into())?;
    Ok(format!("u=(rho) err {worst:.1e}, two-block {p}, liquid 0"))
}

fn criterion_4() -> Outcome {
    let chain = ExactChain::new(&one(), 2, 1).unwrap();
    let x0 = cfg(&[1, 0]);
    let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
    let tv = chain.tv_curve(&x0, &grid).unwrap();
    let err = grid
        .iter()
        .zip(&tv)
        .map(|(&t, &v)| (v - 0.5 * (-t).exp()).abs())
        .fold(0.0, f64::max);
    check(err <= 1e-10, format!("exact TV error {err:e}"))?;
    let tmix = chain.tmix(&x0, 0.25).unwrap();
    check((tmix - 2f64.ln()).abs() <= 1e-8, format!("tmix = {tmix}"))?;
    let replicas = 100_000u64;
    let mut worst_sigma = 0.0f64;
    for (k, &t) in [0.25, 0.5, 1.0, 2.0].iter().enumerate() {
        let stay = (0..replicas)
            .filter(|&r| {
                let x = state_at(SimulatorKind::Fast, &one(), &x0, t, derive(4000 + k as u64, r));
                x.get(0) == 1
            })
            .count() as f64;
        let p = stay / replicas as f64;
        let exact = 0.5 * (-t).exp();
        let p_exact = 0.5 + exact;
        let sigma = (p_exact * (1.0 - p_exact) / replicas as f64).sqrt();
        let z = ((p - 0.5).abs() - exact).abs() / sigma;
        check(z <= 3.0, format!("t={t}: empirical TV {} vs {exact} ({z:.2} sigma)", (p - 0.5).abs()))?;
        worst_sigma = worst_sigma.max(z);
    }
    Ok(format!("TV err {err:.1e}, tmix - ln2 = {:.1e}, MC worst {worst_sigma:.2} sigma", tmix - 2f64.ln()))
}

fn chi_square_law(
    chain: &ExactChain,
    law: &[f64],
    replicas: u64,
    mut draw: impl FnMut(u64) -> OccupancyConfig,
) -> f64 {
    let mut counts = vec![0u64; chain.len()];
    for r in 0..replicas {
        counts[chain.index_of(&draw(r)).unwrap()] += 1;
    }
    chi_square_gof(&counts, law).unwrap().p_value
}

fn criterion_5() -> Outcome {
    let mut report = Vec::new();
    let x0 = cfg(&[3, 0, 0]);
    for (name, rate) in [("rate-one", one()), ("head=[0.5]", half())] {
        let chain = ExactChain::new(&rate, 3, 3).unwrap();
        let law = chain.law_at(&x0, 1.0).unwrap();
        for (kind, tag) in [(SimulatorKind::Fast, 50u64), (SimulatorKind::Graphical, 51)] {
            let p = chi_square_law(&chain, &law, 100_000, |r| {
                state_at(kind, &rate, &x0, 1.0, derive(tag, r))
            });
            check(p >= 0.01, format!("{name} {kind:?}: p = {p:.4}"))?;
            report.push(format!("{name}/{kind:?} p={p:.3}"));
        }
    }
    Ok(report.join(", "))
}

fn criterion_6() -> Outcome {
    use rand::Rng;
    let rates = [one(), RateFunction::new(&[0.3, 0.6, 0.9]).unwrap()];
    let mut rng = zrp_core::seeding::rng(6);
    let mut total_events = 0u64;
    let mut violations = 0u64;
    for p in 0..1000u64 {
        let n = 50;
        let lower: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let upper: Vec<u32> = lower.iter().map(|&v| v + rng.gen_range(0..3)).collect();
        let rate = &rates[(p % 2) as usize];
        let mut pair = MonotonePair::new(rate, cfg(&lower), cfg(&upper), derive(60, p)).unwrap();
        pair.advance_to(5.0);
        violations += pair.order_violations();
        total_events += pair.events();
        check(pair.lower().le(pair.upper()), format!("pair {p} unordered at horizon"))?;
    }
    check(violations == 0, format!("{violations} order violations"))?;
    Ok(format!("1000 pairs, {total_events} events, 0 violations"))
}

fn criterion_7() -> Outcome {
    let mut report = Vec::new();
    let x = cfg(&[1, 1, 0]);
    for (name, rate) in [("rate-one", one()), ("head=[0.5]", half())] {
        let mut start = x.clone();
        start.add_particle(0);
        let chain = ExactChain::new(&rate, 3, 3).unwrap();
        let law = chain.law_at(&start, 1.0).unwrap();
        let p = chi_square_law(&chain, &law, 100_000, |r| {
            let s = derive(70, r);
            let run = tagged_pair_simulate(&rate, &x, 0, 2, &[1.0], derive(s, 0), derive(s, 1)).unwrap();
            run.tagged_config_i()
        });
        check(p >= 0.01, format!("{name}: p = {p:.4}"))?;
        report.push(format!("{name} p={p:.3}"));
    }
    Ok(report.join(", "))
}

fn criterion_8() -> Outcome {
    let rate = one();
    let profile = Profile::condensed(1.0).unwrap();
    let grid: Vec<f64> = (0..=120).map(|k| k as f64 / 40.0).collect();
    let mut medians = Vec::new();
    for n in [200usize, 800, 3200] {
        let x0 = profile_config(n, n as u64, profile.u()).unwrap();
        let run = hydro_run(&rate, &profile, &x0, &grid, 10, SimulatorKind::Fast, 8).unwrap();
        medians.push(run.median_sup_error());
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    check(decreasing, format!("medians not decreasing: {medians:?}"))?;
    check(medians[2] <= 0.1, format!("median at n=3200 is {}", medians[2]))?;
    Ok(format!("median sup-error n=200/800/3200: {:.4} / {:.4} / {:.4}", medians[0], medians[1], medians[2]))
}

fn criterion_9() -> Outcome {
    let rate = one();
    let g = gamma(&rate, 1.0).unwrap();
    let grid: Vec<f64> = (0..=180).map(|k| k as f64 / 80.0).collect();
    let mut curves = Vec::new();
    for n in [500usize, 2000] {
        let x0 = OccupancyConfig::dirac(n, n as u64).unwrap();
        let c = cutoff_curve(
            &rate,
            &x0,
            &grid,
            400,
            2000,
            Statistic::MaxOccupancy,
            0,
            SimulatorKind::Fast,
            9,
        )
        .unwrap();
        curves.push(c);
    }
    let mut lines = Vec::new();
    for c in &curves {
        let at = c.estimate_at(0.8 * g).ok_or("0.8 gamma not on grid")?;
        check(at >= 0.9, format!("n={}: lb at 0.8 gamma = {at}", c.n))?;
        lines.push(format!("n={} lb(0.8g)={at:.3}", c.n));
    }
    let cross = curves[1].crossing(0.5).ok_or("n=2000 never crosses 1/2")?;
    check(
        (0.8 * g..=1.25 * g).contains(&cross),
        format!("n=2000 crossing {cross} outside [{}, {}]", 0.8 * g, 1.25 * g),
    )?;
    let w500 = curves[0].window(0.9, 0.1).ok_or("n=500 window undefined")?;
    let w2000 = curves[1].window(0.9, 0.1).ok_or("n=2000 window undefined")?;
    check(w2000 < w500, format!("window n=2000 {w2000} not below n=500 {w500}"))?;
    Ok(format!(
        "{}, crossing(n=2000) = {cross:.3} (gamma {g}), windows {w500:.3} -> {w2000:.3}",
        lines.join(", ")
    ))
}

fn criterion_10() -> Outcome {
    let n = 5000;
    let c = equilibrium_profile_check(&one(), n, n as u64, 20, 10).map_err(|e| e.to_string())?;
    let good = c.distances.iter().filter(|&&d| d <= 0.02).count();
    check(good >= 18, format!("only {good}/20 samples within 0.02: {:?}", c.distances))?;
    let cap = 8.0 * (n as f64).log2();
    let worst = c.max_occupancies.iter().copied().max().unwrap();
    check((worst as f64) <= cap, format!("max occupancy {worst} above {cap}"))?;
    Ok(format!("{good}/20 within 0.02 (mean {:.4}), max occupancy {worst} <= {cap:.1}", c.mean))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 10] = [
        (1, "rate-one closed forms", criterion_1, Duration::from_secs(1)),
        (2, "hydrodynamic uniqueness cross-check", criterion_2, Duration::from_secs(10)),
        (3, "prediction formulas", criterion_3, Duration::from_secs(1)),
        (4, "exact oracle", criterion_4, Duration::from_secs(30)),
        (5, "simulator equivalence", criterion_5, Duration::from_secs(120)),
        (6, "monotone coupling", criterion_6, Duration::from_secs(60)),
        (7, "tagged-particle superposition", criterion_7, Duration::from_secs(120)),
        (8, "hydrodynamic convergence trend", criterion_8, Duration::from_secs(600)),
        (9, "cutoff trend", criterion_9, Duration::from_secs(900)),
        (10, "equilibrium profile", criterion_10, Duration::from_secs(300)),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (id, name, run, budget) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run)
            .unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; over budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {id:>2} ({name}) [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id:>2} ({name}) [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
