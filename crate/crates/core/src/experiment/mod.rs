//! Reproducible experiment runner behind the `zrp` binary. Every run is a
//! pure function of its configuration (which includes the seed); outputs
//! are CSV files each paired with a `.meta.json` sidecar, plus JSON reports.

mod config;
mod output;
mod run;

pub use config::{profile_config, ExperimentConfig, ExperimentKind, Start};
pub use output::Metadata;
pub use run::{cutoff_curve, hydro_run, CutoffCurve, HydroReplica, HydroRow, HydroRun};

use std::path::{Path, PathBuf};

use serde_json::json;

use crate::coupling::{coalescence_tail, path_coupling_bound};
use crate::equilibrium::{equilibrium_profile_check, ExactChain};
use crate::error::{Result, ZrpError};
use crate::hydro::{f_ode, HydroSolution, PredictionReport, Profile};
use crate::stats::mean_ci;
use crate::OccupancyConfig;
use output::{columns, Writer};

fn fmt(v: f64) -> String {
    v.to_string()
}

/// Runs `kind` and returns the paths written under `out`. Relative rate
/// files resolve against `base_dir`.
pub fn run(
    kind: ExperimentKind,
    config: &ExperimentConfig,
    base_dir: Option<&Path>,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let seed = config.seed()?;
    let rate = config.rate_function(base_dir)?;
    let mut w = Writer::new(out, kind, seed, &rate, config)?;
    match kind {
        ExperimentKind::Hydro => run_hydro(&mut w)?,
        ExperimentKind::Cutoff => run_cutoff(&mut w)?,
        ExperimentKind::Coalescence => run_coalescence(&mut w)?,
        ExperimentKind::Equilibrium => run_equilibrium(&mut w)?,
        ExperimentKind::Exact => run_exact(&mut w)?,
        ExperimentKind::Predict => run_predict(&mut w)?,
    }
    Ok(w.written)
}

fn limit_extra(solution: &HydroSolution) -> serde_json::Value {
    json!({
        "gamma": solution.gamma(),
        "rho_k": solution.rho_seq(),
        "t_k": solution.t_seq(),
        "prediction": solution.mixing_prediction(),
    })
}

fn run_hydro(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let profile = cfg.hydro_profile()?;
    let grid = cfg.time_grid()?;
    let solution = HydroSolution::new(w.rate, &profile);
    let l = profile.len();
    let extra = limit_extra(&solution);

    let mut header = columns(&["t_over_n", "f"]);
    header.extend((1..=l).map(|k| format!("limit_{k}")));
    let limit_rows = grid.iter().map(|&t| {
        let mut row = vec![fmt(t), fmt(solution.f(t))];
        row.extend((1..=l).map(|k| fmt(solution.solid_site(k, t))));
        row
    });
    w.csv("hydro_limit.csv", &header, limit_rows, extra.clone())?;

    let mut runs = Vec::new();
    for &n in cfg.sizes()? {
        let x0 = profile_config(n, cfg.particles(n)?, profile.u())?;
        runs.push(hydro_run(w.rate, &profile, &x0, &grid, cfg.replicas, cfg.simulator, w.seed)?);
    }

    let mut header = columns(&["n", "replica", "t_over_n", "error", "rest_max"]);
    header.extend((1..=l).map(|k| format!("site_{k}")));
    let rows = runs.iter().flat_map(|run| {
        run.replicas.iter().enumerate().flat_map(move |(r, rep)| {
            rep.rows.iter().map(move |row| {
                let mut out = vec![
                    run.n.to_string(),
                    r.to_string(),
                    fmt(row.t_over_n),
                    fmt(row.error),
                    fmt(row.rest_max),
                ];
                out.extend(row.sites.iter().map(|&v| fmt(v)));
                out
            })
        })
    });
    w.csv("hydro.csv", &header, rows, extra.clone())?;

    let header = columns(&["n", "m", "median_sup_error", "mean_sup_error", "ci_low", "ci_high"]);
    let rows = runs.iter().map(|run| {
        let sups: Vec<f64> = run.replicas.iter().map(|r| r.sup_error).collect();
        let (mean, lo, hi) = mean_ci(&sups);
        (run.n, run.m, run.median_sup_error(), mean, lo, hi)
    });
    w.csv("hydro_summary.csv", &header, rows, extra)?;
    Ok(())
}

fn run_cutoff(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let grid = cfg.time_grid()?;
    let rho = cfg.density()?;
    let profile = match cfg.start {
        Start::Dirac => Some(Profile::condensed(rho)?),
        Start::Profile => Some(cfg.hydro_profile()?),
        Start::Config(_) => None,
    };
    let solution = profile.as_ref().map(|p| HydroSolution::new(w.rate, p));
    let gamma = crate::hydro::gamma(w.rate, rho)?;
    let extra = json!({
        "gamma": gamma,
        "prediction": solution.as_ref().map(|s| s.mixing_prediction()),
        "statistic": cfg.statistic,
        "replicas": cfg.replicas,
        "pi_samples": cfg.pi_samples,
    });
    let mut curves = Vec::new();
    for &n in cfg.sizes()? {
        let x0 = cfg.initial_config(n)?;
        curves.push(cutoff_curve(
            w.rate,
            &x0,
            &grid,
            cfg.replicas,
            cfg.pi_samples,
            cfg.statistic,
            cfg.exact_max_states,
            cfg.simulator,
            w.seed,
        )?);
    }
    let header = columns(&["n", "t_over_n", "tv_lb", "ci_low", "ci_high", "tv_exact"]);
    let rows = curves.iter().flat_map(|c| {
        c.t_over_n.iter().enumerate().map(move |(k, &t)| {
            let lb = c.tv_lb[k];
            vec![
                c.n.to_string(),
                fmt(t),
                fmt(lb.estimate),
                fmt(lb.ci_low),
                fmt(lb.ci_high),
                c.tv_exact.as_ref().map(|e| fmt(e[k])).unwrap_or_default(),
            ]
        })
    });
    w.csv("cutoff.csv", &header, rows, extra.clone())?;

    let header = columns(&["n", "m", "crossing_0.9", "crossing_0.5", "crossing_0.1", "window"]);
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    let rows = curves.iter().map(|c| {
        vec![
            c.n.to_string(),
            c.m.to_string(),
            opt(c.crossing(0.9)),
            opt(c.crossing(0.5)),
            opt(c.crossing(0.1)),
            opt(c.window(0.9, 0.1)),
        ]
    });
    w.csv("cutoff_summary.csv", &header, rows, extra)?;
    Ok(())
}

fn run_coalescence(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let grid = cfg.time_grid()?;
    let (i, j) = cfg.tags.unwrap_or((0, 1));
    for &n in cfg.sizes()? {
        let x = cfg.initial_config(n)?;
        let seed = crate::seeding::derive(w.seed, n as u64);
        let tail = coalescence_tail(w.rate, &x, i, j, &grid, cfg.replicas, seed)?;
        let extra = json!({
            "n": n,
            "m": x.m(),
            "tags": [i, j],
            "replicas": cfg.replicas,
            "censored_fraction": tail.censored_fraction,
        });
        let cols = columns(&["t", "survival", "ci_low", "ci_high", "censored_fraction"]);
        w.raw_csv(&format!("coalescence_n{n}.csv"), cols, extra, |f| tail.write_csv(f))?;
        if let Some(target) = &cfg.target {
            let y = OccupancyConfig::new(target.clone())?;
            let horizon = *grid.last().expect("nonempty grid");
            let report = path_coupling_bound(
                w.rate,
                &x,
                &y,
                horizon,
                cfg.replicas,
                crate::seeding::derive(seed, 1),
            )?;
            w.json(&format!("path_coupling_n{n}.json"), &report)?;
        }
    }
    Ok(())
}

fn run_equilibrium(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let mut checks = Vec::new();
    for &n in cfg.sizes()? {
        let m = cfg.particles(n)?;
        let seed = crate::seeding::derive(w.seed, n as u64);
        checks.push(equilibrium_profile_check(w.rate, n, m, cfg.pi_samples, seed)?);
    }
    let extra = json!({ "pi_samples": cfg.pi_samples });
    let header = columns(&["n", "m", "sample", "distance", "max_occupancy"]);
    let rows = checks.iter().flat_map(|c| {
        c.distances
            .iter()
            .zip(&c.max_occupancies)
            .enumerate()
            .map(move |(s, (&d, &mx))| (c.n, c.m, s, d, mx))
    });
    w.csv("equilibrium.csv", &header, rows, extra.clone())?;
    let header = columns(&["n", "m", "mean_distance", "ci_low", "ci_high", "max_occupancy"]);
    let rows = checks.iter().map(|c| {
        let mx = c.max_occupancies.iter().copied().max().unwrap_or(0);
        (c.n, c.m, c.mean, c.ci_low, c.ci_high, mx)
    });
    w.csv("equilibrium_summary.csv", &header, rows, extra)?;
    Ok(())
}

fn run_exact(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let grid = cfg.time_grid()?;
    for &n in cfg.sizes()? {
        let x0 = cfg.initial_config(n)?;
        let chain = ExactChain::new(w.rate, n, x0.m())?;
        let tv = chain.tv_curve(&x0, &grid)?;
        let tmix = cfg
            .eps
            .iter()
            .map(|&eps| Ok(json!({ "eps": eps, "tmix": chain.tmix(&x0, eps)? })))
            .collect::<Result<Vec<_>>>()?;
        let extra = json!({
            "n": n,
            "m": x0.m(),
            "states": chain.len(),
            "start": x0.occupancies(),
            "tmix": tmix,
        });
        w.csv(
            &format!("exact_tv_n{n}.csv"),
            &columns(&["t", "tv"]),
            grid.iter().zip(&tv).map(|(&t, &v)| (t, v)),
            extra.clone(),
        )?;
        w.json(&format!("exact_n{n}.json"), &extra)?;
        if cfg.dump {
            let dir = w.dir.clone();
            let open = |name: &str| -> Result<std::io::BufWriter<std::fs::File>> {
                Ok(std::io::BufWriter::new(std::fs::File::create(dir.join(name))?))
            };
            let names = [
                format!("states_n{n}.csv"),
                format!("stationary_n{n}.csv"),
                format!("generator_n{n}.csv"),
            ];
            chain.dump_csv(open(&names[0])?, open(&names[1])?, open(&names[2])?)?;
            w.written.extend(names.iter().map(|s| dir.join(s)));
        }
    }
    Ok(())
}

fn run_predict(w: &mut Writer) -> Result<()> {
    let cfg = w.config;
    let profile = cfg.hydro_profile()?;
    let solution = HydroSolution::new(w.rate, &profile);
    let report = PredictionReport::from(&solution);
    w.json("predict.json", &report)?;
    if cfg.grid.is_some() || cfg.horizon.is_some() {
        let grid = cfg.time_grid()?;
        let ode = f_ode(w.rate, &profile, &grid)?;
        let l = profile.len();
        let mut header = columns(&["t_over_n", "f", "f_ode"]);
        header.extend((1..=l).map(|k| format!("limit_{k}")));
        let rows = grid.iter().zip(&ode).map(|(&t, &o)| {
            let mut row = vec![fmt(t), fmt(solution.f(t)), fmt(o)];
            row.extend((1..=l).map(|k| fmt(solution.solid_site(k, t))));
            row
        });
        w.csv("f.csv", &header, rows, limit_extra(&solution))?;
    }
    Ok(())
}

impl std::str::FromStr for ExperimentKind {
    type Err = ZrpError;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| ZrpError::InvalidConfig(format!("unknown experiment `{s}`")))
    }
}
