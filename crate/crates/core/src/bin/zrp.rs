use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use zrp_core::experiment::{self, ExperimentConfig, ExperimentKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Hydro,
    Cutoff,
    Coalescence,
    Equilibrium,
    Exact,
    Predict,
}

impl From<Experiment> for ExperimentKind {
    fn from(e: Experiment) -> Self {
        match e {
            Experiment::Hydro => ExperimentKind::Hydro,
            Experiment::Cutoff => ExperimentKind::Cutoff,
            Experiment::Coalescence => ExperimentKind::Coalescence,
            Experiment::Equilibrium => ExperimentKind::Equilibrium,
            Experiment::Exact => ExperimentKind::Exact,
            Experiment::Predict => ExperimentKind::Predict,
        }
    }
}

/// Mean-field zero-range process experiments.
#[derive(Debug, Parser)]
#[command(name = "zrp", version)]
struct Cli {
    experiment: Experiment,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Root seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `out` in the config (default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match ExperimentConfig::from_file(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("zrp: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let out = cli
        .out
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let base = cli.config.parent().map(|p| p.to_path_buf());
    match experiment::run(cli.experiment.into(), &config, base.as_deref(), &out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("zrp: {e}");
            ExitCode::FAILURE
        }
    }
}
