use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smanbo::config::{parse_config, render_config, ExperimentSpec};
use smanbo::mapfile::{save_map, MapFile};
use smanbo::{run_experiment, Error, PlannerKind};
use smanbo_core::worldgen::generate_forest;

/// Multi-agent target tracking experiments with sequential nominal
/// belief-state planning.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write logs, summary and ECDFs.
    Run(Overrides),
    /// Print the effective configuration as TOML.
    Config(Overrides),
    /// Generate one forest and write it as a map file.
    Map {
        #[arg(long, default_value_t = 45.0)]
        lambda: f64,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// AOI width, m.
        #[arg(long, default_value_t = 150.0)]
        width: f64,
        /// AOI height, m.
        #[arg(long, default_value_t = 100.0)]
        height: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Flags override the config file, which overrides the defaults.
///
/// Defaults: seed 0, 1 map, out `results`, planner sma-nbo, horizon 3,
/// lambda 45, radius 5, duration 60 s, 50 MCR samples, MWTP off. Run
/// `smanbo config` for the complete list.
#[derive(Args)]
struct Overrides {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Planner(s): sma-nbo, sma-nbo-mwtp, dec-pomdp, mcr.
    #[arg(long, value_delimiter = ',')]
    planner: Option<Vec<PlannerKind>>,
    #[arg(long, value_delimiter = ',')]
    horizon: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    radius: Option<Vec<f64>>,
    /// Maps per (lambda, radius) cell.
    #[arg(long)]
    maps: Option<usize>,
    /// Trial length, s.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add the MWTP terminal cost to every planner.
    #[arg(long)]
    mwtp: bool,
    #[arg(long)]
    mcr_samples: Option<usize>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    workers: Option<usize>,
    /// Record zero planner time so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

impl Overrides {
    fn resolve(self) -> Result<ExperimentSpec, Error> {
        let mut spec = match &self.config {
            Some(path) => parse_config(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(v) = self.seed {
            spec.seed = v;
        }
        if let Some(v) = self.planner {
            spec.sweep.planner = Some(v);
        }
        if let Some(v) = self.horizon {
            spec.sweep.horizon = Some(v);
        }
        if let Some(v) = self.lambda {
            spec.sweep.lambda = Some(v);
        }
        if let Some(v) = self.radius {
            spec.sweep.radius = Some(v);
        }
        if let Some(v) = self.maps {
            spec.maps = v;
        }
        if let Some(v) = self.duration {
            spec.scenario.duration = v;
        }
        if let Some(v) = self.out {
            spec.out = v;
        }
        if self.mwtp {
            spec.scenario.mwtp = true;
        }
        if let Some(v) = self.mcr_samples {
            spec.scenario.mcr_samples = v;
        }
        if let Some(v) = self.workers {
            spec.workers = v;
        }
        if self.no_timing {
            spec.record_timing = false;
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(o) => o.resolve().and_then(|spec| {
            let done = run_experiment(&spec)?;
            println!("{} trials, summary in {}", done.trials.len(), done.summary_path.display());
            Ok(())
        }),
        Command::Config(o) => o.resolve().map(|spec| print!("{}", render_config(&spec))),
        Command::Map { lambda, radius, seed, width, height, out } => smanbo_core::Aoi::new(width, height)
            .and_then(|aoi| generate_forest(lambda, radius, &aoi, &mut ChaCha8Rng::seed_from_u64(seed)))
            .map_err(Error::from)
            .and_then(|forest| {
                let n = forest.len();
                save_map(&out, &MapFile { lambda, radius, seed, forest })?;
                println!("{n} trees written to {}", out.display());
                Ok(())
            }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
