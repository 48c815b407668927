//! Batch experiments over (lambda, radius) cells, horizons and planners.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use smanbo_core::metrics::ecdf;
use smanbo_core::worldgen::generate_forest;
use smanbo_core::ScenarioConfig;

use crate::config::ExperimentSpec;
use crate::error::{Error, Result};
use crate::mapfile::{load_map, save_map, MapFile};
use crate::output::{sig9, to_bytes, write_epoch_csv, write_trial_csv};
use crate::sim::{run_scenario, PlannerKind, Scenario, Timing};

const MAP_DOMAIN: u64 = 0x6d61_7073;
const TRIAL_DOMAIN: u64 = 0x7472_6961;

/// SplitMix64 finalizer, used to derive independent seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `parts`-indexed child of `master`.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

fn cell_name(lambda: f64, radius: f64) -> String {
    format!("lam{lambda}_r{radius}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub lambda: f64,
    pub radius: f64,
    pub maps: Vec<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub id: usize,
    pub cell: usize,
    pub planner: PlannerKind,
    pub horizon: usize,
    pub map_index: usize,
    pub seed: u64,
}

/// One summary row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: usize,
    pub planner: PlannerKind,
    pub horizon: usize,
    pub lambda: f64,
    pub radius: f64,
    pub map: String,
    pub seed: u64,
    pub mean_ospa: f64,
    pub median_ospa: f64,
    pub frac_below_1m: f64,
    pub mean_plan_ms: f64,
    /// Every OSPA sample of the trial, kept for the ECDF files.
    pub ospa: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub cells: Vec<Cell>,
    pub trials: Vec<TrialSummary>,
    pub summary_path: PathBuf,
}

/// Generates (once) and saves the forests of every cell.
pub fn prepare_maps(spec: &ExperimentSpec) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    for lambda in spec.lambdas() {
        for radius in spec.radii() {
            let index = cells.len();
            let dir = spec.out.join("maps").join(cell_name(lambda, radius));
            let mut maps = Vec::with_capacity(spec.maps);
            for m in 0..spec.maps {
                let seed = derive_seed(spec.seed, &[MAP_DOMAIN, index as u64, m as u64]);
                let forest = generate_forest(lambda, radius, &spec.scenario.aoi, &mut ChaCha8Rng::seed_from_u64(seed))
                    .map_err(|e| Error::Cell { lambda, radius, source: Box::new(e.into()) })?;
                let path = dir.join(format!("map_{m:03}.txt"));
                save_map(&path, &MapFile { lambda, radius, seed, forest })?;
                maps.push(path);
            }
            cells.push(Cell { index, lambda, radius, maps });
        }
    }
    Ok(cells)
}

/// Trial list in output order: cell, horizon, planner, map.
pub fn plan_trials(spec: &ExperimentSpec, cells: &[Cell]) -> Vec<TrialSpec> {
    let mut out = Vec::new();
    for cell in cells {
        for &horizon in &spec.horizons() {
            for &planner in &spec.planners() {
                for map_index in 0..cell.maps.len() {
                    out.push(TrialSpec {
                        id: out.len(),
                        cell: cell.index,
                        planner,
                        horizon,
                        map_index,
                        seed: derive_seed(spec.seed, &[TRIAL_DOMAIN, cell.index as u64, map_index as u64]),
                    });
                }
            }
        }
    }
    out
}

struct TrialOutput {
    summary: TrialSummary,
    trial_csv: Vec<u8>,
    epoch_csv: Vec<u8>,
    stem: String,
}

fn run_one(spec: &ExperimentSpec, cells: &[Cell], t: &TrialSpec) -> Result<TrialOutput> {
    let cell = &cells[t.cell];
    let wrap = |e: Error| Error::Cell {
        lambda: cell.lambda,
        radius: cell.radius,
        source: Box::new(e),
    };
    let map = load_map(&cell.maps[t.map_index])?;
    let config = ScenarioConfig {
        lambda: cell.lambda,
        tree_radius: cell.radius,
        horizon: t.horizon,
        ..spec.scenario.clone()
    };
    let timing = if spec.record_timing { Timing::Wall } else { Timing::Off };
    let scenario = Scenario::generate(&config, map.forest, t.seed).map_err(wrap)?;
    let log = run_scenario(&config, &scenario, t.planner, t.seed, timing).map_err(wrap)?;
    let map_rel = cell.maps[t.map_index]
        .strip_prefix(&spec.out)
        .unwrap_or(&cell.maps[t.map_index])
        .to_string_lossy()
        .replace('\\', "/");
    let stem = format!("{:04}_{}_H{}_{}_map{:03}", t.id, t.planner, t.horizon, cell_name(cell.lambda, cell.radius), t.map_index);
    Ok(TrialOutput {
        trial_csv: to_bytes(|b| write_trial_csv(&log, b))?,
        epoch_csv: to_bytes(|b| write_epoch_csv(&log, b))?,
        summary: TrialSummary {
            trial: t.id,
            planner: t.planner,
            horizon: t.horizon,
            lambda: cell.lambda,
            radius: cell.radius,
            map: map_rel,
            seed: t.seed,
            mean_ospa: log.mean_ospa(),
            median_ospa: log.median_ospa(),
            frac_below_1m: log.fraction_below(1.0),
            mean_plan_ms: log.mean_plan_ms(),
            ospa: log.ospa_values(),
        },
        stem,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs every trial of `spec` and writes the artifact set under `spec.out`:
/// `maps/`, `trials/*.csv`, `trials/*_epochs.csv`, `summary.csv` and
/// `ecdf/<cell>.csv`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let cells = prepare_maps(spec)?;
    let trials = plan_trials(spec, &cells);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::io(&spec.out, std::io::Error::other(e)))?;
    let outputs: Vec<Result<TrialOutput>> = pool.install(|| trials.par_iter().map(|t| run_one(spec, &cells, t)).collect());

    let trial_dir = spec.out.join("trials");
    let ecdf_dir = spec.out.join("ecdf");
    for dir in [&trial_dir, &ecdf_dir] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut summaries = Vec::with_capacity(outputs.len());
    for out in outputs {
        let out = out?;
        write(&trial_dir.join(format!("{}.csv", out.stem)), &out.trial_csv)?;
        write(&trial_dir.join(format!("{}_epochs.csv", out.stem)), &out.epoch_csv)?;
        summaries.push(out.summary);
    }

    let summary_path = spec.out.join("summary.csv");
    write(&summary_path, &summary_csv(&summaries)?)?;
    for cell in &cells {
        let path = ecdf_dir.join(format!("{}.csv", cell_name(cell.lambda, cell.radius)));
        write(&path, &ecdf_csv(spec, cell, &summaries)?)?;
    }
    Ok(ExperimentResult {
        cells,
        trials: summaries,
        summary_path,
    })
}

fn summary_csv(rows: &[TrialSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "trial",
        "planner",
        "horizon",
        "lambda",
        "radius",
        "map",
        "seed",
        "mean_ospa",
        "median_ospa",
        "frac_ospa_below_1m",
        "mean_plan_ms",
    ])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.planner.to_string(),
            r.horizon.to_string(),
            sig9(r.lambda),
            sig9(r.radius),
            r.map.clone(),
            r.seed.to_string(),
            sig9(r.mean_ospa),
            sig9(r.median_ospa),
            sig9(r.frac_below_1m),
            sig9(r.mean_plan_ms),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}

/// OSPA ECDF per (planner, horizon), pooled over the cell's maps.
fn ecdf_csv(spec: &ExperimentSpec, cell: &Cell, rows: &[TrialSummary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["planner", "horizon", "ospa", "frequency"])?;
    for &horizon in &spec.horizons() {
        for &planner in &spec.planners() {
            let pooled: Vec<f64> = rows
                .iter()
                .filter(|r| r.lambda == cell.lambda && r.radius == cell.radius && r.horizon == horizon && r.planner == planner)
                .flat_map(|r| r.ospa.iter().copied())
                .collect();
            if pooled.is_empty() {
                continue;
            }
            for (v, f) in ecdf(&pooled)? {
                w.write_record([planner.to_string(), horizon.to_string(), sig9(v), sig9(f)])?;
            }
        }
    }
    w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))
}
