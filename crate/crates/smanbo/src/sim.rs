//! Two-rate closed loop: sense and fuse every `dt_sense`, plan every
//! `dt_plan`, hold each agent's first action in between.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use smanbo_core::estimation::{fuse, ncv_model, ConsensusGraph, FleetBelief, Fusion, StateCov, StateVec, TargetTrack};
use smanbo_core::metrics::{ospa, OspaParams};
use smanbo_core::planning::{
    action_set, dec_pomdp_plan, extend_intent, mcr_plan, propagate_agent, sma_nbo_plan, Action, Hectg, IntentSet,
    PlanContext, PolicySeq,
};
use smanbo_core::sensing::{sense, AgentState, Truth};
use smanbo_core::worldgen::{generate_levy_trajectory, OcclusionForest, TargetState, TargetTrajectory};
use smanbo_core::{ScenarioConfig, TargetId, Vec2};

use crate::error::Result;

const TRUTH_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;
const SAMPLE_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    SmaNbo,
    SmaNboMwtp,
    DecPomdp,
    Mcr,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 4] = [PlannerKind::SmaNbo, PlannerKind::SmaNboMwtp, PlannerKind::DecPomdp, PlannerKind::Mcr];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::SmaNbo => "sma-nbo",
            PlannerKind::SmaNboMwtp => "sma-nbo-mwtp",
            PlannerKind::DecPomdp => "dec-pomdp",
            PlannerKind::Mcr => "mcr",
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        PlannerKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown planner `{s}` (expected sma-nbo, sma-nbo-mwtp, dec-pomdp or mcr)"))
    }
}

/// Whether planner wall-clock is measured. `Off` records zero so that logs
/// are byte-reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Wall,
    Off,
}

/// Everything a trial needs besides the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub forest: OcclusionForest,
    /// Ground truth sampled at `dt_sense`, `sense_steps() + 1` samples each.
    pub trajectories: Vec<TargetTrajectory>,
    pub agents: Vec<AgentState>,
}

impl Scenario {
    /// Levy-walk targets drawn from `seed` and agents spread along the
    /// horizontal midline of the AOI.
    pub fn generate(config: &ScenarioConfig, forest: OcclusionForest, seed: u64) -> Result<Self> {
        config.validate()?;
        forest.validate(&config.aoi)?;
        let mut rng = stream(seed, TRUTH_STREAM);
        let trajectories = (0..config.n_targets)
            .map(|i| generate_levy_trajectory(i as TargetId, config.duration, config.dt_sense, &config.levy, &config.aoi, &mut rng))
            .collect::<smanbo_core::Result<Vec<_>>>()?;
        Ok(Scenario {
            forest,
            trajectories,
            agents: initial_agents(config),
        })
    }
}

pub fn initial_agents(config: &ScenarioConfig) -> Vec<AgentState> {
    let n = config.agents.len();
    config
        .sensors()
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let x = config.aoi.width * (i + 1) as f64 / (n + 1) as f64;
            AgentState::at(Vec2::new(x, config.aoi.height / 2.0), s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetRecord {
    pub target_id: TargetId,
    pub truth: TargetState,
    pub estimate: StateVec,
    pub trace: f64,
}

/// State after one sense-and-fuse step.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseRecord {
    pub step: usize,
    pub t: f64,
    pub targets: Vec<TargetRecord>,
    pub agents: Vec<AgentState>,
    /// Observations received per target, summed over agents.
    pub detections: Vec<usize>,
    pub ospa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub t: f64,
    pub joint: Vec<PolicySeq>,
    pub executed: Vec<Action>,
    pub plan_ms: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub planner: PlannerKind,
    pub horizon: usize,
    pub seed: u64,
    pub sense: Vec<SenseRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl TrialLog {
    pub fn ospa_values(&self) -> Vec<f64> {
        self.sense.iter().map(|r| r.ospa).collect()
    }

    pub fn mean_ospa(&self) -> f64 {
        mean(&self.ospa_values())
    }

    pub fn median_ospa(&self) -> f64 {
        let mut v = self.ospa_values();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            (v[m - 1] + v[m]) / 2.0
        }
    }

    pub fn fraction_below(&self, threshold: f64) -> f64 {
        if self.sense.is_empty() {
            return 0.0;
        }
        self.sense.iter().filter(|r| r.ospa < threshold).count() as f64 / self.sense.len() as f64
    }

    pub fn mean_plan_ms(&self) -> f64 {
        mean(&self.epochs.iter().map(|e| e.plan_ms).collect::<Vec<_>>())
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// OSPA between estimated and true positions at every logged step.
pub fn trial_ospa_series(log: &TrialLog, params: &OspaParams) -> Vec<f64> {
    log.sense
        .iter()
        .map(|r| {
            let est: Vec<Vec2> = r.targets.iter().map(|t| Vec2::new(t.estimate[0], t.estimate[1])).collect();
            let truth: Vec<Vec2> = r.targets.iter().map(|t| t.truth.pos).collect();
            ospa(&est, &truth, params)
        })
        .collect()
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates the scenario for `seed` and runs it with wall-clock timing.
pub fn run_trial(config: &ScenarioConfig, forest: &OcclusionForest, planner: PlannerKind, seed: u64) -> Result<TrialLog> {
    let scenario = Scenario::generate(config, forest.clone(), seed)?;
    run_scenario(config, &scenario, planner, seed, Timing::Wall)
}

pub fn run_scenario(config: &ScenarioConfig, scenario: &Scenario, planner: PlannerKind, seed: u64, timing: Timing) -> Result<TrialLog> {
    config.validate()?;
    let params = config.ospa_params()?;
    let steps = config.sense_steps();
    let per_epoch = config.steps_per_epoch();
    let n_agents = scenario.agents.len();
    if n_agents != config.agents.len() {
        return Err(smanbo_core::Error::invalid("agents", "scenario and config disagree on the fleet size").into());
    }
    if scenario.trajectories.iter().any(|t| t.samples.len() <= steps) {
        return Err(smanbo_core::Error::invalid("duration", "trajectories are shorter than the trial").into());
    }

    let sense_model = ncv_model(config.dt_sense, config.sigma_a)?;
    let fusion = match config.consensus_steps {
        0 => Fusion::Exact,
        steps => Fusion::Consensus {
            steps,
            graph: ConsensusGraph::complete(n_agents),
        },
    };
    let actions = action_set(config.v_max, config.headings, config.speeds);
    let hectg = if planner == PlannerKind::SmaNboMwtp || config.mwtp {
        Hectg::Mwtp { beta: config.beta }
    } else {
        Hectg::None
    };
    let ctx = PlanContext {
        forest: &scenario.forest,
        model: ncv_model(config.dt_plan, config.sigma_a)?,
        actions: &actions,
        horizon: config.horizon,
        hectg,
        search: config.search,
    };
    let order: Vec<usize> = (0..n_agents).collect();
    let mut noise_rng = stream(seed, NOISE_STREAM);
    let mut sample_rng = stream(seed, SAMPLE_STREAM);

    let p0 = StateCov::from_diagonal(&config.initial_cov.into());
    let tracks = scenario
        .trajectories
        .iter()
        .map(|tr| {
            let s = tr.at(0);
            TargetTrack::new(tr.target_id, StateVec::new(s.pos.x, s.pos.y, 0.0, 0.0), p0)
        })
        .collect();
    let mut belief = FleetBelief::new(tracks, scenario.agents.clone(), 0.0)?;

    let mut log = TrialLog {
        planner,
        horizon: config.horizon,
        seed,
        sense: Vec::with_capacity(steps),
        epochs: Vec::with_capacity(steps / per_epoch + 1),
    };
    let mut previous: Option<Vec<PolicySeq>> = None;
    let mut executing = vec![Action::HOVER; n_agents];

    for k in 0..steps {
        if k % per_epoch == 0 {
            let intents = match &previous {
                None => IntentSet::hover(n_agents, config.horizon),
                Some(p) => extend_intent(p, config.base_policy),
            };
            let started = Instant::now();
            let (joint, evaluations) = match planner {
                PlannerKind::SmaNbo | PlannerKind::SmaNboMwtp => {
                    let plan = sma_nbo_plan(&belief, &intents, &order, &ctx)?;
                    (plan.joint, plan.evaluations)
                }
                PlannerKind::DecPomdp => {
                    let plan = dec_pomdp_plan(&belief, &ctx, config.dec_budget)?;
                    (plan.joint, plan.evaluations_per_agent.iter().sum())
                }
                PlannerKind::Mcr => {
                    let plan = mcr_plan(&belief, &ctx, config.mcr_samples, &mut sample_rng, &intents, &order)?;
                    (plan.joint, plan.evaluations)
                }
            };
            let plan_ms = match timing {
                Timing::Wall => started.elapsed().as_secs_f64() * 1e3,
                Timing::Off => 0.0,
            };
            executing = joint.iter().map(PolicySeq::first).collect();
            log.epochs.push(EpochRecord {
                epoch: k / per_epoch,
                t: belief.time,
                joint: joint.clone(),
                executed: executing.clone(),
                plan_ms,
                evaluations,
            });
            previous = Some(joint);
        }

        for (a, u) in belief.agents.iter_mut().zip(&executing) {
            *a = propagate_agent(a, *u, config.dt_sense);
        }
        let truths: Vec<Truth> = scenario
            .trajectories
            .iter()
            .map(|tr| Truth {
                target_id: tr.target_id,
                pos: tr.at(k + 1).pos,
            })
            .collect();
        let observations = sense(&belief.agents, &truths, &scenario.forest, config.noise_scale, &mut noise_rng);
        belief = fuse(&observations, &belief, &sense_model, &fusion)?;
        // Re-derive the clock from the step index so it does not drift.
        belief.time = (k + 1) as f64 * config.dt_sense;

        let targets: Vec<TargetRecord> = scenario
            .trajectories
            .iter()
            .zip(&belief.tracks)
            .map(|(tr, track)| TargetRecord {
                target_id: tr.target_id,
                truth: *tr.at(k + 1),
                estimate: track.mean,
                trace: track.trace(),
            })
            .collect();
        let detections = belief
            .tracks
            .iter()
            .map(|t| observations.iter().flatten().filter(|o| o.target_id == t.target_id).count())
            .collect();
        let est: Vec<Vec2> = belief.tracks.iter().map(TargetTrack::position).collect();
        let truth: Vec<Vec2> = truths.iter().map(|t| t.pos).collect();
        log.sense.push(SenseRecord {
            step: k + 1,
            t: belief.time,
            targets,
            agents: belief.agents.clone(),
            detections,
            ospa: ospa(&est, &truth, &params),
        });
    }
    Ok(log)
}
