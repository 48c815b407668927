//! Nominal belief rollouts: the deterministic cost recursion that scores a
//! joint action sequence.

use alloc::vec::Vec;
use core::cell::Cell;

use super::mwtp::{self, UncoveredTarget};
use super::{Action, Hectg, PlanContext, PolicySeq};
use crate::error::Result;
use crate::estimation::{predict_cov, update_cov, FleetBelief, NcvModel, StateCov, StateVec, TargetTrack};
use crate::geometry::Vec2;
use crate::sensing::{is_observable, observation_covariance, AgentState};
use crate::worldgen::OcclusionForest;

/// Noise-free propagation of every track mean: `out[t][l]` is the mean of
/// track `t` after `l + 1` steps.
pub fn nominal_trajectory(belief: &FleetBelief, model: &NcvModel, horizon: usize) -> Vec<Vec<StateVec>> {
    belief
        .tracks
        .iter()
        .map(|t| {
            let mut x = t.mean;
            (0..horizon)
                .map(|_| {
                    x = model.f * x;
                    x
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub cost: f64,
    /// `Σ_t trace(P_t)` after each of the H updates.
    pub step_traces: Vec<f64>,
    /// MWTP penalty at the end of the horizon (zero without the heuristic).
    pub terminal: f64,
    /// Nominal means, rolled-out covariances and agent states at `k + H`.
    pub end_belief: FleetBelief,
}

/// Scores `joint` on the nominal trajectory of `belief`.
pub fn rollout_cost(belief: &FleetBelief, joint: &[PolicySeq], ctx: &PlanContext<'_>) -> Result<RolloutResult> {
    ctx.check(belief.agents.len(), joint)?;
    let nominal = nominal_trajectory(belief, &ctx.model, ctx.horizon);
    let paths = positions(&nominal);
    let view = JointView::full(joint);
    let mut record = Record::default();
    let cost = simulate(belief, ctx, &paths, &view, Some(&mut record));
    let tracks = belief
        .tracks
        .iter()
        .zip(&nominal)
        .zip(record.covs)
        .map(|((t, means), cov)| TargetTrack::new(t.target_id, means[ctx.horizon - 1], cov))
        .collect();
    Ok(RolloutResult {
        cost,
        step_traces: record.step_traces,
        terminal: record.terminal,
        end_belief: FleetBelief {
            tracks,
            agents: record.agents,
            time: belief.time + ctx.model.dt * ctx.horizon as f64,
        },
    })
}

pub(crate) fn positions(means: &[Vec<StateVec>]) -> Vec<Vec<Vec2>> {
    means
        .iter()
        .map(|m| m.iter().map(|x| Vec2::new(x[0], x[1])).collect())
        .collect()
}

/// Joint policy where one agent's sequence may be swapped for a candidate.
pub(crate) struct JointView<'a> {
    base: &'a [PolicySeq],
    agent: usize,
    candidate: &'a [Action],
}

impl<'a> JointView<'a> {
    pub(crate) fn full(base: &'a [PolicySeq]) -> Self {
        JointView {
            base,
            agent: usize::MAX,
            candidate: &[],
        }
    }

    pub(crate) fn with(base: &'a [PolicySeq], agent: usize, candidate: &'a [Action]) -> Self {
        JointView { base, agent, candidate }
    }

    fn action(&self, agent: usize, step: usize) -> Action {
        if agent == self.agent {
            self.candidate[step]
        } else {
            self.base[agent].actions[step]
        }
    }
}

#[derive(Default)]
struct Record {
    step_traces: Vec<f64>,
    terminal: f64,
    covs: Vec<StateCov>,
    agents: Vec<AgentState>,
}

/// Core recursion shared by all planners. `paths[t][l]` is the position at
/// which track `t` is assumed to sit after step `l + 1`.
fn simulate(
    belief: &FleetBelief,
    ctx: &PlanContext<'_>,
    paths: &[Vec<Vec2>],
    joint: &JointView<'_>,
    mut record: Option<&mut Record>,
) -> f64 {
    let forest: &OcclusionForest = ctx.forest;
    let dt = ctx.model.dt;
    let mut agents: Vec<AgentState> = belief.agents.clone();
    let mut covs: Vec<StateCov> = belief.tracks.iter().map(|t| t.cov).collect();
    let mut total = 0.0;
    for l in 0..ctx.horizon {
        for (i, a) in agents.iter_mut().enumerate() {
            *a = super::propagate_agent(a, joint.action(i, l), dt);
        }
        let mut step = 0.0;
        for (cov, path) in covs.iter_mut().zip(paths) {
            let p = path[l];
            *cov = predict_cov(cov, &ctx.model);
            for a in &agents {
                if is_observable(&p, a, forest) {
                    if let Some(post) = update_cov(cov, &observation_covariance(a, &p)) {
                        *cov = post;
                    }
                }
            }
            step += cov.trace();
        }
        total += step;
        if let Some(r) = record.as_deref_mut() {
            r.step_traces.push(step);
        }
    }
    let terminal = match ctx.hectg {
        Hectg::None => 0.0,
        Hectg::Mwtp { beta } => {
            let end = ctx.horizon - 1;
            let targets = belief.tracks.iter().zip(paths).zip(&covs).map(|((t, path), cov)| UncoveredTarget {
                target_id: t.target_id,
                mean: path[end],
                trace: cov.trace(),
            });
            let uncovered = mwtp::uncovered_targets(&agents, targets);
            mwtp::penalty(&agents, &uncovered, beta)
        }
    };
    if let Some(r) = record {
        r.terminal = terminal;
        r.covs = covs;
        r.agents = agents;
    }
    total + terminal
}

/// Something that scores joint policies and counts how often it was asked.
pub(crate) trait Objective {
    fn cost(&self, joint: &JointView<'_>) -> f64;
    fn evaluations(&self) -> u64;
}

/// Objective over the nominal trajectory.
pub(crate) struct Nominal<'a> {
    belief: &'a FleetBelief,
    ctx: &'a PlanContext<'a>,
    paths: Vec<Vec<Vec2>>,
    count: Cell<u64>,
}

impl<'a> Nominal<'a> {
    pub(crate) fn new(belief: &'a FleetBelief, ctx: &'a PlanContext<'a>) -> Self {
        let paths = positions(&nominal_trajectory(belief, &ctx.model, ctx.horizon));
        Nominal {
            belief,
            ctx,
            paths,
            count: Cell::new(0),
        }
    }
}

impl Objective for Nominal<'_> {
    fn cost(&self, joint: &JointView<'_>) -> f64 {
        self.count.set(self.count.get() + 1);
        simulate(self.belief, self.ctx, &self.paths, joint, None)
    }

    fn evaluations(&self) -> u64 {
        self.count.get()
    }
}

/// Objective averaged over fixed sampled trajectories.
pub(crate) struct Sampled<'a> {
    belief: &'a FleetBelief,
    ctx: &'a PlanContext<'a>,
    samples: Vec<Vec<Vec<Vec2>>>,
    count: Cell<u64>,
}

impl<'a> Sampled<'a> {
    pub(crate) fn new(belief: &'a FleetBelief, ctx: &'a PlanContext<'a>, samples: Vec<Vec<Vec<Vec2>>>) -> Self {
        Sampled {
            belief,
            ctx,
            samples,
            count: Cell::new(0),
        }
    }
}

impl Objective for Sampled<'_> {
    fn cost(&self, joint: &JointView<'_>) -> f64 {
        self.count.set(self.count.get() + 1);
        let sum: f64 = self
            .samples
            .iter()
            .map(|paths| simulate(self.belief, self.ctx, paths, joint, None))
            .sum();
        sum / self.samples.len() as f64
    }

    fn evaluations(&self) -> u64 {
        self.count.get()
    }
}
