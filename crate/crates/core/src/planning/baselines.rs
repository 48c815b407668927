//! Reference planners: joint-space Dec-POMDP and Monte-Carlo rollout.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::rollout::{positions, JointView, Nominal, Objective, Sampled};
use super::search::{sweep, SequentialPlan};
use super::{check_order, IntentSet, PlanContext, PolicySeq};
use crate::error::{Error, Result};
use crate::estimation::{FleetBelief, NcvModel, StateVec};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct DecPlan {
    /// Each agent's own component of the joint optimum it computed.
    pub joint: Vec<PolicySeq>,
    pub cost: f64,
    /// Joint rollouts evaluated by each agent.
    pub evaluations_per_agent: Vec<u64>,
}

/// Every agent enumerates the full joint space `A^(n·H)` on the shared
/// belief and executes its own component. Fails before doing any work if the
/// space exceeds `budget` rollouts.
pub fn dec_pomdp_plan(belief: &FleetBelief, ctx: &PlanContext<'_>, budget: u64) -> Result<DecPlan> {
    let n = belief.agents.len();
    let h = ctx.horizon;
    let hover: Vec<PolicySeq> = (0..n).map(|i| PolicySeq::hover(i, h)).collect();
    ctx.check(n, &hover)?;
    let slots = n * h;
    let required = u32::try_from(slots)
        .ok()
        .and_then(|e| (ctx.actions.len() as u128).checked_pow(e))
        .unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }

    let obj = Nominal::new(belief, ctx);
    let mut joint = hover.clone();
    let mut cost = f64::INFINITY;
    let mut evaluations_per_agent = Vec::with_capacity(n);
    for me in 0..n {
        let before = obj.evaluations();
        let (best, best_cost) = enumerate_joint(&obj, &hover, ctx, required as u64);
        evaluations_per_agent.push(obj.evaluations() - before);
        joint[me] = best[me].clone();
        cost = best_cost;
    }
    Ok(DecPlan {
        joint,
        cost,
        evaluations_per_agent,
    })
}

/// Lexicographic scan over all joint sequences, agent 0's first action most
/// significant; the first minimum wins.
fn enumerate_joint<O: Objective>(obj: &O, start: &[PolicySeq], ctx: &PlanContext<'_>, count: u64) -> (Vec<PolicySeq>, f64) {
    let h = ctx.horizon;
    let actions = ctx.actions;
    let slots = start.len() * h;
    let mut cand: Vec<PolicySeq> = start.to_vec();
    for p in cand.iter_mut() {
        p.actions.fill(actions[0]);
    }
    let mut digits = vec![0usize; slots];
    let mut best = cand.clone();
    let mut best_cost = f64::INFINITY;
    for _ in 0..count {
        let c = obj.cost(&JointView::full(&cand));
        if c < best_cost {
            best_cost = c;
            best.clone_from(&cand);
        }
        for pos in (0..slots).rev() {
            let (agent, step) = (pos / h, pos % h);
            digits[pos] += 1;
            if digits[pos] < actions.len() {
                cand[agent].actions[step] = actions[digits[pos]];
                break;
            }
            digits[pos] = 0;
            cand[agent].actions[step] = actions[0];
        }
    }
    (best, best_cost)
}

/// Draws `n_samples` target trajectories from the belief: initial states
/// from `N(mean, P)` and process noise from `Q` at every step.
/// `out[s][t][l]` is sample `s`, track `t`, after `l + 1` steps.
pub fn sample_trajectories<R: Rng + ?Sized>(
    belief: &FleetBelief,
    model: &NcvModel,
    horizon: usize,
    n_samples: usize,
    rng: &mut R,
) -> Vec<Vec<Vec<StateVec>>> {
    let q_sqrt = math::psd_sqrt(&model.q);
    let p_sqrt: Vec<_> = belief.tracks.iter().map(|t| math::psd_sqrt(&t.cov)).collect();
    (0..n_samples)
        .map(|_| {
            belief
                .tracks
                .iter()
                .zip(&p_sqrt)
                .map(|(t, l)| {
                    let mut x = math::gaussian(&t.mean, l, rng);
                    (0..horizon)
                        .map(|_| {
                            x = math::gaussian(&(model.f * x), &q_sqrt, rng);
                            x
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Sequential sweep where each candidate is scored by its average cost over
/// `n_samples` sampled trajectories, drawn once and shared by all candidates.
pub fn mcr_plan<R: Rng + ?Sized>(
    belief: &FleetBelief,
    ctx: &PlanContext<'_>,
    n_samples: usize,
    rng: &mut R,
    intents: &IntentSet,
    order: &[usize],
) -> Result<SequentialPlan> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    ctx.check(belief.agents.len(), &intents.policies)?;
    check_order(order, intents.len())?;
    let samples = sample_trajectories(belief, &ctx.model, ctx.horizon, n_samples, rng)
        .iter()
        .map(|s| positions(s))
        .collect();
    let obj = Sampled::new(belief, ctx, samples);
    Ok(sweep(&obj, intents, order, ctx))
}
