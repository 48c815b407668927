//! Single-agent policy search and the sequential multi-agent sweep.

use alloc::vec;
use alloc::vec::Vec;

use super::rollout::{JointView, Nominal, Objective};
use super::{check_order, Action, BasePolicy, IntentSet, PlanContext, PolicySeq};
use crate::error::{Error, Result};
use crate::estimation::FleetBelief;

#[derive(Debug, Clone, PartialEq)]
pub struct SingleResult {
    pub policy: PolicySeq,
    pub cost: f64,
    /// Joint objective with the agent keeping its incumbent sequence.
    pub incumbent_cost: f64,
    /// Rollouts evaluated.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialPlan {
    pub joint: Vec<PolicySeq>,
    /// Joint objective before the sweep followed by its value after each
    /// agent's stage, in sweep order.
    pub stage_objectives: Vec<f64>,
    /// Candidate evaluations over the whole sweep.
    pub evaluations: u64,
}

/// Optimizes `joint[agent]` with every other entry held fixed. The current
/// `joint[agent]` is the incumbent and is always a candidate, so the result
/// never scores worse than it.
pub fn optimize_single(belief: &FleetBelief, agent: usize, joint: &[PolicySeq], ctx: &PlanContext<'_>) -> Result<SingleResult> {
    ctx.check(belief.agents.len(), joint)?;
    if agent >= joint.len() {
        return Err(Error::invalid("agent", "index out of range"));
    }
    let obj = Nominal::new(belief, ctx);
    let choice = optimize_with(&obj, joint, agent, ctx);
    Ok(SingleResult {
        policy: PolicySeq {
            agent_id: agent,
            actions: choice.actions,
        },
        cost: choice.cost,
        incumbent_cost: choice.incumbent_cost,
        evaluations: obj.evaluations(),
    })
}

/// Sequential multi-agent planning: agents take turns in `order`, each
/// optimizing against the fresh plans of those before it and the intents
/// of those after it.
pub fn sma_nbo_plan(belief: &FleetBelief, intents: &IntentSet, order: &[usize], ctx: &PlanContext<'_>) -> Result<SequentialPlan> {
    ctx.check(belief.agents.len(), &intents.policies)?;
    check_order(order, intents.len())?;
    let obj = Nominal::new(belief, ctx);
    Ok(sweep(&obj, intents, order, ctx))
}

/// Shifts last epoch's plans by one step and appends the base-policy action.
pub fn extend_intent(previous: &[PolicySeq], base: BasePolicy) -> IntentSet {
    let policies = previous
        .iter()
        .map(|p| {
            let mut actions: Vec<Action> = p.actions.iter().skip(1).copied().collect();
            if !p.actions.is_empty() {
                actions.push(match base {
                    BasePolicy::RepeatLast => p.actions[p.actions.len() - 1],
                    BasePolicy::Hover => Action::HOVER,
                });
            }
            PolicySeq {
                agent_id: p.agent_id,
                actions,
            }
        })
        .collect();
    IntentSet { policies }
}

pub(crate) fn sweep<O: Objective>(obj: &O, intents: &IntentSet, order: &[usize], ctx: &PlanContext<'_>) -> SequentialPlan {
    let mut joint = intents.policies.clone();
    for (i, p) in joint.iter_mut().enumerate() {
        p.agent_id = i;
    }
    let mut stage_objectives = Vec::with_capacity(order.len() + 1);
    for (s, &agent) in order.iter().enumerate() {
        let choice = optimize_with(obj, &joint, agent, ctx);
        if s == 0 {
            stage_objectives.push(choice.incumbent_cost);
        }
        stage_objectives.push(choice.cost);
        joint[agent].actions = choice.actions;
    }
    SequentialPlan {
        joint,
        stage_objectives,
        evaluations: obj.evaluations(),
    }
}

pub(crate) struct Choice {
    pub actions: Vec<Action>,
    pub cost: f64,
    pub incumbent_cost: f64,
}

pub(crate) fn optimize_with<O: Objective>(obj: &O, joint: &[PolicySeq], agent: usize, ctx: &PlanContext<'_>) -> Choice {
    let space = (ctx.actions.len() as u64).checked_pow(ctx.horizon as u32);
    match space {
        Some(n) if n <= ctx.search.exhaustive_limit => exhaustive(obj, joint, agent, ctx.actions, ctx.horizon, n),
        _ => beam(obj, joint, agent, ctx.actions, ctx.horizon, ctx.search.beam_width),
    }
}

/// Position of `seq` in the lexicographic enumeration of `actions^H`.
fn enumeration_index(seq: &[Action], actions: &[Action]) -> Option<u64> {
    let mut idx = 0u64;
    for a in seq {
        let digit = actions.iter().position(|c| c == a)?;
        idx = idx * actions.len() as u64 + digit as u64;
    }
    Some(idx)
}

fn exhaustive<O: Objective>(obj: &O, joint: &[PolicySeq], agent: usize, actions: &[Action], h: usize, n: u64) -> Choice {
    let incumbent = &joint[agent].actions;
    let incumbent_idx = enumeration_index(incumbent, actions);
    let mut digits = vec![0usize; h];
    let mut cand = vec![actions[0]; h];
    let mut best = cand.clone();
    let mut best_cost = f64::INFINITY;
    let mut incumbent_cost = None;
    for idx in 0..n {
        let c = obj.cost(&JointView::with(joint, agent, &cand));
        if incumbent_idx == Some(idx) {
            incumbent_cost = Some(c);
        }
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&cand);
        }
        for pos in (0..h).rev() {
            digits[pos] += 1;
            if digits[pos] < actions.len() {
                cand[pos] = actions[digits[pos]];
                break;
            }
            digits[pos] = 0;
            cand[pos] = actions[0];
        }
    }
    let incumbent_cost = match incumbent_cost {
        Some(c) => c,
        None => {
            let c = obj.cost(&JointView::with(joint, agent, incumbent));
            if c < best_cost {
                best_cost = c;
                best.clone_from(incumbent);
            }
            c
        }
    };
    Choice {
        actions: best,
        cost: best_cost,
        incumbent_cost,
    }
}

/// Step-by-step beam search. Partial sequences are completed with the
/// incumbent's remaining actions for scoring.
fn beam<O: Objective>(obj: &O, joint: &[PolicySeq], agent: usize, actions: &[Action], h: usize, width: usize) -> Choice {
    let incumbent = &joint[agent].actions;
    let mut frontier: Vec<Vec<Action>> = vec![Vec::new()];
    let mut best = (f64::INFINITY, incumbent.clone());
    for l in 0..h {
        let mut scored: Vec<(f64, Vec<Action>)> = Vec::with_capacity(frontier.len() * actions.len());
        for prefix in &frontier {
            for a in actions {
                let mut seq = prefix.clone();
                seq.push(*a);
                seq.extend_from_slice(&incumbent[l + 1..]);
                let c = obj.cost(&JointView::with(joint, agent, &seq));
                seq.truncate(l + 1);
                scored.push((c, seq));
            }
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(width);
        if l + 1 == h {
            if let Some((c, seq)) = scored.first() {
                best = (*c, seq.clone());
            }
        }
        frontier = scored.into_iter().map(|(_, s)| s).collect();
    }
    let incumbent_cost = obj.cost(&JointView::with(joint, agent, incumbent));
    if !(best.0 <= incumbent_cost) {
        best = (incumbent_cost, incumbent.clone());
    }
    Choice {
        actions: best.1,
        cost: best.0,
        incumbent_cost,
    }
}
