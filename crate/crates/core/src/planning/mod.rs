//! Receding-horizon decision making over the fused belief.
//!
//! Every planner scores joint action sequences with the same nominal
//! rollout: target means are propagated noise-free, agents follow their
//! candidate sequences, and the cost is the accumulated trace of the
//! predicted-and-updated track covariances, optionally closed by the MWTP
//! terminal penalty.
//!
//! * [`sma_nbo_plan`] optimizes one agent at a time, conditioning on the
//!   fresh plans of its predecessors and the intents of its successors.
//! * [`dec_pomdp_plan`] has every agent solve the whole joint problem.
//! * [`mcr_plan`] runs the sequential sweep against sampled target
//!   trajectories instead of the nominal one.

mod baselines;
mod kinematics;
mod mwtp;
mod rollout;
mod search;

use alloc::vec;
use alloc::vec::Vec;

pub use baselines::{dec_pomdp_plan, mcr_plan, sample_trajectories, DecPlan};
pub use kinematics::{action_set, propagate_agent};
pub use mwtp::{mdo_position, mwtp, uncovered_targets, MwtpStep, MwtpTrace, UncoveredTarget};
pub use rollout::{nominal_trajectory, rollout_cost, RolloutResult};
pub use search::{extend_intent, optimize_single, sma_nbo_plan, SequentialPlan, SingleResult};

use crate::error::{Error, Result};
use crate::estimation::NcvModel;
use crate::geometry::Vec2;
use crate::worldgen::OcclusionForest;

/// Horizontal velocity command, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub ux: f64,
    pub uy: f64,
}

impl Action {
    pub const HOVER: Action = Action { ux: 0.0, uy: 0.0 };

    pub fn new(ux: f64, uy: f64) -> Self {
        Action { ux, uy }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.ux, self.uy)
    }

    pub fn is_hover(&self) -> bool {
        self.ux == 0.0 && self.uy == 0.0
    }

    /// `|u| <= v_max`, allowing for rounding in the heading trigonometry.
    pub fn is_feasible(&self, v_max: f64) -> bool {
        self.ux * self.ux + self.uy * self.uy <= v_max * v_max * (1.0 + 1e-12)
    }
}

/// One agent's action sequence over the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySeq {
    pub agent_id: usize,
    pub actions: Vec<Action>,
}

impl PolicySeq {
    pub fn hover(agent_id: usize, horizon: usize) -> Self {
        PolicySeq {
            agent_id,
            actions: vec![Action::HOVER; horizon],
        }
    }

    pub fn first(&self) -> Action {
        self.actions.first().copied().unwrap_or(Action::HOVER)
    }
}

/// Policies of intent, one per agent, each `horizon` long.
#[derive(Debug, Clone, PartialEq)]
pub struct IntentSet {
    pub policies: Vec<PolicySeq>,
}

impl IntentSet {
    /// All-hover intents used at the first decision epoch.
    pub fn hover(n_agents: usize, horizon: usize) -> Self {
        IntentSet {
            policies: (0..n_agents).map(|i| PolicySeq::hover(i, horizon)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.policies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.policies.is_empty()
    }
}

/// Terminal heuristic added at the end of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Hectg {
    #[default]
    None,
    Mwtp {
        beta: f64,
    },
}

/// Action appended when an executed plan is shifted into an intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BasePolicy {
    #[default]
    RepeatLast,
    Hover,
}

/// Single-agent search settings. Exhaustive enumeration is used whenever
/// `|A|^H <= exhaustive_limit`, otherwise a per-step beam search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SearchConfig {
    pub exhaustive_limit: u64,
    pub beam_width: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            exhaustive_limit: 100_000,
            beam_width: 8,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beam_width == 0 {
            return Err(Error::invalid("search.beam_width", "must be at least 1"));
        }
        Ok(())
    }
}

/// Everything a planner needs besides the belief.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub forest: &'a OcclusionForest,
    /// NCV model for one planning step.
    pub model: NcvModel,
    pub actions: &'a [Action],
    pub horizon: usize,
    pub hectg: Hectg,
    pub search: SearchConfig,
}

impl PlanContext<'_> {
    pub(crate) fn check(&self, n_agents: usize, policies: &[PolicySeq]) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if self.actions.is_empty() {
            return Err(Error::invalid("actions", "action set is empty"));
        }
        if policies.len() != n_agents {
            return Err(Error::invalid("policies", "need exactly one policy per agent"));
        }
        if policies.iter().any(|p| p.actions.len() != self.horizon) {
            return Err(Error::invalid("policies", "every policy must span the horizon"));
        }
        Ok(())
    }
}

pub(crate) fn check_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::invalid("order", "must list every agent once"));
    }
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::invalid("order", "must be a permutation of the agents"));
        }
        seen[i] = true;
    }
    Ok(())
}
