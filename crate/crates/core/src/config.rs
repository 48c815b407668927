//! Scenario parameters shared by world generation, the planners and the
//! simulator. Defaults reproduce the heterogeneous three-UAV setup.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Aoi;
use crate::metrics::OspaParams;
use crate::planning::{BasePolicy, SearchConfig};
use crate::sensing::SensorSpec;
use crate::worldgen::LevyWalk;

/// FoV edge and quality factor of one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct AgentSpec {
    pub fov_edge: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub aoi: Aoi,
    /// Expected number of trees in the AOI.
    pub lambda: f64,
    /// Shadow disk radius, m.
    pub tree_radius: f64,
    pub agents: Vec<AgentSpec>,
    pub n_targets: usize,
    /// Agent speed limit, m/s.
    pub v_max: f64,
    /// Sensing and fusion period, s.
    pub dt_sense: f64,
    /// Decision period and rollout step, s. Integer multiple of `dt_sense`.
    pub dt_plan: f64,
    /// Planning horizon in decision steps.
    pub horizon: usize,
    /// NCV acceleration noise, m/s².
    pub sigma_a: f64,
    /// Minimal effective sensing range, m.
    pub r0: f64,
    /// MWTP weight.
    pub beta: f64,
    /// Add the MWTP terminal cost to every planner.
    pub mwtp: bool,
    pub ospa_c: f64,
    pub ospa_p: f64,
    /// Trial length, s.
    pub duration: f64,
    pub levy: LevyWalk,
    /// Diagonal of the initial track covariance `(px, py, vx, vy)`.
    pub initial_cov: [f64; 4],
    /// Headings in the discretized action set.
    pub headings: usize,
    /// Nonzero speed levels in the discretized action set.
    pub speeds: usize,
    pub base_policy: BasePolicy,
    /// Trajectory samples per Monte-Carlo rollout objective.
    pub mcr_samples: usize,
    pub search: SearchConfig,
    /// Largest joint-space enumeration a Dec-POMDP agent may run.
    pub dec_budget: u64,
    /// Scale applied to the measurement covariance when drawing noise.
    pub noise_scale: f64,
    /// Averaging-consensus iterations per fusion step; 0 fuses exactly.
    pub consensus_steps: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            aoi: Aoi::default(),
            lambda: 45.0,
            tree_radius: 5.0,
            agents: vec![
                AgentSpec { fov_edge: 20.0, alpha: 0.1 },
                AgentSpec { fov_edge: 25.0, alpha: 0.15 },
                AgentSpec { fov_edge: 22.0, alpha: 0.12 },
            ],
            n_targets: 4,
            v_max: 5.0,
            dt_sense: 0.2,
            dt_plan: 1.0,
            horizon: 3,
            sigma_a: 1.0,
            r0: 1.0,
            beta: 1.0,
            mwtp: false,
            ospa_c: 50.0,
            ospa_p: 2.0,
            duration: 60.0,
            levy: LevyWalk::default(),
            initial_cov: [25.0, 25.0, 4.0, 4.0],
            headings: 8,
            speeds: 1,
            base_policy: BasePolicy::RepeatLast,
            mcr_samples: 50,
            search: SearchConfig::default(),
            dec_budget: 1_000_000,
            noise_scale: 1.0,
            consensus_steps: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn sensors(&self) -> Vec<SensorSpec> {
        self.agents
            .iter()
            .map(|a| SensorSpec {
                fov_edge: a.fov_edge,
                alpha: a.alpha,
                r0: self.r0,
            })
            .collect()
    }

    pub fn ospa_params(&self) -> Result<OspaParams> {
        OspaParams::new(self.ospa_c, self.ospa_p)
    }

    /// Sensing steps per decision period.
    pub fn steps_per_epoch(&self) -> usize {
        crate::math::round(self.dt_plan / self.dt_sense) as usize
    }

    pub fn sense_steps(&self) -> usize {
        crate::math::round(self.duration / self.dt_sense) as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.aoi.validate()?;
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field, "must be positive"))
            }
        };
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", "must be non-negative"));
        }
        positive("tree_radius", self.tree_radius)?;
        if self.agents.is_empty() {
            return Err(Error::invalid("agents", "need at least one agent"));
        }
        for a in &self.agents {
            positive("agents.fov_edge", a.fov_edge)?;
            positive("agents.alpha", a.alpha)?;
        }
        positive("v_max", self.v_max)?;
        positive("dt_sense", self.dt_sense)?;
        positive("dt_plan", self.dt_plan)?;
        let ratio = self.dt_plan / self.dt_sense;
        if ratio < 1.0 - 1e-9 || (ratio - crate::math::round(ratio)).abs() > 1e-9 {
            return Err(Error::invalid("dt_plan", "must be an integer multiple of dt_sense"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if !(self.sigma_a >= 0.0 && self.sigma_a.is_finite()) {
            return Err(Error::invalid("sigma_a", "must be non-negative"));
        }
        positive("r0", self.r0)?;
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", "must be non-negative"));
        }
        self.ospa_params()?;
        positive("duration", self.duration)?;
        self.levy.validate()?;
        if !self.initial_cov.iter().all(|v| *v >= 0.0 && v.is_finite()) {
            return Err(Error::invalid("initial_cov", "entries must be non-negative"));
        }
        if self.headings == 0 || self.speeds == 0 {
            return Err(Error::invalid("headings", "headings and speeds must be at least 1"));
        }
        if self.mcr_samples == 0 {
            return Err(Error::invalid("mcr_samples", "must be at least 1"));
        }
        self.search.validate()?;
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(Error::invalid("noise_scale", "must be non-negative"));
        }
        Ok(())
    }
}
