//! Field-of-view geometry, occlusion-aware observability and the
//! range-bearing measurement noise model.
//!
//! Fields of view are axis-aligned squares centered on the agent and do not
//! rotate with yaw. The square boundary counts as visible, the shadow
//! boundary circle does not block.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Matrix2;
use rand::Rng;

use crate::geometry::{Square, Vec2};
use crate::math;
use crate::worldgen::OcclusionForest;
use crate::TargetId;

/// Per-agent sensor parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// FoV square edge length, m.
    pub fov_edge: f64,
    /// Sensing quality factor scaling the measurement covariance.
    pub alpha: f64,
    /// Minimal effective range used by the noise model, m.
    pub r0: f64,
}

impl SensorSpec {
    pub fn new(fov_edge: f64, alpha: f64) -> Self {
        SensorSpec {
            fov_edge,
            alpha,
            r0: 1.0,
        }
    }
}

/// Agent pose and velocity `(px, py, ψ, vx, vy)` plus its sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pos: Vec2,
    pub yaw: f64,
    pub vel: Vec2,
    pub sensor: SensorSpec,
}

impl AgentState {
    pub fn at(pos: Vec2, sensor: SensorSpec) -> Self {
        AgentState {
            pos,
            yaw: 0.0,
            vel: Vec2::zeros(),
            sensor,
        }
    }
}

/// Position measurement of one target by one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub target_id: TargetId,
    pub z: Vec2,
    /// Measurement covariance, m².
    pub r: Matrix2<f64>,
}

pub fn fov_region(agent: &AgentState) -> Square {
    Square {
        center: agent.pos,
        half_width: agent.sensor.fov_edge * 0.5,
    }
}

/// Inside the agent's FoV and not strictly inside any shadow disk.
pub fn is_observable(point: &Vec2, agent: &AgentState, forest: &OcclusionForest) -> bool {
    fov_region(agent).contains(point) && !forest.occludes(point)
}

/// 2-D rotation by `angle`.
pub fn rotation(angle: f64) -> Matrix2<f64> {
    let (s, c) = (math::sin(angle), math::cos(angle));
    Matrix2::new(c, -s, s, c)
}

/// `α · G(ρ) · diag(0.1 r, 0.1 π r) · G(ρ)ᵀ` with `r = max(range, r0)` and
/// `ρ` the bearing from agent to target.
pub fn observation_covariance(agent: &AgentState, target_pos: &Vec2) -> Matrix2<f64> {
    let delta = target_pos - agent.pos;
    let range = delta.norm().max(agent.sensor.r0);
    let bearing = math::atan2(delta.y, delta.x);
    let g = rotation(bearing);
    let core = Matrix2::new(0.1 * range, 0.0, 0.0, 0.1 * PI * range);
    let r = g * core * g.transpose() * agent.sensor.alpha;
    math::symmetrize(&r)
}

/// One ground-truth target position handed to [`sense`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truth {
    pub target_id: TargetId,
    pub pos: Vec2,
}

/// Generates every agent's observations of every observable target.
///
/// Detection is perfect and identity-tagged: each observable
/// (agent, target) pair yields exactly one measurement. Noise is drawn from
/// `noise_scale · R`; the returned observation always carries the model `R`,
/// so `noise_scale = 0` gives exact positions without breaking the filter.
pub fn sense<R: Rng + ?Sized>(
    agents: &[AgentState],
    truths: &[Truth],
    forest: &OcclusionForest,
    noise_scale: f64,
    rng: &mut R,
) -> Vec<Vec<Observation>> {
    agents
        .iter()
        .map(|agent| {
            truths
                .iter()
                .filter(|t| is_observable(&t.pos, agent, forest))
                .map(|t| {
                    let r = observation_covariance(agent, &t.pos);
                    let z = if noise_scale > 0.0 {
                        math::gaussian(&t.pos, &math::psd_sqrt(&(r * noise_scale)), rng)
                    } else {
                        t.pos
                    };
                    Observation {
                        target_id: t.target_id,
                        z,
                        r,
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agent(x: f64, y: f64, edge: f64, alpha: f64) -> AgentState {
        AgentState::at(Vec2::new(x, y), SensorSpec::new(edge, alpha))
    }

    #[test]
    fn fov_square_examples() {
        let sq = fov_region(&agent(0.0, 0.0, 20.0, 0.1));
        assert_eq!(sq.min_corner(), Vec2::new(-10.0, -10.0));
        assert_eq!(sq.max_corner(), Vec2::new(10.0, 10.0));
        assert!(sq.contains(&Vec2::new(10.0, 0.0)));

        let sq = fov_region(&agent(5.0, -3.0, 2.0, 0.1));
        assert_eq!(sq.min_corner(), Vec2::new(4.0, -4.0));
        assert_eq!(sq.max_corner(), Vec2::new(6.0, -2.0));
    }

    #[test]
    fn fov_ignores_yaw() {
        let mut a = agent(0.0, 0.0, 20.0, 0.1);
        a.yaw = 0.7;
        assert!(fov_region(&a).contains(&Vec2::new(10.0, 10.0)));
    }

    #[test]
    fn observability_cases() {
        let a = agent(0.0, 0.0, 20.0, 0.1);
        let empty = OcclusionForest::default();
        let shaded = OcclusionForest::new(alloc::vec![Disk::new(3.0, 3.0, 2.0)]);
        assert!(is_observable(&Vec2::new(3.0, 3.0), &a, &empty));
        assert!(!is_observable(&Vec2::new(3.0, 3.0), &a, &shaded));
        assert!(!is_observable(&Vec2::new(30.0, 0.0), &a, &empty));
        // on the shadow boundary
        assert!(is_observable(&Vec2::new(5.0, 3.0), &a, &shaded));
    }

    #[test]
    fn covariance_along_x_axis() {
        let a = agent(0.0, 0.0, 20.0, 0.1);
        let r = observation_covariance(&a, &Vec2::new(10.0, 0.0));
        assert_relative_eq!(r[(0, 0)], 0.1, epsilon = 1e-12);
        assert_relative_eq!(r[(1, 1)], 0.1 * PI, epsilon = 1e-12);
        assert_relative_eq!(r[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn covariance_uses_minimum_range() {
        let a = agent(0.0, 0.0, 20.0, 0.1);
        let near = observation_covariance(&a, &Vec2::new(0.5, 0.0));
        let at_r0 = observation_covariance(&a, &Vec2::new(1.0, 0.0));
        assert_relative_eq!(near, at_r0, epsilon = 1e-15);
        assert_relative_eq!(near[(0, 0)], 0.1 * 0.1, epsilon = 1e-15);
    }

    #[test]
    fn covariance_north_swaps_axes() {
        // Oracle: closed-form eigen-decomposition of a symmetric 2x2.
        let a = agent(0.0, 0.0, 20.0, 0.1);
        let r = observation_covariance(&a, &Vec2::new(0.0, 10.0));
        let (p, q, s) = (r[(0, 0)], r[(0, 1)], r[(1, 1)]);
        let mid = 0.5 * (p + s);
        let rad = (0.25 * (p - s) * (p - s) + q * q).sqrt();
        let (lo, hi) = (mid - rad, mid + rad);
        assert_relative_eq!(lo, 0.1, epsilon = 1e-9);
        assert_relative_eq!(hi, 0.1 * PI, epsilon = 1e-9);
        // eigenvector of `hi`: (q, hi - p), should point along x
        let v = if q.abs() > 1e-12 { Vec2::new(hi - s, q) } else if p > s { Vec2::new(1.0, 0.0) } else { Vec2::new(0.0, 1.0) };
        let v = v.normalize();
        assert!(v.x.abs() > 1.0 - 1e-9, "{v:?}");
    }

    #[test]
    fn two_agents_covering_one_target() {
        let agents = [agent(0.0, 0.0, 20.0, 0.1), agent(4.0, 0.0, 20.0, 0.15)];
        let truths = [Truth { target_id: 7, pos: Vec2::new(2.0, 1.0) }];
        let obs = sense(&agents, &truths, &OcclusionForest::default(), 1.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(obs.iter().map(Vec::len).sum::<usize>(), 2);
        assert!(obs.iter().flatten().all(|o| o.target_id == 7));
    }

    #[test]
    fn unseen_target_yields_nothing() {
        let agents = [agent(0.0, 0.0, 20.0, 0.1)];
        let truths = [Truth { target_id: 1, pos: Vec2::new(50.0, 50.0) }];
        let obs = sense(&agents, &truths, &OcclusionForest::default(), 1.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(obs[0].is_empty());
    }

    #[test]
    fn zero_noise_returns_truth() {
        let agents = [agent(0.0, 0.0, 20.0, 0.1)];
        let truths = [Truth { target_id: 1, pos: Vec2::new(3.0, -2.0) }];
        let obs = sense(&agents, &truths, &OcclusionForest::default(), 0.0, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(obs[0][0].z, Vec2::new(3.0, -2.0));
        assert!(obs[0][0].r[(0, 0)] > 0.0);
    }
}
