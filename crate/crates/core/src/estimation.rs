//! Nearly-constant-velocity Kalman filtering and fleet-wide fusion.
//!
//! State layout is `(px, py, vx, vy)`. Measurement updates use the Joseph
//! form and re-symmetrize, since planners compare small trace differences.

use alloc::vec::Vec;

use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector4};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::math::symmetrize;
use crate::sensing::{AgentState, Observation};
use crate::TargetId;

pub type StateVec = Vector4<f64>;
pub type StateCov = Matrix4<f64>;

/// Discrete NCV transition and process noise for one step of length `dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcvModel {
    pub f: Matrix4<f64>,
    pub q: Matrix4<f64>,
    pub dt: f64,
    pub sigma_a: f64,
}

impl NcvModel {
    pub fn new(dt: f64, sigma_a: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", "must be positive"));
        }
        if !(sigma_a >= 0.0 && sigma_a.is_finite()) {
            return Err(Error::invalid("sigma_a", "must be non-negative"));
        }
        #[rustfmt::skip]
        let f = Matrix4::new(
            1.0, 0.0, dt,  0.0,
            0.0, 1.0, 0.0, dt,
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
        );
        let (d2, d3, d4) = (dt * dt, dt * dt * dt, dt * dt * dt * dt);
        #[rustfmt::skip]
        let q = Matrix4::new(
            d4 / 4.0, 0.0,      d3 / 2.0, 0.0,
            0.0,      d4 / 4.0, 0.0,      d3 / 2.0,
            d3 / 2.0, 0.0,      d2,       0.0,
            0.0,      d3 / 2.0, 0.0,      d2,
        ) * (sigma_a * sigma_a);
        Ok(NcvModel { f, q, dt, sigma_a })
    }
}

pub fn ncv_model(dt: f64, sigma_a: f64) -> Result<NcvModel> {
    NcvModel::new(dt, sigma_a)
}

/// Gaussian belief over one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetTrack {
    pub target_id: TargetId,
    pub mean: StateVec,
    pub cov: StateCov,
}

impl TargetTrack {
    pub fn new(target_id: TargetId, mean: StateVec, cov: StateCov) -> Self {
        TargetTrack { target_id, mean, cov }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.mean[0], self.mean[1])
    }

    pub fn trace(&self) -> f64 {
        self.cov.trace()
    }
}

pub fn predict_cov(cov: &StateCov, model: &NcvModel) -> StateCov {
    symmetrize(&(model.f * cov * model.f.transpose() + model.q))
}

/// Kalman time update.
pub fn predict(track: &TargetTrack, model: &NcvModel) -> TargetTrack {
    TargetTrack {
        target_id: track.target_id,
        mean: model.f * track.mean,
        cov: predict_cov(&track.cov, model),
    }
}

fn position_selector() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

struct Gain {
    k: Matrix4x2<f64>,
    cov: StateCov,
}

fn joseph(cov: &StateCov, r: &Matrix2<f64>) -> Option<Gain> {
    let h = position_selector();
    let s = cov.fixed_view::<2, 2>(0, 0) + r;
    let s_inv = s.try_inverse()?;
    if !s_inv.iter().all(|v| v.is_finite()) {
        return None;
    }
    let k = cov.fixed_view::<4, 2>(0, 0) * s_inv;
    let a = Matrix4::identity() - k * h;
    let cov = symmetrize(&(a * cov * a.transpose() + k * r * k.transpose()));
    Some(Gain { k, cov })
}

/// Joseph-form covariance update for a position measurement with noise `r`.
/// Returns `None` if the innovation covariance is singular.
pub fn update_cov(cov: &StateCov, r: &Matrix2<f64>) -> Option<StateCov> {
    joseph(cov, r).map(|g| g.cov)
}

/// Kalman measurement update with `H = [I₂ 0₂]`.
pub fn update(track: &TargetTrack, obs: &Observation) -> Result<TargetTrack> {
    let gain = joseph(&track.cov, &obs.r).ok_or(Error::SingularInnovation {
        target_id: track.target_id,
    })?;
    let innovation = obs.z - Vec2::new(track.mean[0], track.mean[1]);
    Ok(TargetTrack {
        target_id: track.target_id,
        mean: track.mean + gain.k * innovation,
        cov: gain.cov,
    })
}

/// Shared fleet belief: fused tracks plus the (fully observed) agent states.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetBelief {
    pub tracks: Vec<TargetTrack>,
    pub agents: Vec<AgentState>,
    /// Seconds since trial start.
    pub time: f64,
}

impl FleetBelief {
    pub fn new(tracks: Vec<TargetTrack>, agents: Vec<AgentState>, time: f64) -> Result<Self> {
        for (i, t) in tracks.iter().enumerate() {
            if tracks[..i].iter().any(|u| u.target_id == t.target_id) {
                return Err(Error::invalid("tracks", alloc::format!("duplicate target id {}", t.target_id)));
            }
        }
        Ok(FleetBelief { tracks, agents, time })
    }

    pub fn track_index(&self, id: TargetId) -> Option<usize> {
        self.tracks.iter().position(|t| t.target_id == id)
    }

    pub fn total_trace(&self) -> f64 {
        self.tracks.iter().map(TargetTrack::trace).sum()
    }
}

/// Communication graph for the averaging-consensus fusion mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusGraph {
    neighbors: Vec<Vec<usize>>,
}

impl ConsensusGraph {
    pub fn complete(n: usize) -> Self {
        ConsensusGraph {
            neighbors: (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect(),
        }
    }

    pub fn ring(n: usize) -> Self {
        ConsensusGraph {
            neighbors: (0..n)
                .map(|i| {
                    let mut nb = Vec::new();
                    if n > 1 {
                        nb.push((i + n - 1) % n);
                    }
                    if n > 2 {
                        nb.push((i + 1) % n);
                    }
                    nb
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Metropolis–Hastings weights (row-stochastic and symmetric).
    fn weights(&self) -> Vec<Vec<(usize, f64)>> {
        let deg: Vec<usize> = self.neighbors.iter().map(Vec::len).collect();
        self.neighbors
            .iter()
            .enumerate()
            .map(|(i, nb)| {
                let mut row: Vec<(usize, f64)> = nb.iter().map(|&j| (j, 1.0 / (1 + deg[i].max(deg[j])) as f64)).collect();
                let off: f64 = row.iter().map(|(_, w)| w).sum();
                row.push((i, 1.0 - off));
                row
            })
            .collect()
    }
}

/// How per-agent information is combined into the fleet belief.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Fusion {
    /// Centralized sequential updates: the converged limit of consensus.
    #[default]
    Exact,
    /// `steps` rounds of information averaging over `graph`; the belief of
    /// agent 0 is returned.
    Consensus { steps: usize, graph: ConsensusGraph },
}

/// Predicts every track one step and folds in all agents' observations.
///
/// `per_agent[i]` holds agent `i`'s observations. Every observation must
/// refer to a tracked target.
pub fn fuse(per_agent: &[Vec<Observation>], belief: &FleetBelief, model: &NcvModel, fusion: &Fusion) -> Result<FleetBelief> {
    for obs in per_agent.iter().flatten() {
        if belief.track_index(obs.target_id).is_none() {
            return Err(Error::UnknownTarget {
                target_id: obs.target_id,
            });
        }
    }
    let mut tracks: Vec<TargetTrack> = belief.tracks.iter().map(|t| predict(t, model)).collect();
    match fusion {
        Fusion::Exact => {
            for track in tracks.iter_mut() {
                let id = track.target_id;
                for obs in per_agent.iter().flatten().filter(|o| o.target_id == id) {
                    *track = update(track, obs)?;
                }
            }
        }
        Fusion::Consensus { steps, graph } => {
            if graph.len() != per_agent.len() {
                return Err(Error::invalid("consensus graph", "node count must equal agent count"));
            }
            let weights = graph.weights();
            for track in tracks.iter_mut() {
                if per_agent.iter().flatten().any(|o| o.target_id == track.target_id) {
                    *track = consensus_track(track, per_agent, &weights, *steps)?;
                }
            }
        }
    }
    Ok(FleetBelief {
        tracks,
        agents: belief.agents.clone(),
        time: belief.time + model.dt,
    })
}

fn consensus_track(
    predicted: &TargetTrack,
    per_agent: &[Vec<Observation>],
    weights: &[Vec<(usize, f64)>],
    steps: usize,
) -> Result<TargetTrack> {
    let n = per_agent.len() as f64;
    let singular = || Error::invalid("fusion", "predicted covariance is singular");
    let prior_info = predicted.cov.try_inverse().ok_or_else(singular)?;
    let prior_vec = prior_info * predicted.mean;
    let h = position_selector();

    let mut info: Vec<(Matrix4<f64>, Vector4<f64>)> = per_agent
        .iter()
        .map(|obs| {
            let mut omega = prior_info / n;
            let mut q = prior_vec / n;
            for o in obs.iter().filter(|o| o.target_id == predicted.target_id) {
                let r_inv = o.r.try_inverse().ok_or(Error::SingularInnovation { target_id: o.target_id })?;
                omega += h.transpose() * r_inv * h;
                q += h.transpose() * r_inv * o.z;
            }
            Ok((omega, q))
        })
        .collect::<Result<_>>()?;

    for _ in 0..steps {
        info = weights
            .iter()
            .map(|row| {
                row.iter().fold((Matrix4::zeros(), Vector4::zeros()), |(om, q), &(j, w)| {
                    (om + info[j].0 * w, q + info[j].1 * w)
                })
            })
            .collect();
    }

    let omega = info[0].0 * n;
    let cov = omega.try_inverse().ok_or_else(singular)?;
    Ok(TargetTrack {
        target_id: predicted.target_id,
        mean: cov * (info[0].1 * n),
        cov: symmetrize(&cov),
    })
}
