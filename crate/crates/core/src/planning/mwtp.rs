//! Multiple weighted trace penalty: a greedy sensor-to-target matching that
//! charges distance-weighted covariance traces for targets no sensor covers
//! at the end of the horizon.

use alloc::vec::Vec;

use crate::geometry::Vec2;
use crate::sensing::{fov_region, AgentState};
use crate::TargetId;

/// Smallest move of the FoV center that brings `target` into the square:
/// each axis is shifted by the excess over the half width.
pub fn mdo_position(sensor: &AgentState, target: &Vec2) -> Vec2 {
    let half = sensor.sensor.fov_edge * 0.5;
    let shift = |d: f64| {
        let excess = (d.abs() - half).max(0.0);
        if d < 0.0 {
            -excess
        } else {
            excess
        }
    };
    let d = target - sensor.pos;
    sensor.pos + Vec2::new(shift(d.x), shift(d.y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncoveredTarget {
    pub target_id: TargetId,
    /// Nominal mean position at the end of the horizon.
    pub mean: Vec2,
    /// Trace of the end-of-horizon covariance.
    pub trace: f64,
}

/// Targets whose position lies outside every sensor's FoV.
pub fn uncovered_targets<I>(sensors: &[AgentState], targets: I) -> Vec<UncoveredTarget>
where
    I: IntoIterator<Item = UncoveredTarget>,
{
    targets
        .into_iter()
        .filter(|t| !sensors.iter().any(|s| fov_region(s).contains(&t.mean)))
        .collect()
}

/// One iteration of the matching loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwtpStep {
    pub target_id: TargetId,
    pub sensor: usize,
    /// Distance from the (possibly already moved) sensor to the target mean.
    pub distance: f64,
    /// Term added to the penalty; zero when the sensor was already matched.
    pub charged: f64,
    /// Sensor position after the MDO move.
    pub moved_to: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwtpTrace {
    pub penalty: f64,
    pub steps: Vec<MwtpStep>,
    /// Final accumulated travel `D_i` per sensor.
    pub accumulated: Vec<f64>,
}

/// Runs the matching and records every step.
///
/// Targets are visited in decreasing trace order (stable for ties). Each
/// picks the sensor minimizing `D_i + d(s_i, target)`, lowest index on
/// ties; the penalty `β · d · trace` is charged only if that sensor has
/// `D_i = 0`. The sensor then accumulates `d` and jumps to its MDO position.
pub fn mwtp(end_sensors: &[AgentState], uncovered: &[UncoveredTarget], beta: f64) -> MwtpTrace {
    let mut steps = Vec::with_capacity(uncovered.len());
    let (penalty, accumulated) = run(end_sensors, uncovered, beta, |s| steps.push(s));
    MwtpTrace {
        penalty,
        steps,
        accumulated,
    }
}

pub(crate) fn penalty(end_sensors: &[AgentState], uncovered: &[UncoveredTarget], beta: f64) -> f64 {
    if uncovered.is_empty() || end_sensors.is_empty() {
        return 0.0;
    }
    run(end_sensors, uncovered, beta, |_| {}).0
}

fn run(end_sensors: &[AgentState], uncovered: &[UncoveredTarget], beta: f64, mut on_step: impl FnMut(MwtpStep)) -> (f64, Vec<f64>) {
    let mut sensors: Vec<AgentState> = end_sensors.to_vec();
    let mut travelled = alloc::vec![0.0; sensors.len()];
    if sensors.is_empty() {
        return (0.0, travelled);
    }
    let mut order: Vec<&UncoveredTarget> = uncovered.iter().collect();
    order.sort_by(|a, b| b.trace.total_cmp(&a.trace));

    let mut total = 0.0;
    for target in order {
        let mut best = 0;
        let mut best_score = f64::INFINITY;
        for (i, s) in sensors.iter().enumerate() {
            let score = travelled[i] + (s.pos - target.mean).norm();
            if score < best_score {
                best_score = score;
                best = i;
            }
        }
        let distance = (sensors[best].pos - target.mean).norm();
        let charged = if travelled[best] == 0.0 {
            beta * distance * target.trace
        } else {
            0.0
        };
        total += charged;
        travelled[best] += distance;
        let moved_to = mdo_position(&sensors[best], &target.mean);
        sensors[best].pos = moved_to;
        on_step(MwtpStep {
            target_id: target.target_id,
            sensor: best,
            distance,
            charged,
            moved_to,
        });
    }
    (total, travelled)
}
