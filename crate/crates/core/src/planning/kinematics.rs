use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::Action;
use crate::math;
use crate::sensing::AgentState;

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

/// Hover followed by `n_speeds × n_headings` commands, speed-major, with
/// headings evenly spaced counter-clockwise from +x and speeds
/// `v_max · j / n_speeds`.
pub fn action_set(v_max: f64, n_headings: usize, n_speeds: usize) -> Vec<Action> {
    let mut out = Vec::with_capacity(1 + n_headings * n_speeds);
    out.push(Action::HOVER);
    for j in 1..=n_speeds {
        let speed = v_max * j as f64 / n_speeds as f64;
        for h in 0..n_headings {
            let theta = TAU * h as f64 / n_headings as f64;
            out.push(Action::new(snap(speed * math::cos(theta)), snap(speed * math::sin(theta))));
        }
    }
    out
}

/// Deterministic single-integrator step. Yaw follows the commanded heading;
/// hovering keeps the previous yaw.
pub fn propagate_agent(s: &AgentState, u: Action, dt: f64) -> AgentState {
    let yaw = if u.is_hover() { s.yaw } else { math::atan2(u.uy, u.ux) };
    AgentState {
        pos: s.pos + u.velocity() * dt,
        yaw,
        vel: u.velocity(),
        sensor: s.sensor,
    }
}
