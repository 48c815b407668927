//! Random occlusion forests and Levy-walk target ground truth.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::geometry::{Aoi, Disk, Vec2};
use crate::math;
use crate::TargetId;

/// Attempts allowed for placing a single tree before giving up.
pub const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Resolution of generated disk coordinates (1 µm). Values on this grid
/// survive the six-decimal map file format bit-exactly.
pub const COORD_QUANTUM: f64 = 1e-6;

/// Nearest double to the closest multiple of [`COORD_QUANTUM`].
pub fn quantize(x: f64) -> f64 {
    // Dividing by the exact integer 1e6 is correctly rounded; multiplying by
    // the inexact 1e-6 is not.
    math::round(x * 1e6) / 1e6
}

/// Set of shadow disks. An empty forest occludes nothing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OcclusionForest {
    pub disks: Vec<Disk>,
}

impl OcclusionForest {
    pub fn new(disks: Vec<Disk>) -> Self {
        OcclusionForest { disks }
    }

    pub fn len(&self) -> usize {
        self.disks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty()
    }

    /// True if `p` lies strictly inside any disk.
    pub fn occludes(&self, p: &Vec2) -> bool {
        self.disks.iter().any(|d| d.contains_strictly(p))
    }

    /// Checks the forest invariants against `aoi`: positive radii, centers
    /// inside, and no two disks touching or overlapping.
    pub fn validate(&self, aoi: &Aoi) -> Result<()> {
        for (i, d) in self.disks.iter().enumerate() {
            if !(d.radius > 0.0) {
                return Err(Error::invalid("forest", alloc::format!("disk {i} has radius {}", d.radius)));
            }
            if !aoi.contains(&d.center) {
                return Err(Error::invalid("forest", alloc::format!("disk {i} center lies outside the AOI")));
            }
            for (j, e) in self.disks.iter().enumerate().skip(i + 1) {
                if d.overlaps(e) {
                    return Err(Error::invalid("forest", alloc::format!("disks {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// Draws a Poisson(`lambda`) number of equal-radius trees with centers
/// uniform in `aoi`, rejecting candidates that would touch an earlier tree.
///
/// Centers and the radius are quantized to [`COORD_QUANTUM`]. Fails with
/// [`Error::Placement`] when a tree cannot be placed within
/// [`PLACEMENT_ATTEMPTS`] draws.
pub fn generate_forest<R: Rng + ?Sized>(
    lambda: f64,
    radius: f64,
    aoi: &Aoi,
    rng: &mut R,
) -> Result<OcclusionForest> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", "must be finite and non-negative"));
    }
    let radius = quantize(radius);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("tree_radius", "must be positive"));
    }
    aoi.validate()?;

    let count = if lambda == 0.0 {
        0
    } else {
        let poisson = Poisson::new(lambda).map_err(|_| Error::invalid("lambda", "out of range"))?;
        poisson.sample(rng) as usize
    };

    let mut disks: Vec<Disk> = Vec::with_capacity(count);
    for index in 0..count {
        let mut placed = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let cx = quantize(rng.random::<f64>() * aoi.width).clamp(0.0, aoi.width);
            let cy = quantize(rng.random::<f64>() * aoi.height).clamp(0.0, aoi.height);
            let candidate = Disk::new(cx, cy, radius);
            if disks.iter().all(|d| !d.overlaps(&candidate)) {
                disks.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Placement {
                index,
                requested: count,
                attempts: PLACEMENT_ATTEMPTS,
            });
        }
    }
    Ok(OcclusionForest { disks })
}

/// True kinematic state of a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub pos: Vec2,
    pub vel: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetTrajectory {
    pub target_id: TargetId,
    /// Sampling period in seconds.
    pub dt: f64,
    /// `samples[k]` is the state at time `k · dt`.
    pub samples: Vec<TargetState>,
}

impl TargetTrajectory {
    /// Straight line at constant velocity, for scripted scenarios.
    pub fn constant_velocity(target_id: TargetId, start: Vec2, vel: Vec2, dt: f64, steps: usize) -> Self {
        let samples = (0..=steps)
            .map(|k| TargetState {
                pos: start + vel * (k as f64 * dt),
                vel,
            })
            .collect();
        TargetTrajectory {
            target_id,
            dt,
            samples,
        }
    }

    pub fn at(&self, k: usize) -> &TargetState {
        &self.samples[k.min(self.samples.len() - 1)]
    }
}

/// Levy-walk parameters: step lengths follow a Pareto law truncated to
/// `[scale, max_step]` and each step is walked at a speed drawn uniformly
/// from `[speed_min, speed_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct LevyWalk {
    pub speed_min: f64,
    pub speed_max: f64,
    pub shape: f64,
    pub scale: f64,
    pub max_step: f64,
}

impl Default for LevyWalk {
    fn default() -> Self {
        LevyWalk {
            speed_min: 1.0,
            speed_max: 3.0,
            shape: 1.5,
            scale: 1.0,
            max_step: 40.0,
        }
    }
}

impl LevyWalk {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed_min >= 0.0 && self.speed_max >= self.speed_min && self.speed_max.is_finite()) {
            return Err(Error::invalid("levy.speed", "need 0 <= speed_min <= speed_max"));
        }
        if !(self.shape > 0.0 && self.scale > 0.0 && self.max_step >= self.scale) {
            return Err(Error::invalid("levy", "need shape > 0 and 0 < scale <= max_step"));
        }
        Ok(())
    }

    /// Inverse-CDF draw from the truncated Pareto law.
    pub fn sample_step<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let tail = math::powf(self.scale / self.max_step, self.shape);
        let len = self.scale * math::powf(1.0 - u * (1.0 - tail), -1.0 / self.shape);
        len.clamp(self.scale, self.max_step)
    }

    fn sample_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.speed_max > self.speed_min {
            rng.random_range(self.speed_min..=self.speed_max)
        } else {
            self.speed_min
        }
    }
}

const HEADING_RETRIES: usize = 1_000;

fn heading_vec(theta: f64) -> Vec2 {
    Vec2::new(math::cos(theta), math::sin(theta))
}

/// Samples a Levy-walk ground-truth trajectory with `round(duration/dt) + 1`
/// samples starting at a uniform position inside `aoi`.
///
/// Each segment keeps a constant heading and speed and lasts
/// `ceil(len / (speed·dt))` samples. A step that would leave the AOI
/// triggers a fresh heading for the rest of the segment; after
/// `HEADING_RETRIES` failures the target heads for the AOI center.
/// Velocities are the backward finite differences of positions.
pub fn generate_levy_trajectory<R: Rng + ?Sized>(
    target_id: TargetId,
    duration: f64,
    dt: f64,
    walk: &LevyWalk,
    aoi: &Aoi,
    rng: &mut R,
) -> Result<TargetTrajectory> {
    if !(dt > 0.0 && duration > 0.0) {
        return Err(Error::invalid("duration", "duration and dt must be positive"));
    }
    walk.validate()?;
    aoi.validate()?;

    let steps = math::round(duration / dt) as usize;
    let mut pos = Vec2::new(rng.random::<f64>() * aoi.width, rng.random::<f64>() * aoi.height);
    let mut positions = Vec::with_capacity(steps + 1);
    positions.push(pos);

    let mut heading = heading_vec(rng.random::<f64>() * TAU);
    let mut speed = walk.sample_speed(rng);
    let mut remaining = segment_samples(walk.sample_step(rng), speed, dt);

    for _ in 0..steps {
        if remaining == 0 {
            heading = heading_vec(rng.random::<f64>() * TAU);
            speed = walk.sample_speed(rng);
            remaining = segment_samples(walk.sample_step(rng), speed, dt);
        }
        let stride = speed * dt;
        let mut tries = 0;
        while !aoi.contains(&(pos + heading * stride)) {
            if tries == HEADING_RETRIES {
                let to_center = aoi.center() - pos;
                heading = if to_center.norm() > 0.0 {
                    to_center.normalize()
                } else {
                    Vec2::new(1.0, 0.0)
                };
                break;
            }
            heading = heading_vec(rng.random::<f64>() * TAU);
            tries += 1;
        }
        pos += heading * stride;
        positions.push(pos);
        remaining -= 1;
    }

    let mut samples = Vec::with_capacity(positions.len());
    for k in 0..positions.len() {
        let vel = if positions.len() == 1 {
            heading * speed
        } else if k == 0 {
            (positions[1] - positions[0]) / dt
        } else {
            (positions[k] - positions[k - 1]) / dt
        };
        samples.push(TargetState { pos: positions[k], vel });
    }
    Ok(TargetTrajectory {
        target_id,
        dt,
        samples,
    })
}

fn segment_samples(len: f64, speed: f64, dt: f64) -> usize {
    if speed <= 0.0 {
        return 1;
    }
    (math::ceil(len / (speed * dt)) as usize).max(1)
}
