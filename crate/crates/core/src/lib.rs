//! Core algorithms for sequential multi-agent nominal belief-state planning
//! in multi-sensor target tracking.
//!
//! The crate is `no_std` and only needs an allocator. Everything here is a
//! pure function of its inputs plus an explicitly passed random generator:
//!
//! * [`worldgen`] builds occlusion forests and Levy-walk ground truth,
//! * [`sensing`] models square fields of view, shadows and range-bearing noise,
//! * [`estimation`] runs the NCV Kalman filter and fleet-wide fusion,
//! * [`planning`] holds the nominal rollout, the MWTP cost-to-go and the
//!   sequential, Dec-POMDP and Monte-Carlo planners,
//! * [`metrics`] computes OSPA with an exact assignment solver, and ECDFs.
//!
//! File formats, wall-clock timing, the closed-loop simulator and the CLI live
//! in the `smanbo` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod config;
pub mod error;
pub mod estimation;
pub mod geometry;
pub(crate) mod math;
pub mod metrics;
pub mod planning;
pub mod sensing;
pub mod worldgen;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use geometry::{Aoi, Disk, Square, Vec2};

/// Identifier carried by a target and by every track and observation of it.
pub type TargetId = u32;
