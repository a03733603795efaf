//! Kinodynamic planning for jerk-controlled triple-integrator vehicles.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithm:
//! polynomial trajectories, closed-form state-to-state steering, an
//! occupancy-grid world model, the equality-constrained spline QP with its
//! closed-form solve, the iterative regional optimizer, the kRRT* / kFMT* /
//! kA* front-ends and the back-end refiner. File formats, the benchmark
//! harness and the command-line tool live in the `kinoplan` crate.
//!
//! All positions are in meters and all times in seconds.

#![no_std]
// `num_traits::Float` goes unused whenever std is linked somewhere in the
// dependency graph, since its inherent float methods then take precedence.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod clock;
pub mod deform;
pub mod envgen;
pub mod error;
pub mod grid;
pub mod planner;
pub mod poly;
pub mod qp;
pub mod refine;
pub mod regional;
pub mod steer;
pub mod trajectory;
pub mod vec3;

pub use clock::{Clock, WorkClock, WorkCounters};
pub use envgen::{generate, EnvKind, EnvSpec};
pub use error::{Error, Result};
pub use grid::{check_trajectory, local_astar, BoundBox, CollisionInterval, CollisionReport, OccupancyGrid};
pub use planner::{
    ka_star, kfmt_star, krrt_star, PlanResult, PlanStats, PlannerConfig, SolutionRecord,
};
pub use qp::{AttractingPoint, QpProblem, QpSolution};
pub use refine::{refine, RefineConfig, RefineMode, RefineOutcome};
pub use regional::{regional_optimize, RegionalConfig, RegionalOutcome};
pub use steer::{GoalRegion, SteerResult};
pub use trajectory::{CostWeights, FlatState, Limits, PiecewiseTrajectory, PolySegment};
pub use vec3::Vec3;
