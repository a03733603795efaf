//! Time accounting for planner budgets.
//!
//! Planners tally the work they perform in [`WorkCounters`] and ask a
//! [`Clock`] for the elapsed time. A wall clock ignores the counters; the
//! [`WorkClock`] converts them into modeled seconds so that budgeted runs
//! are reproducible bit-for-bit.

use core::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Operation tallies accumulated during planning.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounters {
    /// Optimal-cost evaluations (near sets, heuristics, informed pruning).
    pub bvp_costs: u64,
    /// Full steering calls including stretch iterations.
    pub steers: u64,
    /// Trajectory samples tested against the grid.
    pub collision_samples: u64,
    /// Closed-form QP solves, weighted by segment count.
    pub qp_segments: u64,
    /// Grid A* node expansions.
    pub astar_expansions: u64,
    /// Motion primitives generated by kA*.
    pub primitives: u64,
    /// Samples drawn (including rejected ones).
    pub samples: u64,
}

impl AddAssign for WorkCounters {
    fn add_assign(&mut self, o: WorkCounters) {
        self.bvp_costs += o.bvp_costs;
        self.steers += o.steers;
        self.collision_samples += o.collision_samples;
        self.qp_segments += o.qp_segments;
        self.astar_expansions += o.astar_expansions;
        self.primitives += o.primitives;
        self.samples += o.samples;
    }
}

/// Source of elapsed planning time in seconds.
pub trait Clock {
    fn elapsed(&self, work: &WorkCounters) -> f64;
}

/// Per-operation cost model in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkClock {
    pub bvp_cost: f64,
    pub steer: f64,
    pub collision_sample: f64,
    pub qp_segment: f64,
    pub astar_expansion: f64,
    pub primitive: f64,
    pub sample: f64,
}

impl Default for WorkClock {
    /// Costs measured on one core of an x86-64 build host with the release
    /// profile (see the `calibrate` CLI subcommand to remeasure).
    fn default() -> Self {
        WorkClock {
            bvp_cost: 2.1e-6,
            steer: 5.0e-6,
            collision_sample: 0.08e-6,
            qp_segment: 2.5e-6,
            astar_expansion: 0.37e-6,
            primitive: 0.06e-6,
            sample: 0.05e-6,
        }
    }
}

impl Clock for WorkClock {
    fn elapsed(&self, w: &WorkCounters) -> f64 {
        self.bvp_cost * w.bvp_costs as f64
            + self.steer * w.steers as f64
            + self.collision_sample * w.collision_samples as f64
            + self.qp_segment * w.qp_segments as f64
            + self.astar_expansion * w.astar_expansions as f64
            + self.primitive * w.primitives as f64
            + self.sample * w.samples as f64
    }
}
