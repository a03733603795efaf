//! Kinodynamic front-end planners: kRRT* and kFMT* with optional regional
//! optimization of colliding edges, and a motion-primitive kA* baseline.
//!
//! Budgets are measured by a [`Clock`]; the default [`WorkClock`] makes runs
//! reproducible by converting operation counts into modeled seconds.

mod kastar;
mod kfmt;
mod krrt;
pub mod sampler;

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, WorkClock, WorkCounters};
use crate::error::{Error, Result};
use crate::grid::{check_trajectory, CollisionReport, OccupancyGrid};
use crate::regional::{regional_optimize, RegionalConfig};
use crate::steer::{self, GoalRegion};
use crate::trajectory::{FlatState, Limits, PiecewiseTrajectory};

pub use kastar::{ka_star, ka_star_with_clock, primitive, PrimitiveSet};
pub use kfmt::{kfmt_star, kfmt_star_with_clock};
pub use krrt::{krrt_star, krrt_star_with_clock};
pub use sampler::{InformedSampler, SamplerConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Planning budget in seconds of the configured clock.
    pub time_budget: f64,
    pub rho: f64,
    pub limits: Limits,
    pub regional: RegionalConfig,
    pub enable_regional: bool,
    /// Also try regional optimization on rewiring edges.
    pub regional_in_rewire: bool,
    /// Maximum regional optimizations per sample (choose-parent plus rewire).
    pub regional_per_sample: usize,
    /// Keep improving after the first solution.
    pub anytime: bool,
    /// Near-set cost radius `r(n) = max(r_min, r₀ · (ln n / n)^(1/d))`.
    pub near_radius: f64,
    pub near_radius_min: f64,
    pub near_dimension: f64,
    /// Collision-fraction gate for regional optimization.
    pub kappa: f64,
    pub sampler: SamplerConfig,
    pub batch_size: usize,
    /// Jerk levels per axis for kA* primitives.
    pub primitive_levels: usize,
    pub primitive_duration: f64,
    /// kA* velocity bin width for duplicate detection.
    pub velocity_bin: f64,
    /// kA* attempts the analytic goal connection every this many expansions.
    pub goal_shot_interval: usize,
    pub check_dt: Option<f64>,
    pub seed: u64,
    pub clock: WorkClock,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            time_budget: 2.0,
            rho: 100.0,
            limits: Limits::default(),
            regional: RegionalConfig::default(),
            enable_regional: true,
            regional_in_rewire: true,
            regional_per_sample: 2,
            anytime: false,
            near_radius: 2000.0,
            near_radius_min: 400.0,
            near_dimension: 3.0,
            kappa: 0.4,
            sampler: SamplerConfig::default(),
            batch_size: 300,
            primitive_levels: 5,
            primitive_duration: 0.5,
            velocity_bin: 0.5,
            goal_shot_interval: 1,
            check_dt: None,
            seed: 0,
            clock: WorkClock::default(),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_budget > 0.0) {
            return Err(Error::Config("time_budget must be positive"));
        }
        if !(self.rho > 0.0) {
            return Err(Error::Config("rho must be positive"));
        }
        self.limits.validate()?;
        self.regional.validate()?;
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be at least 1"));
        }
        if !(self.near_radius > 0.0) || self.near_radius_min < 0.0 || !(self.near_dimension > 0.0) {
            return Err(Error::Config("near radius parameters must be positive"));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::Config("kappa must lie in [0, 1]"));
        }
        if self.primitive_levels < 2 || !(self.primitive_duration > 0.0) || !(self.velocity_bin > 0.0) {
            return Err(Error::Config("primitive parameters out of range"));
        }
        self.sampler.validate()
    }

    /// Near-set radius for a tree of `n` nodes.
    pub fn near_radius_for(&self, n: usize) -> f64 {
        if n < 2 {
            return self.near_radius;
        }
        let n = n as f64;
        (self.near_radius * (n.ln() / n).powf(1.0 / self.near_dimension)).max(self.near_radius_min)
    }

    pub fn check_dt(&self, grid: &OccupancyGrid) -> f64 {
        self.check_dt.unwrap_or_else(|| grid.default_check_dt(self.limits.v_max))
    }
}

/// Tree vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub state: FlatState,
    pub parent: Option<usize>,
    /// Edge from the parent; empty for the root.
    pub edge: PiecewiseTrajectory,
    pub edge_cost: f64,
    pub cost_to_come: f64,
    pub children: Vec<usize>,
}

/// A solution improvement at a clock time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub time: f64,
    pub cost: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    /// Sampling attempts, including rejected draws.
    pub samples_drawn: u64,
    pub samples_accepted: u64,
    pub nodes: u64,
    pub edges_checked: u64,
    pub ro_calls: u64,
    pub ro_successes: u64,
    pub expansions: u64,
    pub first_solution_time: Option<f64>,
    /// Clock time when planning stopped.
    pub planning_time: f64,
    pub work: WorkCounters,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanResult {
    pub trajectory: Option<PiecewiseTrajectory>,
    pub cost: Option<f64>,
    pub solutions: Vec<SolutionRecord>,
    pub stats: PlanStats,
    /// Cost-to-come of each expanded node in expansion order (kFMT*).
    pub expansion_costs: Vec<f64>,
}

impl PlanResult {
    pub fn success(&self) -> bool {
        self.trajectory.is_some()
    }
}

/// Whether a colliding edge is worth regional optimization: the colliding
/// share of its duration is at most `kappa` and its optimistic cost beats
/// `bound`.
pub fn need_optimize(edge_duration: f64, report: &CollisionReport, optimistic_cost: f64, bound: f64, kappa: f64) -> bool {
    !report.is_free() && report.total_duration() <= kappa * edge_duration && optimistic_cost < bound
}

/// Where an edge should end.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    State(&'a FlatState),
    Region(&'a GoalRegion),
}

/// A feasible edge and its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub trajectory: PiecewiseTrajectory,
    pub cost: f64,
    pub optimized: bool,
}

/// Edge construction with feasibility checks, regional optimization and
/// work accounting shared by the planners.
pub struct EdgeBuilder<'a> {
    pub grid: &'a OccupancyGrid,
    pub config: &'a PlannerConfig,
    pub check_dt: f64,
    pub stats: PlanStats,
    /// Regional optimizations left for the current sample.
    pub ro_allowance: usize,
}

impl<'a> EdgeBuilder<'a> {
    pub fn new(grid: &'a OccupancyGrid, config: &'a PlannerConfig) -> Self {
        EdgeBuilder { grid, config, check_dt: config.check_dt(grid), stats: PlanStats::default(), ro_allowance: usize::MAX }
    }

    pub fn work(&mut self) -> &mut WorkCounters {
        &mut self.stats.work
    }

    /// Unconstrained optimal cost between two states.
    pub fn lower_bound(&mut self, from: &FlatState, to: Target) -> f64 {
        self.stats.work.bvp_costs += 1;
        match to {
            Target::State(s) => steer::optimal_cost(from, s, self.config.rho),
            Target::Region(g) => steer::optimal_cost_to_region(from, g, self.config.rho),
        }
    }

    /// Steers `from → to` and returns a feasible edge cheaper than `bound`,
    /// using regional optimization on a gated collision when `allow_ro`.
    pub fn connect(&mut self, from: &FlatState, to: Target, bound: f64, allow_ro: bool) -> Option<Edge> {
        let cfg = self.config;
        let s = match to {
            Target::State(x) => steer::steer_with_limits(from, x, cfg.rho, &cfg.limits),
            Target::Region(g) => steer::steer_to_region(from, g, cfg.rho, &cfg.limits),
        };
        self.stats.work.steers += 1 + s.stretches as u64;
        if !s.feasible_derivatives || !(s.cost < bound) {
            return None;
        }
        self.stats.edges_checked += 1;
        let report = check_trajectory(&s.trajectory, self.grid, self.check_dt);
        self.stats.work.collision_samples += report.samples as u64;
        if report.is_free() {
            return Some(Edge { trajectory: s.trajectory, cost: s.cost, optimized: false });
        }
        if !(allow_ro && cfg.enable_regional && self.ro_allowance > 0) {
            return None;
        }
        if !need_optimize(s.tau, &report, s.cost, bound, cfg.kappa) {
            return None;
        }
        self.ro_allowance -= 1;
        self.stats.ro_calls += 1;
        let end = s.trajectory.end_state();
        let out = regional_optimize(from, &end, &s.trajectory, self.grid, &cfg.limits, &cfg.regional).ok()?;
        self.stats.work += out.work;
        let traj = out.trajectory?;
        let cost = traj.cost_time_energy(cfg.rho);
        if cost < bound {
            self.stats.ro_successes += 1;
            Some(Edge { trajectory: traj, cost, optimized: true })
        } else {
            None
        }
    }
}

/// Best parent among `candidates` for a new state `x`: candidates are tried
/// in order of optimistic total cost, stopping once no candidate can win.
pub fn choose_parent(
    nodes: &[TreeNode],
    candidates: &[usize],
    x: &FlatState,
    edges: &mut EdgeBuilder,
) -> Option<(usize, Edge)> {
    let mut order: Vec<(f64, usize)> = candidates
        .iter()
        .map(|&i| (nodes[i].cost_to_come + edges.lower_bound(&nodes[i].state, Target::State(x)), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(usize, Edge)> = None;
    let mut min_cost = f64::INFINITY;
    for (optimistic, i) in order {
        if optimistic >= min_cost {
            break;
        }
        let base = nodes[i].cost_to_come;
        if let Some(e) = edges.connect(&nodes[i].state, Target::State(x), min_cost - base, true) {
            min_cost = base + e.cost;
            best = Some((i, e));
        }
    }
    best
}

/// Per-axis displacement bound for an edge of cost at most `r` leaving `x`.
fn reach_bound(x: &FlatState, rho: f64, r: f64) -> [f64; 3] {
    let tau = r / rho;
    let drift = (2.0 * r).sqrt() * tau.powf(2.5) / 20f64.sqrt();
    let mut b = [0.0; 3];
    for (k, bk) in b.iter_mut().enumerate() {
        *bk = x.velocity[k].abs() * tau + 0.5 * x.acceleration[k].abs() * tau * tau + drift;
    }
    b
}

/// Whether `from → to` could cost at most `r` (necessary condition).
pub fn maybe_within(from: &FlatState, to: &FlatState, rho: f64, r: f64) -> bool {
    let b = reach_bound(from, rho, r);
    let d = to.position - from.position;
    (0..3).all(|k| d[k].abs() <= b[k])
}

/// Concatenates the edges from the root to `node`.
pub fn path_to(nodes: &[TreeNode], node: usize) -> PiecewiseTrajectory {
    let mut chain = Vec::new();
    let mut cur = Some(node);
    while let Some(i) = cur {
        chain.push(i);
        cur = nodes[i].parent;
    }
    let mut out = PiecewiseTrajectory::new(Vec::new());
    for &i in chain.iter().rev() {
        out.append(&nodes[i].edge);
    }
    out
}

fn check_start(start: &FlatState, grid: &OccupancyGrid, config: &PlannerConfig) -> Result<()> {
    config.validate()?;
    if !start.is_finite() || !start.within_limits(&config.limits) || grid.is_occupied(start.position) {
        return Err(Error::InvalidStart);
    }
    Ok(())
}

fn elapsed(clock: &dyn Clock, stats: &PlanStats) -> f64 {
    clock.elapsed(&stats.work)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CollisionInterval;
    use crate::vec3::Vec3;

    fn report(duration: f64) -> CollisionReport {
        CollisionReport {
            intervals: alloc::vec![CollisionInterval {
                t_start: 1.0,
                t_end: 1.0 + duration,
                t_mid: 1.0 + 0.5 * duration,
                midpoint: Vec3::ZERO,
                free_before: None,
                free_after: None,
            }],
            samples: 10,
        }
    }

    #[test]
    fn gate_rejects_full_collision() {
        assert!(!need_optimize(2.0, &report(2.0), 10.0, 20.0, 0.4));
    }

    #[test]
    fn gate_accepts_small_nick() {
        assert!(need_optimize(2.0, &report(0.1), 10.0, 20.0, 0.4));
        assert!(!need_optimize(2.0, &report(0.1), 30.0, 20.0, 0.4));
        assert!(!need_optimize(2.0, &CollisionReport::default(), 10.0, 20.0, 0.4));
    }

    #[test]
    fn radius_shrinks_to_floor() {
        let c = PlannerConfig::default();
        assert_eq!(c.near_radius_for(1), c.near_radius);
        assert!(c.near_radius_for(100) < c.near_radius);
        assert_eq!(c.near_radius_for(1_000_000_000), c.near_radius_min);
    }
}
