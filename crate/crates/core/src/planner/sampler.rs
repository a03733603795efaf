//! State sampling for the tree and batch planners.
//!
//! Positions are drawn uniformly from a padded box around the start and goal
//! (clipped to the map). Once a solution exists, draws whose optimistic
//! start-to-sample plus sample-to-goal cost cannot beat it are rejected.
//! Velocities have uniform speed up to `v_max` and lean toward the goal;
//! accelerations are zero.

use core::f64::consts::PI;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clock::WorkCounters;
use crate::error::{Error, Result};
use crate::grid::OccupancyGrid;
use crate::steer::{self, GoalRegion};
use crate::trajectory::FlatState;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Padding of the sampling box around start and goal, per axis (m).
    pub padding: Vec3,
    /// Weight of the goal direction against a random direction (0..1).
    pub goal_bias: f64,
    /// Scale applied to the vertical velocity component.
    pub vertical_scale: f64,
    /// Draws per call before giving up.
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { padding: Vec3::new(5.0, 5.0, 1.0), goal_bias: 0.5, vertical_scale: 0.25, max_attempts: 200 }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.padding.x >= 0.0 && self.padding.y >= 0.0 && self.padding.z >= 0.0) {
            return Err(Error::Config("sampler padding must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) || !(0.0..=1.0).contains(&self.vertical_scale) {
            return Err(Error::Config("sampler weights must lie in [0, 1]"));
        }
        if self.max_attempts == 0 {
            return Err(Error::Config("sampler max_attempts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InformedSampler {
    pub lo: Vec3,
    pub hi: Vec3,
    pub start: FlatState,
    pub goal: GoalRegion,
    pub rho: f64,
    pub v_max: f64,
    pub config: SamplerConfig,
}

impl InformedSampler {
    pub fn new(grid: &OccupancyGrid, start: &FlatState, goal: &GoalRegion, rho: f64, v_max: f64, config: SamplerConfig) -> Self {
        let (gmin, gmax) = grid.bounds();
        let lo = start.position.component_min(goal.position) - config.padding;
        let hi = start.position.component_max(goal.position) + config.padding;
        let eps = 1e-9;
        InformedSampler {
            lo: lo.component_max(gmin + Vec3::splat(eps)),
            hi: hi.component_min(gmax - Vec3::splat(eps)),
            start: *start,
            goal: *goal,
            rho,
            v_max,
            config,
        }
    }

    /// Uniform position in the sampling box.
    pub fn sample_position(&self, rng: &mut impl Rng) -> Vec3 {
        Vec3::new(
            self.lo.x + rng.random::<f64>() * (self.hi.x - self.lo.x),
            self.lo.y + rng.random::<f64>() * (self.hi.y - self.lo.y),
            self.lo.z + rng.random::<f64>() * (self.hi.z - self.lo.z),
        )
    }

    /// Velocity with uniform speed in `[0, v_max]` leaning toward the goal.
    pub fn sample_velocity(&self, p: Vec3, rng: &mut impl Rng) -> Vec3 {
        let z: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).max(0.0).sqrt();
        let random_dir = Vec3::new(s * phi.cos(), s * phi.sin(), z);
        let goal_dir = (self.goal.position - p).try_normalize().unwrap_or(Vec3::ZERO);
        let b = self.config.goal_bias;
        let mut dir = (goal_dir * b + random_dir * (1.0 - b)).try_normalize().unwrap_or(random_dir);
        dir.z *= self.config.vertical_scale;
        dir * (rng.random::<f64>() * self.v_max)
    }

    /// Draws a free state; with `best_cost`, only states whose optimistic
    /// cost through them is below it. `None` after `max_attempts` draws.
    pub fn sample(
        &self,
        rng: &mut impl Rng,
        grid: &OccupancyGrid,
        best_cost: Option<f64>,
        work: &mut WorkCounters,
    ) -> Option<FlatState> {
        for _ in 0..self.config.max_attempts {
            work.samples += 1;
            let p = self.sample_position(rng);
            let v = self.sample_velocity(p, rng);
            if grid.is_occupied(p) {
                continue;
            }
            let x = FlatState::new(p, v, Vec3::ZERO);
            if let Some(best) = best_cost {
                work.bvp_costs += 2;
                if !self.could_improve(&x, best) {
                    continue;
                }
            }
            return Some(x);
        }
        None
    }

    /// Whether `h(start, x) + h(x, goal) ≤ best`.
    pub fn could_improve(&self, x: &FlatState, best: f64) -> bool {
        let h1 = steer::optimal_cost(&self.start, x, self.rho);
        if h1 > best {
            return false;
        }
        h1 + steer::optimal_cost_to_region(x, &self.goal, self.rho) <= best
    }
}
