//! Closed-form time/energy-optimal steering between flat states.
//!
//! For a fixed duration `τ` the jerk-energy optimum between two full states
//! is the unique quintic per axis. Its energy is `Σₖ qₖ τᵏ / τ⁵` with
//! `qₖ` quadratic in the boundary values, so the total cost
//! `J(τ) = ρτ + ½·energy(τ)` has a stationarity condition that is a sextic
//! in `τ`; `τ*` is the positive root of least cost.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{self, NCOEF};
use crate::trajectory::{FlatState, Limits, PiecewiseTrajectory, PolySegment};
use crate::vec3::Vec3;

/// Smallest transition time considered.
pub const TAU_MIN: f64 = 1e-3;
/// Geometric growth applied to `τ` when derivative limits are violated.
pub const STRETCH_FACTOR: f64 = 1.2;
/// Number of stretches before an edge is declared infeasible.
pub const MAX_STRETCH: usize = 10;

/// Output of a steering call.
#[derive(Clone, Debug, PartialEq)]
pub struct SteerResult {
    pub trajectory: PiecewiseTrajectory,
    pub tau: f64,
    /// `ρτ + ½∫‖jerk‖²`.
    pub cost: f64,
    pub feasible_derivatives: bool,
    pub stretches: usize,
}

/// Target region for the final state.
///
/// Position and velocity are matched exactly; acceleration is free on every
/// axis flagged in `free_acceleration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub free_acceleration: [bool; 3],
    pub tolerance: f64,
}

impl GoalRegion {
    /// Stop at `position` with free final acceleration.
    pub fn at_rest(position: Vec3) -> Self {
        GoalRegion {
            position,
            velocity: Vec3::ZERO,
            acceleration: Vec3::ZERO,
            free_acceleration: [true; 3],
            tolerance: 0.0,
        }
    }

    /// Region that pins the full state.
    pub fn exact(state: FlatState) -> Self {
        GoalRegion {
            position: state.position,
            velocity: state.velocity,
            acceleration: state.acceleration,
            free_acceleration: [false; 3],
            tolerance: 0.0,
        }
    }

    pub fn contains(&self, s: &FlatState) -> bool {
        let tol = self.tolerance.max(1e-6);
        if s.position.distance(self.position) > tol || (s.velocity - self.velocity).norm_inf() > 1e-6 {
            return false;
        }
        (0..3).all(|k| self.free_acceleration[k] || (s.acceleration[k] - self.acceleration[k]).abs() <= 1e-6)
    }

    fn target_state(&self) -> FlatState {
        FlatState::new(self.position, self.velocity, self.acceleration)
    }
}

#[derive(Clone, Copy)]
struct AxisBoundary {
    p0: f64,
    v0: f64,
    a0: f64,
    p1: f64,
    v1: f64,
    a1: f64,
    free_a1: bool,
}

impl AxisBoundary {
    fn new(x0: &FlatState, x1: &FlatState, axis: usize, free_a1: bool) -> Self {
        AxisBoundary {
            p0: x0.position[axis],
            v0: x0.velocity[axis],
            a0: x0.acceleration[axis],
            p1: x1.position[axis],
            v1: x1.velocity[axis],
            a1: x1.acceleration[axis],
            free_a1,
        }
    }

    /// `τ⁵ · ∫₀^τ jerk² dt` as ascending coefficients `q₀..q₄` in `τ`.
    fn energy_numerator(&self) -> [f64; 5] {
        let AxisBoundary { v0, a0, v1, a1, .. } = *self;
        let d = self.p1 - self.p0;
        if self.free_a1 {
            [
                320.0 * d * d,
                -d * (400.0 * v0 + 240.0 * v1),
                -80.0 * a0 * d + 128.0 * v0 * v0 + 144.0 * v0 * v1 + 48.0 * v1 * v1,
                56.0 * a0 * v0 + 24.0 * a0 * v1,
                8.0 * a0 * a0,
            ]
        } else {
            [
                720.0 * d * d,
                -720.0 * d * (v0 + v1),
                120.0 * d * (a1 - a0) + 192.0 * v0 * v0 + 336.0 * v0 * v1 + 192.0 * v1 * v1,
                72.0 * a0 * v0 + 48.0 * a0 * v1 - 48.0 * a1 * v0 - 72.0 * a1 * v1,
                9.0 * a0 * a0 - 6.0 * a0 * a1 + 9.0 * a1 * a1,
            ]
        }
    }

    fn coeffs(&self, tau: f64) -> [f64; NCOEF] {
        let AxisBoundary { p0, v0, a0, p1, v1, a1, .. } = *self;
        let (t, t2) = (tau, tau * tau);
        let d = p1 - p0;
        let (c3, c4, c5) = if self.free_a1 {
            (
                2.0 * (-2.0 * t2 * a0 - 7.0 * t * v0 - 3.0 * t * v1 + 10.0 * d) / (3.0 * t2 * t),
                (7.0 * t2 * a0 + 32.0 * t * v0 + 18.0 * t * v1 - 50.0 * d) / (6.0 * t2 * t2),
                (-t2 * a0 - 5.0 * t * v0 - 3.0 * t * v1 + 8.0 * d) / (3.0 * t2 * t2 * t),
            )
        } else {
            (
                (-3.0 * t2 * a0 + t2 * a1 - 12.0 * t * v0 - 8.0 * t * v1 + 20.0 * d) / (2.0 * t2 * t),
                (1.5 * t2 * a0 - t2 * a1 + 8.0 * t * v0 + 7.0 * t * v1 - 15.0 * d) / (t2 * t2),
                (-t2 * a0 + t2 * a1 - 6.0 * t * v0 - 6.0 * t * v1 + 12.0 * d) / (2.0 * t2 * t2 * t),
            )
        };
        [p0, v0, 0.5 * a0, c3, c4, c5]
    }
}

/// Sum over axes of the energy numerators.
fn total_numerator(bounds: &[AxisBoundary; 3]) -> [f64; 5] {
    let mut q = [0.0; 5];
    for b in bounds {
        for (qi, bi) in q.iter_mut().zip(b.energy_numerator()) {
            *qi += bi;
        }
    }
    q
}

fn cost_at(q: &[f64; 5], rho: f64, tau: f64) -> f64 {
    rho * tau + 0.5 * poly::eval(q, tau) / tau.powi(5)
}

fn optimal_tau(q: &[f64; 5], rho: f64) -> f64 {
    if q.iter().all(|&v| v.abs() < 1e-300) {
        return TAU_MIN;
    }
    // τ⁶ · dJ/dτ
    let deriv = [-2.5 * q[0], -2.0 * q[1], -1.5 * q[2], -q[3], -0.5 * q[4], 0.0, rho];
    let cauchy = 1.0 + deriv[..6].iter().map(|a| a.abs() / rho).fold(0.0, f64::max);
    let hi = cauchy.max(2.0 * TAU_MIN);
    let mut best = (cost_at(q, rho, TAU_MIN), TAU_MIN);
    if poly::sign_changes(&deriv) == 1 {
        // single positive stationary point: the cost falls then rises
        if let Some(r) = poly::bracketed_root(&deriv, TAU_MIN, hi) {
            if cost_at(q, rho, r) < best.0 {
                best.1 = r;
            }
            return best.1;
        }
    }
    let mut found = false;
    for r in poly::real_roots(&deriv, TAU_MIN, hi) {
        found = true;
        let c = cost_at(q, rho, r);
        if c < best.0 {
            best = (c, r);
        }
    }
    if !found {
        let t = poly::golden_section(|t| cost_at(q, rho, t), TAU_MIN, hi, 1e-10 * hi);
        if cost_at(q, rho, t) < best.0 {
            best.1 = t;
        }
    }
    best.1
}

fn boundaries(x0: &FlatState, x1: &FlatState, free: [bool; 3]) -> [AxisBoundary; 3] {
    [
        AxisBoundary::new(x0, x1, 0, free[0]),
        AxisBoundary::new(x0, x1, 1, free[1]),
        AxisBoundary::new(x0, x1, 2, free[2]),
    ]
}

fn segment_for(bounds: &[AxisBoundary; 3], tau: f64) -> PolySegment {
    PolySegment::new([bounds[0].coeffs(tau), bounds[1].coeffs(tau), bounds[2].coeffs(tau)], tau)
}

fn is_degenerate(x0: &FlatState, x1: &FlatState) -> bool {
    x0.position == x1.position
        && x0.velocity == Vec3::ZERO
        && x1.velocity == Vec3::ZERO
        && x0.acceleration == Vec3::ZERO
        && x1.acceleration == Vec3::ZERO
}

/// Minimum-jerk-energy quintic matching both full states over `tau`.
pub fn solve_fixed_tau(x0: &FlatState, x1: &FlatState, tau: f64) -> Result<PolySegment> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument("transition time must be positive"));
    }
    Ok(segment_for(&boundaries(x0, x1, [false; 3]), tau))
}

/// Unconstrained optimal cost `J(τ*)` from `x0` to `x1` without building the trajectory.
pub fn optimal_cost(x0: &FlatState, x1: &FlatState, rho: f64) -> f64 {
    let q = total_numerator(&boundaries(x0, x1, [false; 3]));
    cost_at(&q, rho, optimal_tau(&q, rho))
}

/// Unconstrained optimal cost from `x0` into `region`.
pub fn optimal_cost_to_region(x0: &FlatState, region: &GoalRegion, rho: f64) -> f64 {
    let q = total_numerator(&boundaries(x0, &region.target_state(), region.free_acceleration));
    cost_at(&q, rho, optimal_tau(&q, rho))
}

/// Cost `J(τ)` of the fixed-duration optimum.
pub fn cost_for_tau(x0: &FlatState, x1: &FlatState, rho: f64, tau: f64) -> f64 {
    cost_at(&total_numerator(&boundaries(x0, x1, [false; 3])), rho, tau)
}

fn solve_free_time(x0: &FlatState, x1: &FlatState, free: [bool; 3], rho: f64) -> SteerResult {
    let bounds = boundaries(x0, x1, free);
    if is_degenerate(x0, x1) && free.iter().all(|f| !f) {
        let traj = PiecewiseTrajectory::from_segment(PolySegment::hold(x0.position, TAU_MIN));
        return SteerResult {
            trajectory: traj,
            tau: TAU_MIN,
            cost: rho * TAU_MIN,
            feasible_derivatives: true,
            stretches: 0,
        };
    }
    let q = total_numerator(&bounds);
    let tau = optimal_tau(&q, rho);
    SteerResult {
        trajectory: PiecewiseTrajectory::from_segment(segment_for(&bounds, tau)),
        tau,
        cost: cost_at(&q, rho, tau),
        feasible_derivatives: true,
        stretches: 0,
    }
}

/// Free-time optimal steering between two full states, ignoring limits.
pub fn solve_fixed_bvp(x0: &FlatState, x1: &FlatState, rho: f64) -> SteerResult {
    solve_free_time(x0, x1, [false; 3], rho)
}

fn stretch_until_feasible(
    bounds: &[AxisBoundary; 3],
    mut result: SteerResult,
    rho: f64,
    limits: &Limits,
) -> SteerResult {
    let q = total_numerator(bounds);
    let mut tau = result.tau;
    for stretches in 0..=MAX_STRETCH {
        let seg = segment_for(bounds, tau);
        let traj = PiecewiseTrajectory::from_segment(seg);
        let ok = traj.within_limits(limits, 1e-9);
        if ok || stretches == MAX_STRETCH {
            result.trajectory = traj;
            result.tau = tau;
            result.cost = cost_at(&q, rho, tau);
            result.feasible_derivatives = ok;
            result.stretches = stretches;
            return result;
        }
        tau *= STRETCH_FACTOR;
    }
    unreachable!()
}

/// Optimal steering followed by time stretching until limits hold.
pub fn steer_with_limits(x0: &FlatState, x1: &FlatState, rho: f64, limits: &Limits) -> SteerResult {
    let base = solve_fixed_bvp(x0, x1, rho);
    if is_degenerate(x0, x1) {
        return base;
    }
    stretch_until_feasible(&boundaries(x0, x1, [false; 3]), base, rho, limits)
}

/// Steering into a goal region, with free final acceleration where flagged.
pub fn steer_to_region(x0: &FlatState, region: &GoalRegion, rho: f64, limits: &Limits) -> SteerResult {
    let target = region.target_state();
    let base = solve_free_time(x0, &target, region.free_acceleration, rho);
    if is_degenerate(x0, &target) && region.free_acceleration.iter().all(|f| !f) {
        return base;
    }
    stretch_until_feasible(&boundaries(x0, &target, region.free_acceleration), base, rho, limits)
}

/// All candidate stationary durations of `J`, for diagnostics.
pub fn stationary_durations(x0: &FlatState, x1: &FlatState, rho: f64) -> Vec<f64> {
    let q = total_numerator(&boundaries(x0, x1, [false; 3]));
    let deriv = [-2.5 * q[0], -2.0 * q[1], -1.5 * q[2], -q[3], -0.5 * q[4], 0.0, rho];
    let hi = 1.0 + deriv[..6].iter().map(|a| a.abs() / rho).fold(0.0, f64::max);
    poly::real_roots(&deriv, TAU_MIN, hi)
}
