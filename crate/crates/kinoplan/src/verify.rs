//! Post-hoc verification of planner and refiner output, written without the
//! planners' own collision and limit routines: positions and derivatives
//! are sampled densely and tested cell by cell.

use kinoplan_core::{FlatState, Limits, OccupancyGrid, PiecewiseTrajectory};

/// Slack on the per-axis derivative bounds.
pub const LIMIT_SLACK: f64 = 1e-6;
/// Tolerance on value, velocity and acceleration jumps at knots.
pub const CONTINUITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("empty trajectory")]
    Empty,
    #[error("collision at t = {t:.4}")]
    Collision { t: f64 },
    #[error("order-{order} derivative {value:.6} exceeds {bound} at t = {t:.4}")]
    Limit { order: usize, value: f64, bound: f64, t: f64 },
    #[error("order-{order} jump {jump:.3e} at knot {knot}")]
    Discontinuity { order: usize, jump: f64, knot: usize },
    #[error("endpoint off by {error:.3e}")]
    Endpoint { error: f64 },
    #[error("non-finite coefficients")]
    NonFinite,
}

/// Oversampled collision, per-axis limit and C² continuity check.
/// `check_dt` is the planners' collision step; sampling uses a tenth of it.
pub fn verify_trajectory(
    traj: &PiecewiseTrajectory,
    grid: &OccupancyGrid,
    limits: &Limits,
    check_dt: f64,
) -> Result<(), Violation> {
    if traj.is_empty() {
        return Err(Violation::Empty);
    }
    if traj.segments.iter().any(|s| s.coeffs.iter().flatten().any(|c| !c.is_finite()) || !s.duration.is_finite()) {
        return Err(Violation::NonFinite);
    }
    for (k, w) in traj.segments.windows(2).enumerate() {
        for order in 0..3 {
            let jump = (w[0].eval(w[0].duration, order) - w[1].eval(0.0, order)).norm_inf();
            if jump > CONTINUITY_TOL {
                return Err(Violation::Discontinuity { order, jump, knot: k + 1 });
            }
        }
    }
    let dt = check_dt / 10.0;
    let mut offset = 0.0;
    for seg in &traj.segments {
        let n = (seg.duration / dt).ceil().max(1.0) as usize;
        for i in 0..=n {
            let t = seg.duration * i as f64 / n as f64;
            if grid.is_occupied(seg.eval(t, 0)) {
                return Err(Violation::Collision { t: offset + t });
            }
            for order in 1..4 {
                let bound = limits.bound(order);
                let value = seg.eval(t, order).norm_inf();
                if value > bound + LIMIT_SLACK {
                    return Err(Violation::Limit { order, value, bound, t: offset + t });
                }
            }
        }
        offset += seg.duration;
    }
    Ok(())
}

/// Largest position, velocity or acceleration difference at the two ends.
pub fn endpoint_error(traj: &PiecewiseTrajectory, start: &FlatState, end: &FlatState) -> f64 {
    traj.start_state().max_abs_diff(start).max(traj.end_state().max_abs_diff(end))
}
