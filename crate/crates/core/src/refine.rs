//! Back-end refinement of a collision-free front-end trajectory.
//!
//! The front-end pieces (with long pieces subdivided) seed the same
//! solve / check / adjust loop as the regional optimizer. Attractors come
//! from time correspondence: a collision at `t_c` is pulled toward the
//! front-end position at `t_c`, which is known to be free, so no grid search
//! is needed.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::clock::WorkCounters;
use crate::deform::{self, CollisionResponse, Failure, IterationRecord, LoopSettings};
use crate::error::{Error, Result};
use crate::grid::{CollisionInterval, CollisionReport, OccupancyGrid};
use crate::qp::{AttractingPoint, QpProblem};
use crate::regional::attractor_window;
use crate::steer::STRETCH_FACTOR;
use crate::trajectory::{CostWeights, Limits, PiecewiseTrajectory};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineMode {
    /// Correspondence attractors on collision.
    Proposed,
    /// No attractors; the resemblance weight grows on collision.
    ResemblanceOnly,
    /// No attractors; the front-end position at the collision midpoint is
    /// pinned as a hard waypoint.
    FixedWaypoints,
}

impl RefineMode {
    pub const ALL: [RefineMode; 3] = [RefineMode::Proposed, RefineMode::ResemblanceOnly, RefineMode::FixedWaypoints];

    pub fn name(self) -> &'static str {
        match self {
            RefineMode::Proposed => "proposed",
            RefineMode::ResemblanceOnly => "resemblance_only",
            RefineMode::FixedWaypoints => "fixed_waypoints",
        }
    }
}

/// Which side of the correspondence pair the attractor extends past.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractorSide {
    /// `P_r + d · normalize(P_r − P_c)`: beyond the free front-end point.
    BeyondFrontend,
    /// `P_c + d · normalize(P_c − P_r)`: beyond the collision point.
    BeyondCollision,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineConfig {
    pub mode: RefineMode,
    pub weights: CostWeights,
    pub max_iterations: usize,
    pub stretch: f64,
    pub offset: f64,
    pub side: AttractorSide,
    /// Front-end pieces longer than this are split evenly.
    pub max_piece_duration: f64,
    pub window_extension: f64,
    /// Factor applied to `λ_r` after each colliding iterate in
    /// [`RefineMode::ResemblanceOnly`].
    pub resemblance_growth: f64,
    pub check_dt: Option<f64>,
    pub record_trace: bool,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            mode: RefineMode::Proposed,
            weights: CostWeights { rho: 100.0, lambda_s: 1.0, lambda_r: 0.01, lambda_c: 10.0 },
            max_iterations: 10,
            stretch: STRETCH_FACTOR,
            offset: 0.8,
            side: AttractorSide::BeyondFrontend,
            max_piece_duration: 0.5,
            window_extension: 1.0,
            resemblance_growth: 10.0,
            check_dt: None,
            record_trace: false,
        }
    }
}

impl RefineConfig {
    pub fn with_mode(mode: RefineMode) -> Self {
        RefineConfig { mode, ..RefineConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1"));
        }
        if !(self.stretch > 1.0) {
            return Err(Error::Config("stretch must exceed 1"));
        }
        if !(self.offset > 0.0) {
            return Err(Error::Config("attractor offset must be positive"));
        }
        if !(self.max_piece_duration > 0.0) {
            return Err(Error::Config("max piece duration must be positive"));
        }
        if !(self.resemblance_growth >= 1.0) {
            return Err(Error::Config("resemblance growth must be at least 1"));
        }
        Ok(())
    }

    fn effective_weights(&self) -> CostWeights {
        match self.mode {
            RefineMode::Proposed => self.weights,
            _ => CostWeights { lambda_c: 0.0, ..self.weights },
        }
    }
}

/// Unit vector normal to `v` (any normal when `v` vanishes).
fn normal_to(v: Vec3) -> Vec3 {
    let Some(u) = v.try_normalize() else {
        return Vec3::new(0.0, 0.0, 1.0);
    };
    let helper = if u.z.abs() < 0.9 { Vec3::new(0.0, 0.0, 1.0) } else { Vec3::new(1.0, 0.0, 0.0) };
    u.cross(helper).try_normalize().unwrap_or(Vec3::new(0.0, 1.0, 0.0))
}

/// Attractor position from the collision midpoint `pc` and its front-end
/// correspondent `pr`; `velocity` is the front-end velocity at that time.
pub fn correspondence_target(pc: Vec3, pr: Vec3, velocity: Vec3, offset: f64, side: AttractorSide) -> Vec3 {
    let dir = (pr - pc).try_normalize().unwrap_or_else(|| normal_to(velocity));
    match side {
        AttractorSide::BeyondFrontend => pr + dir * offset,
        AttractorSide::BeyondCollision => pc - dir * offset,
    }
}

/// Front-end time matching `t` on an iterate whose total duration is
/// `scale` times the front-end's.
fn frontend_time(frontend: &PiecewiseTrajectory, t: f64, scale: f64) -> f64 {
    (t / scale).clamp(0.0, frontend.duration())
}

/// Correspondence attractor for one collision interval of `current`.
pub fn select_attractor_backend(
    interval: &CollisionInterval,
    current: &PiecewiseTrajectory,
    frontend: &PiecewiseTrajectory,
    config: &RefineConfig,
) -> Option<AttractingPoint> {
    let scale = current.duration() / frontend.duration();
    let tf = frontend_time(frontend, interval.t_mid, scale);
    let state = frontend.state_at(tf);
    let target = correspondence_target(interval.midpoint, state.position, state.velocity, config.offset, config.side);
    let durations = current.durations();
    let piece = {
        let (i, _) = current.locate(interval.t_mid);
        durations[i]
    };
    let window = attractor_window(interval, piece, config.window_extension, current.duration());
    AttractingPoint::new(target, window, &durations).ok()
}

struct BackendResponse<'a> {
    frontend: &'a PiecewiseTrajectory,
    config: &'a RefineConfig,
}

/// Splits the piece containing `t` so a knot sits at `t`, reusing a knot
/// that is already within `tol`. Returns the internal knot index.
fn knot_at(problem: &mut QpProblem, t: f64, tol: f64) -> Option<usize> {
    let mut start = 0.0;
    for i in 0..problem.durations.len() {
        let d = problem.durations[i];
        let end = start + d;
        if t <= end || i + 1 == problem.durations.len() {
            let local = t - start;
            if local <= tol {
                return (i > 0).then_some(i);
            }
            if d - local <= tol {
                return (i + 1 < problem.durations.len()).then_some(i + 1);
            }
            let seg = problem.reference[i].clone();
            problem.durations.splice(i..=i, [local, d - local]);
            problem.reference.splice(i..=i, [seg.sub_segment(0.0, local), seg.sub_segment(local, d - local)]);
            if problem.waypoints.len() + 2 == problem.durations.len() {
                problem.waypoints.insert(i, None);
            } else {
                problem.waypoints.resize(problem.durations.len() - 1, None);
            }
            for ap in &mut problem.attractors {
                if ap.rewindow(&problem.durations).is_err() {
                    return None;
                }
            }
            return Some(i + 1);
        }
        start = end;
    }
    None
}

impl CollisionResponse for BackendResponse<'_> {
    fn respond(
        &mut self,
        problem: &mut QpProblem,
        iterate: &PiecewiseTrajectory,
        report: &CollisionReport,
        _work: &mut WorkCounters,
    ) -> bool {
        match self.config.mode {
            RefineMode::Proposed => {
                for interval in &report.intervals {
                    match select_attractor_backend(interval, iterate, self.frontend, self.config) {
                        Some(ap) => problem.attractors.push(ap),
                        None => return false,
                    }
                }
                true
            }
            RefineMode::ResemblanceOnly => {
                problem.weights.lambda_r *= self.config.resemblance_growth;
                self.config.resemblance_growth > 1.0
            }
            RefineMode::FixedWaypoints => {
                let scale = iterate.duration() / self.frontend.duration();
                let mut changed = false;
                for interval in &report.intervals {
                    let tol = 1e-3 * iterate.duration();
                    let Some(k) = knot_at(problem, interval.t_mid, tol) else {
                        continue;
                    };
                    let target = self.frontend.position(frontend_time(self.frontend, interval.t_mid, scale));
                    if problem.waypoints[k - 1] != Some(target) {
                        problem.waypoints[k - 1] = Some(target);
                        changed = true;
                    }
                }
                changed
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutcome {
    /// Refined trajectory; `None` means the front-end should be kept.
    pub refined: Option<PiecewiseTrajectory>,
    pub failure: Option<Failure>,
    pub iterations: usize,
    pub attractors: usize,
    pub work: WorkCounters,
    pub trace: Vec<IterationRecord>,
}

impl RefineOutcome {
    pub fn success(&self) -> bool {
        self.refined.is_some()
    }

    /// The refined trajectory, or `frontend` when refinement failed.
    pub fn trajectory_or<'a>(&'a self, frontend: &'a PiecewiseTrajectory) -> &'a PiecewiseTrajectory {
        self.refined.as_ref().unwrap_or(frontend)
    }
}

/// Refines `frontend` (collision-free and limit-feasible) under `config`.
pub fn refine(
    frontend: &PiecewiseTrajectory,
    grid: &OccupancyGrid,
    limits: &Limits,
    config: &RefineConfig,
) -> Result<RefineOutcome> {
    config.validate()?;
    if frontend.is_empty() {
        return Err(Error::InvalidArgument("front-end trajectory is empty"));
    }
    let reference = frontend.subdivided(config.max_piece_duration);
    let problem = QpProblem::from_reference(&reference, config.effective_weights());
    let settings = LoopSettings {
        max_iterations: config.max_iterations,
        stretch: config.stretch,
        check_dt: config.check_dt.unwrap_or_else(|| grid.default_check_dt(limits.v_max)),
        record_trace: config.record_trace,
    };
    let mut response = BackendResponse { frontend, config };
    let out = deform::run(problem, grid, limits, &settings, &mut response);
    Ok(RefineOutcome {
        refined: out.trajectory,
        failure: out.failure,
        iterations: out.iterations,
        attractors: out.problem.attractors.len(),
        work: out.work,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correspondence_arithmetic() {
        let pc = Vec3::new(1.0, 0.0, 0.0);
        let t = correspondence_target(pc, Vec3::ZERO, Vec3::ZERO, 0.5, AttractorSide::BeyondFrontend);
        assert_eq!(t, Vec3::new(-0.5, 0.0, 0.0));
        let u = correspondence_target(pc, Vec3::ZERO, Vec3::ZERO, 0.5, AttractorSide::BeyondCollision);
        assert_eq!(u, Vec3::new(1.5, 0.0, 0.0));
    }

    #[test]
    fn coincident_points_use_velocity_normal() {
        let v = Vec3::new(2.0, 0.0, 0.0);
        let t = correspondence_target(Vec3::ZERO, Vec3::ZERO, v, 0.5, AttractorSide::BeyondFrontend);
        assert!((t.norm() - 0.5).abs() < 1e-12);
        assert!(t.dot(v).abs() < 1e-12);
    }

    #[test]
    fn mode_names() {
        let names: Vec<&str> = RefineMode::ALL.iter().map(|m| m.name()).collect();
        assert_eq!(names, ["proposed", "resemblance_only", "fixed_waypoints"]);
    }
}
