//! Iterative solve / check / adjust loop shared by the regional optimizer and
//! the back-end refiner.
//!
//! Each iteration applies any pending time stretch, solves the QP in closed
//! form, then checks derivative limits and collisions. A limit violation
//! schedules a stretch of every duration by `γ`; collisions are handed to a
//! [`CollisionResponse`], which edits the problem (adds attractors, pins
//! waypoints, reweights) before the next solve.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::clock::WorkCounters;
use crate::error::Result;
use crate::grid::{check_trajectory, CollisionReport, OccupancyGrid};
use crate::qp::{solve_closed_form, QpProblem};
use crate::trajectory::{Limits, PiecewiseTrajectory};

/// Slack allowed on derivative limits when accepting an iterate.
pub const LIMIT_SLACK: f64 = 1e-6;

/// Edits the problem after the current iterate collided.
pub trait CollisionResponse {
    /// Returns `false` when no useful change could be made (the loop stops).
    fn respond(
        &mut self,
        problem: &mut QpProblem,
        iterate: &PiecewiseTrajectory,
        report: &CollisionReport,
        work: &mut WorkCounters,
    ) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSettings {
    pub max_iterations: usize,
    pub stretch: f64,
    pub check_dt: f64,
    pub record_trace: bool,
}

/// Why a loop ended without a feasible trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    IterationsExhausted,
    NoResponse,
    Numerical,
}

/// One solve of the loop, kept when tracing is on.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub trajectory: PiecewiseTrajectory,
    pub attractor_count: usize,
    pub within_limits: bool,
    pub collisions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoopOutcome {
    pub trajectory: Option<PiecewiseTrajectory>,
    pub failure: Option<Failure>,
    /// Closed-form solves performed.
    pub iterations: usize,
    pub stretches: usize,
    pub problem: QpProblem,
    pub work: WorkCounters,
    pub trace: Vec<IterationRecord>,
}

/// Multiplies every duration (and the reference and attractor windows) by `gamma`.
pub fn stretch_problem(problem: &mut QpProblem, gamma: f64) -> Result<()> {
    for d in &mut problem.durations {
        *d *= gamma;
    }
    for seg in &mut problem.reference {
        *seg = seg.time_scaled(gamma);
    }
    for ap in &mut problem.attractors {
        ap.window = (ap.window.0 * gamma, ap.window.1 * gamma);
        ap.rewindow(&problem.durations)?;
    }
    Ok(())
}

/// Runs the loop from `problem` until a collision-free, limit-feasible
/// iterate appears or the iteration budget is spent.
pub fn run(
    mut problem: QpProblem,
    grid: &OccupancyGrid,
    limits: &Limits,
    settings: &LoopSettings,
    response: &mut impl CollisionResponse,
) -> LoopOutcome {
    let mut work = WorkCounters::default();
    let mut trace = Vec::new();
    let mut pending_stretch = false;
    let mut stretches = 0;
    let mut iterations = 0;
    let mut failure = Failure::IterationsExhausted;

    while iterations < settings.max_iterations {
        if pending_stretch {
            if stretch_problem(&mut problem, settings.stretch).is_err() {
                failure = Failure::Numerical;
                break;
            }
            stretches += 1;
        }
        iterations += 1;
        work.qp_segments += problem.segment_count() as u64;
        let Ok(sol) = solve_closed_form(&problem) else {
            failure = Failure::Numerical;
            break;
        };
        let traj = sol.trajectory;
        let feasible = traj.within_limits(limits, LIMIT_SLACK);
        let report = check_trajectory(&traj, grid, settings.check_dt);
        work.collision_samples += report.samples as u64;
        if settings.record_trace {
            trace.push(IterationRecord {
                trajectory: traj.clone(),
                attractor_count: problem.attractors.len(),
                within_limits: feasible,
                collisions: report.intervals.len(),
            });
        }
        if feasible && report.is_free() {
            return LoopOutcome {
                trajectory: Some(traj),
                failure: None,
                iterations,
                stretches,
                problem,
                work,
                trace,
            };
        }
        pending_stretch = !feasible;
        if !report.is_free() && !response.respond(&mut problem, &traj, &report, &mut work) {
            failure = Failure::NoResponse;
            break;
        }
    }
    LoopOutcome { trajectory: None, failure: Some(failure), iterations, stretches, problem, work, trace }
}
