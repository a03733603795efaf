//! Regional optimization of a single colliding steering edge.
//!
//! The edge is divided into equal pieces and deformed by the closed-form QP.
//! Every collision interval of the current iterate gets one new attracting
//! point placed past the midpoint of a local grid A* detour; earlier
//! attractors are kept.

use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::clock::WorkCounters;
use crate::deform::{self, CollisionResponse, Failure, IterationRecord, LoopSettings};
use crate::error::{Error, Result};
use crate::grid::{local_astar_with_stats, BoundBox, CollisionInterval, CollisionReport, OccupancyGrid};
use crate::qp::{AttractingPoint, QpProblem};
use crate::steer::STRETCH_FACTOR;
use crate::trajectory::{split_uniform, CostWeights, FlatState, Limits, PiecewiseTrajectory};
use crate::vec3::Vec3;

/// How far from the collision midpoint `P_c` an attractor is placed along
/// the direction to the detour midpoint `P_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum OffsetRule {
    /// Constant distance from `P_c`.
    Fixed { distance: f64 },
    /// `‖P_m − P_c‖ + extra`, i.e. `extra` beyond the detour midpoint.
    PastMidpoint { extra: f64 },
}

impl OffsetRule {
    pub fn distance(&self, pc: Vec3, pm: Vec3) -> f64 {
        match *self {
            OffsetRule::Fixed { distance } => distance,
            OffsetRule::PastMidpoint { extra } => pm.distance(pc) + extra,
        }
    }

    fn magnitude(&self) -> f64 {
        match *self {
            OffsetRule::Fixed { distance } => distance,
            OffsetRule::PastMidpoint { extra } => extra,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionalConfig {
    /// Fixed piece count; `None` picks one piece per `piece_duration`.
    pub pieces: Option<usize>,
    pub piece_duration: f64,
    pub min_pieces: usize,
    pub max_pieces: usize,
    pub max_iterations: usize,
    pub stretch: f64,
    pub offset: OffsetRule,
    pub weights: CostWeights,
    /// Padding of the A* search box around the interval, in cells.
    pub astar_padding_cells: usize,
    /// Attractor window extension on each side, in pieces.
    pub window_extension: f64,
    /// Collision-check step; `None` uses one cell at `v_max`.
    pub check_dt: Option<f64>,
    pub record_trace: bool,
}

impl Default for RegionalConfig {
    fn default() -> Self {
        RegionalConfig {
            pieces: None,
            piece_duration: 0.5,
            min_pieces: 4,
            max_pieces: 12,
            max_iterations: 10,
            stretch: STRETCH_FACTOR,
            offset: OffsetRule::PastMidpoint { extra: 0.45 },
            weights: CostWeights::default(),
            astar_padding_cells: 10,
            window_extension: 1.0,
            check_dt: None,
            record_trace: false,
        }
    }
}

impl RegionalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be at least 1"));
        }
        if !(self.stretch > 1.0) {
            return Err(Error::Config("stretch must exceed 1"));
        }
        if !(self.offset.magnitude() > 0.0) {
            return Err(Error::Config("attractor offset must be positive"));
        }
        if self.pieces == Some(0) || self.min_pieces == 0 || self.min_pieces > self.max_pieces {
            return Err(Error::Config("piece counts must be positive and ordered"));
        }
        if !(self.piece_duration > 0.0) || self.window_extension < 0.0 {
            return Err(Error::Config("piece duration must be positive"));
        }
        Ok(())
    }

    /// Piece count for an edge of duration `tau`.
    pub fn piece_count(&self, tau: f64) -> usize {
        self.pieces.unwrap_or_else(|| {
            let n = (tau / self.piece_duration).round() as usize;
            n.clamp(self.min_pieces, self.max_pieces)
        })
    }

    pub fn check_dt(&self, grid: &OccupancyGrid, limits: &Limits) -> f64 {
        self.check_dt.unwrap_or_else(|| grid.default_check_dt(limits.v_max))
    }
}

/// `P_c + distance · normalize(P_m − P_c)`.
pub fn attractor_position(pc: Vec3, pm: Vec3, rule: OffsetRule) -> Option<Vec3> {
    let dir = (pm - pc).try_normalize()?;
    Some(pc + dir * rule.distance(pc, pm))
}

/// Attractor window: the interval grown by `extension · piece` on both sides,
/// shrunk symmetrically where it would leave `[0, total]`.
pub fn attractor_window(interval: &CollisionInterval, piece: f64, extension: f64, total: f64) -> (f64, f64) {
    let grow = (extension * piece).min(interval.t_start).min(total - interval.t_end).max(0.0);
    let (ts, te) = (interval.t_start - grow, interval.t_end + grow);
    if te - ts > 1e-9 {
        return (ts, te);
    }
    // point-like interval at a boundary: keep the midpoint, widen inside [0, total]
    let half = (0.5 * piece).min(interval.t_mid).min(total - interval.t_mid).max(1e-6);
    (interval.t_mid - half, interval.t_mid + half)
}

fn piece_at(durations: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for &d in durations {
        acc += d;
        if t <= acc {
            return d;
        }
    }
    durations.last().copied().unwrap_or(0.0)
}

/// Grid-guided attractor for one collision interval of `traj`.
///
/// Returns `None` when the detour search fails.
pub fn select_attractor_frontend(
    interval: &CollisionInterval,
    traj: &PiecewiseTrajectory,
    grid: &OccupancyGrid,
    config: &RegionalConfig,
    work: &mut WorkCounters,
) -> Option<AttractingPoint> {
    let p1 = interval.free_before.map_or_else(|| traj.position(0.0), |(_, p)| p);
    let p2 = interval.free_after.map_or_else(|| traj.position(traj.duration()), |(_, p)| p);
    let pc = interval.midpoint;
    let pad = config.astar_padding_cells as f64 * grid.resolution();
    let astar = local_astar_with_stats(grid, p1, p2, BoundBox::around(&[p1, p2, pc], pad));
    work.astar_expansions += astar.expansions as u64;
    if astar.path.is_empty() {
        return None;
    }
    let pm = path_midpoint(&astar.path);
    let mut pos = attractor_position(pc, pm, config.offset)?;
    // back off toward the (free) detour midpoint if the target is occupied
    let dir = (pm - pc).try_normalize()?;
    let mut dist = config.offset.distance(pc, pm);
    let floor = pm.distance(pc);
    while grid.is_occupied(pos) && dist > floor {
        dist = (dist - 0.5 * grid.resolution()).max(floor);
        pos = pc + dir * dist;
    }
    if grid.is_occupied(pos) {
        pos = pm;
    }
    let durations = traj.durations();
    let window = attractor_window(
        interval,
        piece_at(&durations, interval.t_mid),
        config.window_extension,
        traj.duration(),
    );
    AttractingPoint::new(pos, window, &durations).ok()
}

/// Point halfway along a polyline by arc length.
pub fn path_midpoint(path: &[Vec3]) -> Vec3 {
    let total: f64 = path.windows(2).map(|w| w[0].distance(w[1])).sum();
    let mut remaining = 0.5 * total;
    for w in path.windows(2) {
        let l = w[0].distance(w[1]);
        if l >= remaining && l > 0.0 {
            return w[0] + (w[1] - w[0]) * (remaining / l);
        }
        remaining -= l;
    }
    path[path.len() / 2]
}

struct FrontendResponse<'a> {
    grid: &'a OccupancyGrid,
    config: &'a RegionalConfig,
}

impl CollisionResponse for FrontendResponse<'_> {
    fn respond(
        &mut self,
        problem: &mut QpProblem,
        iterate: &PiecewiseTrajectory,
        report: &CollisionReport,
        work: &mut WorkCounters,
    ) -> bool {
        for interval in &report.intervals {
            match select_attractor_frontend(interval, iterate, self.grid, self.config, work) {
                Some(ap) => problem.attractors.push(ap),
                None => return false,
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionalOutcome {
    pub trajectory: Option<PiecewiseTrajectory>,
    pub failure: Option<Failure>,
    pub iterations: usize,
    pub attractors: Vec<AttractingPoint>,
    pub work: WorkCounters,
    pub trace: Vec<IterationRecord>,
}

impl RegionalOutcome {
    pub fn success(&self) -> bool {
        self.trajectory.is_some()
    }
}

/// Deforms the colliding edge `seed` from `x1` to `x2` into a collision-free,
/// limit-feasible trajectory with the same endpoint states.
pub fn regional_optimize(
    x1: &FlatState,
    x2: &FlatState,
    seed: &PiecewiseTrajectory,
    grid: &OccupancyGrid,
    limits: &Limits,
    config: &RegionalConfig,
) -> Result<RegionalOutcome> {
    config.validate()?;
    if seed.is_empty() {
        return Err(Error::InvalidArgument("seed trajectory is empty"));
    }
    let reference = if seed.segments.len() == 1 {
        split_uniform(&seed.segments[0], config.piece_count(seed.duration()))
    } else {
        seed.clone()
    };
    let mut problem = QpProblem::from_reference(&reference, config.weights);
    problem.start = *x1;
    problem.end = *x2;
    let settings = LoopSettings {
        max_iterations: config.max_iterations,
        stretch: config.stretch,
        check_dt: config.check_dt(grid, limits),
        record_trace: config.record_trace,
    };
    let mut response = FrontendResponse { grid, config };
    let out = deform::run(problem, grid, limits, &settings, &mut response);
    Ok(RegionalOutcome {
        trajectory: out.trajectory,
        failure: out.failure,
        iterations: out.iterations,
        attractors: out.problem.attractors,
        work: out.work,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_offset_arithmetic() {
        let p = attractor_position(Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), OffsetRule::Fixed { distance: 1.5 });
        assert_eq!(p, Some(Vec3::new(0.0, 1.5, 0.0)));
        let q = attractor_position(Vec3::ZERO, Vec3::new(0.0, 1.0, 0.0), OffsetRule::PastMidpoint { extra: 0.25 });
        assert_eq!(q, Some(Vec3::new(0.0, 1.25, 0.0)));
        assert_eq!(attractor_position(Vec3::ZERO, Vec3::ZERO, OffsetRule::Fixed { distance: 1.0 }), None);
    }

    #[test]
    fn window_is_centered_on_interval() {
        let iv = CollisionInterval {
            t_start: 0.2,
            t_end: 0.6,
            t_mid: 0.4,
            midpoint: Vec3::ZERO,
            free_before: None,
            free_after: None,
        };
        let (ts, te) = attractor_window(&iv, 0.5, 1.0, 3.0);
        assert!((0.5 * (ts + te) - 0.4).abs() < 1e-12);
        assert_eq!((ts, te), (0.0, 0.8));
        assert_eq!(attractor_window(&iv, 0.1, 1.0, 3.0), (0.1, 0.7));
    }

    #[test]
    fn piece_count_tracks_duration() {
        let c = RegionalConfig::default();
        assert_eq!(c.piece_count(0.3), 4);
        assert_eq!(c.piece_count(3.1), 6);
        assert_eq!(c.piece_count(30.0), 12);
    }

    #[test]
    fn config_validation() {
        let mut c = RegionalConfig::default();
        assert!(c.validate().is_ok());
        c.stretch = 1.0;
        assert!(c.validate().is_err());
        c = RegionalConfig { max_iterations: 0, ..RegionalConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn midpoint_of_polyline() {
        let path = [Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 3.0, 0.0)];
        assert_eq!(path_midpoint(&path), Vec3::new(1.0, 1.0, 0.0));
    }
}
