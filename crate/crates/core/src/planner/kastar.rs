use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use num_traits::Float;

use super::{check_start, elapsed, EdgeBuilder, PlanResult, PlannerConfig, SolutionRecord, Target};
use crate::clock::Clock;
use crate::deform::LIMIT_SLACK;
use crate::error::Result;
use crate::grid::{check_trajectory, OccupancyGrid};
use crate::steer::GoalRegion;
use crate::trajectory::{FlatState, PiecewiseTrajectory, PolySegment};
use crate::vec3::Vec3;

/// Constant-jerk inputs: every combination of `levels` equally spaced
/// values in `[−j_max, j_max]` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct PrimitiveSet {
    pub inputs: Vec<Vec3>,
    pub duration: f64,
}

impl PrimitiveSet {
    pub fn new(j_max: f64, levels: usize, duration: f64) -> Self {
        let step = 2.0 * j_max / (levels - 1) as f64;
        let value = |i: usize| -j_max + step * i as f64;
        let mut inputs = Vec::with_capacity(levels * levels * levels);
        for i in 0..levels {
            for j in 0..levels {
                for k in 0..levels {
                    inputs.push(Vec3::new(value(i), value(j), value(k)));
                }
            }
        }
        PrimitiveSet { inputs, duration }
    }

    /// Running cost `(ρ + ½‖u‖²) · T` of one primitive.
    pub fn cost(&self, u: Vec3, rho: f64) -> f64 {
        (rho + 0.5 * u.norm_squared()) * self.duration
    }
}

/// Exact state trajectory under constant jerk `u` for `duration`.
pub fn primitive(x: &FlatState, u: Vec3, duration: f64) -> PolySegment {
    let mut c = [[0.0; 6]; 3];
    for (k, ck) in c.iter_mut().enumerate() {
        *ck = [x.position[k], x.velocity[k], 0.5 * x.acceleration[k], u[k] / 6.0, 0.0, 0.0];
    }
    PolySegment::new(c, duration)
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, u64);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(self.1.cmp(&o.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

struct Node {
    state: FlatState,
    g: f64,
    parent: Option<usize>,
    segment: Option<PolySegment>,
}

type VoxelKey = ([i64; 3], [i64; 3]);

fn voxel(grid: &OccupancyGrid, x: &FlatState, bin: f64) -> VoxelKey {
    let v = x.velocity;
    (grid.cell_of(x.position), [(v.x / bin).floor() as i64, (v.y / bin).floor() as i64, (v.z / bin).floor() as i64])
}

/// Kinodynamic A* over constant-jerk motion primitives with an analytic
/// goal connection, budgeted by `config.clock`.
pub fn ka_star(start: &FlatState, goal: &GoalRegion, grid: &OccupancyGrid, config: &PlannerConfig) -> Result<PlanResult> {
    ka_star_with_clock(start, goal, grid, config, &config.clock)
}

pub fn ka_star_with_clock(
    start: &FlatState,
    goal: &GoalRegion,
    grid: &OccupancyGrid,
    config: &PlannerConfig,
    clock: &dyn Clock,
) -> Result<PlanResult> {
    check_start(start, grid, config)?;
    let prims = PrimitiveSet::new(config.limits.j_max, config.primitive_levels, config.primitive_duration);
    let mut edges = EdgeBuilder::new(grid, config);
    let limits = config.limits;
    let interval = config.goal_shot_interval.max(1) as u64;

    let mut nodes = alloc::vec![Node { state: *start, g: 0.0, parent: None, segment: None }];
    let mut best_g: BTreeMap<VoxelKey, f64> = BTreeMap::new();
    best_g.insert(voxel(grid, start, config.velocity_bin), 0.0);
    let mut heap = BinaryHeap::new();
    let h0 = edges.lower_bound(start, Target::Region(goal));
    heap.push(Reverse((Key(h0, 0), 0usize)));
    let mut seq = 1u64;
    let mut found: Option<(usize, PiecewiseTrajectory, f64)> = None;

    while let Some(Reverse((_, ni))) = heap.pop() {
        if elapsed(clock, &edges.stats) >= config.time_budget {
            break;
        }
        let (x, g) = (nodes[ni].state, nodes[ni].g);
        if best_g.get(&voxel(grid, &x, config.velocity_bin)).is_some_and(|&b| g > b) {
            continue;
        }
        edges.stats.expansions += 1;
        if edges.stats.expansions % interval == 0 || ni == 0 {
            if let Some(e) = edges.connect(&x, Target::Region(goal), f64::INFINITY, false) {
                found = Some((ni, e.trajectory, g + e.cost));
                break;
            }
        }
        for &u in &prims.inputs {
            edges.stats.work.primitives += 1;
            let seg = primitive(&x, u, prims.duration);
            let end = seg.end_state();
            if !end.within_limits(&limits) || seg.derivative_extremum(1) > limits.v_max + LIMIT_SLACK {
                continue;
            }
            let key = voxel(grid, &end, config.velocity_bin);
            let ng = g + prims.cost(u, config.rho);
            if best_g.get(&key).is_some_and(|&b| ng >= b) {
                continue;
            }
            let traj = PiecewiseTrajectory::from_segment(seg.clone());
            let report = check_trajectory(&traj, grid, edges.check_dt);
            edges.stats.work.collision_samples += report.samples as u64;
            if !report.is_free() {
                continue;
            }
            best_g.insert(key, ng);
            let h = edges.lower_bound(&end, Target::Region(goal));
            nodes.push(Node { state: end, g: ng, parent: Some(ni), segment: Some(seg) });
            heap.push(Reverse((Key(ng + h, seq), nodes.len() - 1)));
            seq += 1;
        }
    }

    let mut stats = edges.stats;
    stats.nodes = nodes.len() as u64;
    let now = elapsed(clock, &stats);
    stats.planning_time = now;
    let Some((last, shot, cost)) = found else {
        return Ok(PlanResult { trajectory: None, cost: None, solutions: Vec::new(), stats, expansion_costs: Vec::new() });
    };
    stats.first_solution_time = Some(now);
    let mut segs = Vec::new();
    let mut cur = Some(last);
    while let Some(i) = cur {
        if let Some(s) = &nodes[i].segment {
            segs.push(s.clone());
        }
        cur = nodes[i].parent;
    }
    segs.reverse();
    let mut traj = PiecewiseTrajectory::new(segs);
    traj.append(&shot);
    Ok(PlanResult {
        trajectory: Some(traj),
        cost: Some(cost),
        solutions: alloc::vec![SolutionRecord { time: now, cost }],
        stats,
        expansion_costs: Vec::new(),
    })
}
