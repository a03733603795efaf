use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sampler::InformedSampler;
use super::{check_start, elapsed, maybe_within, Edge, EdgeBuilder, PlanResult, PlannerConfig, SolutionRecord, Target};
use crate::clock::Clock;
use crate::error::Result;
use crate::grid::OccupancyGrid;
use crate::steer::{self, GoalRegion};
use crate::trajectory::{FlatState, PiecewiseTrajectory};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Unvisited,
    Open,
    Closed,
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

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

/// Batch kFMT* with lazy dynamic programming; colliding lazy connections
/// are passed through regional optimization when gated in. A batch whose
/// search dies out without reaching the goal is grown by `batch_size`
/// samples and searched again while budget remains.
pub fn kfmt_star(start: &FlatState, goal: &GoalRegion, grid: &OccupancyGrid, config: &PlannerConfig) -> Result<PlanResult> {
    kfmt_star_with_clock(start, goal, grid, config, &config.clock)
}

pub fn kfmt_star_with_clock(
    start: &FlatState,
    goal: &GoalRegion,
    grid: &OccupancyGrid,
    config: &PlannerConfig,
    clock: &dyn Clock,
) -> Result<PlanResult> {
    check_start(start, grid, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sampler = InformedSampler::new(grid, start, goal, config.rho, config.limits.v_max, config.sampler);
    let mut edges = EdgeBuilder::new(grid, config);

    // the goal state sits at index 1; samples follow
    let mut states = alloc::vec![*start, FlatState::new(goal.position, goal.velocity, goal.acceleration)];
    let goal_idx = 1;
    let rho = config.rho;
    let mut ro_left: Vec<usize> = alloc::vec![config.regional_per_sample; 2];
    let mut expansion_costs = Vec::new();
    let mut reached = false;
    let mut cost = Vec::new();
    let mut parent = Vec::new();
    let mut edge_of: Vec<PiecewiseTrajectory> = Vec::new();

    // a batch whose search dies out is enlarged by another batch and searched again
    while !reached && elapsed(clock, &edges.stats) < config.time_budget {
        let target_len = states.len() + config.batch_size;
        while states.len() < target_len && elapsed(clock, &edges.stats) < config.time_budget {
            if let Some(x) = sampler.sample(&mut rng, grid, None, edges.work()) {
                states.push(x);
                ro_left.push(config.regional_per_sample);
            }
        }
        edges.stats.samples_accepted = states.len() as u64 - 2;
        let n = states.len();
        let r = config.near_radius_for(n);
        states[goal_idx] = FlatState::new(goal.position, goal.velocity, goal.acceleration);

        let mut status = alloc::vec![Status::Unvisited; n];
        cost = alloc::vec![f64::INFINITY; n];
        parent = alloc::vec![usize::MAX; n];
        edge_of = alloc::vec![PiecewiseTrajectory::new(Vec::new()); n];
        // neighbor sets within cost r, computed on first use
        let mut near_out: Vec<Option<Vec<(usize, f64)>>> = alloc::vec![None; n];
        let mut near_in: Vec<Option<Vec<(usize, f64)>>> = alloc::vec![None; n];
        let mut heap = BinaryHeap::new();
        status[0] = Status::Open;
        cost[0] = 0.0;
        heap.push(Reverse(Key(0.0, 0)));
        expansion_costs.clear();

        while let Some(Reverse(Key(cz, z))) = heap.pop() {
            if elapsed(clock, &edges.stats) >= config.time_budget {
                break;
            }
            if status[z] != Status::Open || cz > cost[z] {
                continue;
            }
            if z == goal_idx {
                reached = true;
                break;
            }
            expansion_costs.push(cz);
            edges.stats.expansions += 1;
            let out = near_out[z].get_or_insert_with(|| near_set(&states, z, true, rho, r, &mut edges.stats.work.bvp_costs)).clone();
            let mut opened = Vec::new();
            for (x, _) in out {
                if status[x] != Status::Unvisited {
                    continue;
                }
                if elapsed(clock, &edges.stats) >= config.time_budget {
                    break;
                }
                // lazy step: only the best optimistic open parent is tried
                let incoming = near_in[x].get_or_insert_with(|| near_set(&states, x, false, rho, r, &mut edges.stats.work.bvp_costs));
                let best = incoming
                    .iter()
                    .filter(|&&(y, _)| status[y] == Status::Open)
                    .map(|&(y, c)| (cost[y] + c, y))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let Some((_, y)) = best else { continue };
                // the regional allowance is spent per sample over the whole run
                edges.ro_allowance = ro_left[x];
                let target = if x == goal_idx { Target::Region(goal) } else { Target::State(&states[x]) };
                let edge = edges.connect(&states[y], target, f64::INFINITY, true);
                ro_left[x] = edges.ro_allowance;
                if let Some(Edge { trajectory, cost: c, .. }) = edge {
                    if x == goal_idx {
                        states[x] = trajectory.end_state();
                    }
                    cost[x] = cost[y] + c;
                    parent[x] = y;
                    edge_of[x] = trajectory;
                    opened.push(x);
                }
            }
            status[z] = Status::Closed;
            for x in opened {
                status[x] = Status::Open;
                heap.push(Reverse(Key(cost[x], x)));
            }
        }
    }

    let mut stats = edges.stats;
    stats.nodes = states.len() as u64;
    stats.samples_drawn = stats.work.samples;
    let now = elapsed(clock, &stats);
    stats.planning_time = now;
    if !reached {
        return Ok(PlanResult { trajectory: None, cost: None, solutions: Vec::new(), stats, expansion_costs });
    }
    stats.first_solution_time = Some(now);
    let mut chain = Vec::new();
    let mut cur = goal_idx;
    while cur != 0 {
        chain.push(cur);
        cur = parent[cur];
    }
    let mut traj = PiecewiseTrajectory::new(Vec::new());
    for &i in chain.iter().rev() {
        traj.append(&edge_of[i]);
    }
    let c = cost[goal_idx];
    Ok(PlanResult {
        trajectory: Some(traj),
        cost: Some(c),
        solutions: alloc::vec![SolutionRecord { time: now, cost: c }],
        stats,
        expansion_costs,
    })
}

/// States reachable from (`forward`) or reaching state `i` within cost `r`.
fn near_set(states: &[FlatState], i: usize, forward: bool, rho: f64, r: f64, bvp_costs: &mut u64) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for (j, s) in states.iter().enumerate() {
        let (a, b) = if forward { (&states[i], s) } else { (s, &states[i]) };
        if j == i || !maybe_within(a, b, rho, r) {
            continue;
        }
        *bvp_costs += 1;
        let c = steer::optimal_cost(a, b, rho);
        if c <= r {
            out.push((j, c));
        }
    }
    out
}
