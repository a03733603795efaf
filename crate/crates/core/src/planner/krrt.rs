use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sampler::InformedSampler;
use super::{
    check_start, choose_parent, elapsed, maybe_within, path_to, Edge, EdgeBuilder, PlanResult, PlannerConfig, SolutionRecord, Target, TreeNode,
};
use crate::clock::Clock;
use crate::error::Result;
use crate::grid::OccupancyGrid;
use crate::steer::GoalRegion;
use crate::trajectory::{FlatState, PiecewiseTrajectory};

struct GoalLink {
    node: usize,
    edge: PiecewiseTrajectory,
    cost: f64,
}

struct Tree<'a> {
    nodes: Vec<TreeNode>,
    links: Vec<GoalLink>,
    edges: EdgeBuilder<'a>,
    goal: GoalRegion,
}

impl Tree<'_> {
    fn best(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (k, l) in self.links.iter().enumerate() {
            let c = self.nodes[l.node].cost_to_come + l.cost;
            if best.is_none_or(|(_, b)| c < b) {
                best = Some((k, c));
            }
        }
        best
    }

    /// Nodes `v` with a possible cost `v → x` (or `x → v` when `forward`) within `r`.
    fn near(&mut self, x: &FlatState, r: f64, forward: bool) -> Vec<usize> {
        let rho = self.edges.config.rho;
        let mut out = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let (from, to) = if forward { (x, &n.state) } else { (&n.state, x) };
            if !maybe_within(from, to, rho, r) {
                continue;
            }
            self.edges.stats.work.bvp_costs += 1;
            if crate::steer::optimal_cost(from, to, rho) <= r {
                out.push(i);
            }
        }
        out
    }

    fn add(&mut self, state: FlatState, parent: usize, edge: Edge) -> usize {
        let i = self.nodes.len();
        let cost_to_come = self.nodes[parent].cost_to_come + edge.cost;
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            edge: edge.trajectory,
            edge_cost: edge.cost,
            cost_to_come,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(i);
        i
    }

    fn try_goal(&mut self, node: usize) {
        let bound = self.best().map_or(f64::INFINITY, |(_, c)| c) - self.nodes[node].cost_to_come;
        if bound <= 0.0 {
            return;
        }
        let state = self.nodes[node].state;
        if let Some(e) = self.edges.connect(&state, Target::Region(&self.goal), bound, true) {
            self.links.push(GoalLink { node, edge: e.trajectory, cost: e.cost });
        }
    }

    fn rewire(&mut self, x: usize, near: &[usize]) {
        let allow_ro = self.edges.config.regional_in_rewire;
        for &v in near {
            if v == x || v == 0 || self.nodes[x].parent == Some(v) {
                continue;
            }
            let base = self.nodes[x].cost_to_come;
            let bound = self.nodes[v].cost_to_come - base;
            if bound <= 0.0 {
                continue;
            }
            let (xs, vs) = (self.nodes[x].state, self.nodes[v].state);
            if base + self.edges.lower_bound(&xs, Target::State(&vs)) >= self.nodes[v].cost_to_come {
                continue;
            }
            let Some(e) = self.edges.connect(&xs, Target::State(&vs), bound, allow_ro) else {
                continue;
            };
            let old = self.nodes[v].parent.expect("non-root node has a parent");
            self.nodes[old].children.retain(|&c| c != v);
            self.nodes[x].children.push(v);
            let node = &mut self.nodes[v];
            node.parent = Some(x);
            node.edge = e.trajectory;
            node.edge_cost = e.cost;
            self.propagate(v);
        }
    }

    /// Recomputes costs of `v` and its descendants from their parents.
    fn propagate(&mut self, v: usize) {
        let mut stack = alloc::vec![v];
        while let Some(i) = stack.pop() {
            let p = self.nodes[i].parent.expect("propagation below the root");
            self.nodes[i].cost_to_come = self.nodes[p].cost_to_come + self.nodes[i].edge_cost;
            stack.extend(self.nodes[i].children.iter().copied());
        }
    }
}

/// kRRT* with conditional regional optimization, budgeted by `config.clock`.
pub fn krrt_star(start: &FlatState, goal: &GoalRegion, grid: &OccupancyGrid, config: &PlannerConfig) -> Result<PlanResult> {
    krrt_star_with_clock(start, goal, grid, config, &config.clock)
}

pub fn krrt_star_with_clock(
    start: &FlatState,
    goal: &GoalRegion,
    grid: &OccupancyGrid,
    config: &PlannerConfig,
    clock: &dyn Clock,
) -> Result<PlanResult> {
    check_start(start, grid, config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sampler = InformedSampler::new(grid, start, goal, config.rho, config.limits.v_max, config.sampler);
    let mut tree = Tree {
        nodes: alloc::vec![TreeNode {
            state: *start,
            parent: None,
            edge: PiecewiseTrajectory::new(Vec::new()),
            edge_cost: 0.0,
            cost_to_come: 0.0,
            children: Vec::new(),
        }],
        links: Vec::new(),
        edges: EdgeBuilder::new(grid, config),
        goal: *goal,
    };
    let mut solutions: Vec<SolutionRecord> = Vec::new();

    // direct connection from the root
    tree.edges.ro_allowance = config.regional_per_sample;
    tree.try_goal(0);
    record(&tree, clock, &mut solutions);

    while elapsed(clock, &tree.edges.stats) < config.time_budget && (config.anytime || solutions.is_empty()) {
        let best = tree.best().map(|(_, c)| c);
        let Some(x) = sampler.sample(&mut rng, grid, best, tree.edges.work()) else {
            continue;
        };
        tree.edges.ro_allowance = config.regional_per_sample;
        let r = config.near_radius_for(tree.nodes.len());
        let back = tree.near(&x, r, false);
        let Some((parent, edge)) = choose_parent(&tree.nodes, &back, &x, &mut tree.edges) else {
            continue;
        };
        tree.edges.stats.samples_accepted += 1;
        let xi = tree.add(x, parent, edge);
        tree.try_goal(xi);
        let fwd = tree.near(&x, r, true);
        tree.rewire(xi, &fwd);
        record(&tree, clock, &mut solutions);
    }

    let mut stats = tree.edges.stats;
    stats.nodes = tree.nodes.len() as u64;
    stats.samples_drawn = stats.work.samples;
    stats.first_solution_time = solutions.first().map(|s| s.time);
    stats.planning_time = if config.anytime {
        elapsed(clock, &stats)
    } else {
        stats.first_solution_time.unwrap_or_else(|| elapsed(clock, &stats))
    };
    let (trajectory, cost) = match tree.best() {
        Some((k, c)) => {
            let l = &tree.links[k];
            let mut t = path_to(&tree.nodes, l.node);
            t.append(&l.edge);
            (Some(t), Some(c))
        }
        None => (None, None),
    };
    Ok(PlanResult { trajectory, cost, solutions, stats, expansion_costs: Vec::new() })
}

fn record(tree: &Tree, clock: &dyn Clock, solutions: &mut Vec<SolutionRecord>) {
    if let Some((_, c)) = tree.best() {
        if solutions.last().is_none_or(|s| c < s.cost) {
            solutions.push(SolutionRecord { time: elapsed(clock, &tree.edges.stats), cost: c });
        }
    }
}
