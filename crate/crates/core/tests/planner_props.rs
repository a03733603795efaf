use kinoplan_core::planner::{ka_star, kfmt_star, krrt_star, primitive, PlanResult, PlannerConfig, PrimitiveSet};
use kinoplan_core::{check_trajectory, envgen, steer, EnvKind, EnvSpec, FlatState, GoalRegion, OccupancyGrid, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_forest(seed: u64) -> OccupancyGrid {
    let mut spec = EnvSpec::new(EnvKind::Forest, Vec3::new(12.0, 12.0, 3.0), seed);
    spec.forest.density = 0.1;
    envgen::build(&spec).unwrap()
}

fn endpoints(grid: &OccupancyGrid, seed: u64) -> (FlatState, GoalRegion) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s = Vec3::new(rng.random_range(0.5..2.0), rng.random_range(0.5..11.5), 1.5);
        let g = Vec3::new(rng.random_range(10.0..11.5), rng.random_range(0.5..11.5), 1.5);
        if !grid.is_occupied(s) && !grid.is_occupied(g) {
            return (FlatState::rest(s), GoalRegion::at_rest(g));
        }
    }
}

fn config(seed: u64) -> PlannerConfig {
    PlannerConfig { time_budget: 0.3, seed, ..PlannerConfig::default() }
}

/// A reported solution is a valid, limit-feasible, collision-free path
/// from the start into the goal region whose cost matches its trajectory.
fn assert_valid(r: &PlanResult, start: &FlatState, goal: &GoalRegion, grid: &OccupancyGrid, cfg: &PlannerConfig) {
    let Some(t) = &r.trajectory else { return };
    assert!(t.start_state().max_abs_diff(start) < 1e-9);
    assert!(goal.contains(&t.end_state()));
    assert!(t.is_c2_continuous());
    assert!(t.within_limits(&cfg.limits, 1e-6));
    assert!(check_trajectory(t, grid, cfg.check_dt(grid)).is_free());
    let c = r.cost.unwrap();
    assert!((t.cost_time_energy(cfg.rho) - c).abs() <= 1e-6 * c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn krrt_solutions_are_valid_and_improve(seed in 0u64..1000) {
        let grid = small_forest(seed);
        let (s, g) = endpoints(&grid, seed);
        let cfg = PlannerConfig { anytime: true, ..config(seed) };
        let r = krrt_star(&s, &g, &grid, &cfg).unwrap();
        assert_valid(&r, &s, &g, &grid, &cfg);
        for w in r.solutions.windows(2) {
            prop_assert!(w[1].cost < w[0].cost && w[1].time >= w[0].time);
        }
        if let (Some(last), Some(c)) = (r.solutions.last(), r.cost) {
            prop_assert!((last.cost - c).abs() <= 1e-9 * c);
        }
        prop_assert!(r.stats.ro_successes <= r.stats.ro_calls);
    }

    #[test]
    fn kfmt_expands_in_cost_order(seed in 0u64..1000) {
        let grid = small_forest(seed);
        let (s, g) = endpoints(&grid, seed);
        let cfg = PlannerConfig { batch_size: 300, ..config(seed) };
        let r = kfmt_star(&s, &g, &grid, &cfg).unwrap();
        assert_valid(&r, &s, &g, &grid, &cfg);
        for w in r.expansion_costs.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn disabling_regional_optimization_never_calls_it(seed in 0u64..1000) {
        let grid = small_forest(seed);
        let (s, g) = endpoints(&grid, seed);
        let cfg = PlannerConfig { enable_regional: false, ..config(seed) };
        prop_assert_eq!(krrt_star(&s, &g, &grid, &cfg).unwrap().stats.ro_calls, 0);
        prop_assert_eq!(kfmt_star(&s, &g, &grid, &PlannerConfig { batch_size: 200, ..cfg }).unwrap().stats.ro_calls, 0);
    }

    #[test]
    fn primitive_chains_never_beat_the_heuristic(seed in any::<u64>(), len in 0usize..6) {
        // the unconstrained optimal cost bounds every feasible trajectory
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prims = PrimitiveSet::new(15.0, 5, 0.5);
        let x0 = FlatState::new(
            Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), 0.0),
            Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0),
            Vec3::ZERO,
        );
        let goal = GoalRegion::at_rest(Vec3::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0), 1.0));
        let h = steer::optimal_cost_to_region(&x0, &goal, 100.0);
        let mut x = x0;
        let mut g = 0.0;
        for _ in 0..len {
            let u = prims.inputs[rng.random_range(0..prims.inputs.len())];
            let seg = primitive(&x, u, prims.duration);
            g += prims.cost(u, 100.0);
            prop_assert!((seg.jerk_energy() * 0.5 + 100.0 * prims.duration - prims.cost(u, 100.0)).abs() < 1e-9);
            x = seg.end_state();
        }
        let shot = steer::optimal_cost_to_region(&x, &goal, 100.0);
        prop_assert!(g + shot >= h - 1e-9 * h);
    }
}

#[test]
fn planners_are_deterministic() {
    let grid = small_forest(5);
    let (s, g) = endpoints(&grid, 5);
    let cfg = config(17);
    assert_eq!(krrt_star(&s, &g, &grid, &cfg).unwrap(), krrt_star(&s, &g, &grid, &cfg).unwrap());
    let fmt = PlannerConfig { batch_size: 300, ..cfg };
    assert_eq!(kfmt_star(&s, &g, &grid, &fmt).unwrap(), kfmt_star(&s, &g, &grid, &fmt).unwrap());
}

#[test]
fn ka_star_solves_an_open_map() {
    let grid = envgen::build(&EnvSpec::new(EnvKind::Empty, Vec3::new(10.0, 10.0, 3.0), 0)).unwrap();
    let s = FlatState::rest(Vec3::new(1.0, 1.0, 1.5));
    let g = GoalRegion::at_rest(Vec3::new(8.0, 6.0, 1.5));
    let cfg = PlannerConfig { time_budget: 5.0, ..PlannerConfig::default() };
    let r = ka_star(&s, &g, &grid, &cfg).unwrap();
    assert!(r.success());
    assert_valid(&r, &s, &g, &grid, &cfg);
    assert!(r.cost.unwrap() >= steer::optimal_cost_to_region(&s, &g, cfg.rho) - 1e-9);
}

#[test]
fn occupied_start_is_rejected() {
    let mut grid = small_forest(1);
    let p = Vec3::new(1.0, 1.0, 1.5);
    grid.set_cell(grid.cell_of(p), true);
    let r = krrt_star(&FlatState::rest(p), &GoalRegion::at_rest(Vec3::new(10.0, 10.0, 1.5)), &grid, &config(0));
    assert_eq!(r.unwrap_err(), kinoplan_core::Error::InvalidStart);
}
