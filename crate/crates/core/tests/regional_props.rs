use kinoplan_core::planner::{InformedSampler, SamplerConfig};
use kinoplan_core::regional::{regional_optimize, RegionalConfig};
use kinoplan_core::{check_trajectory, envgen, steer, EnvSpec, FlatState, GoalRegion, Limits, OccupancyGrid, PiecewiseTrajectory, Vec3, WorkCounters};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A short straight-line edge in the default forest whose steered
/// trajectory hits an obstacle.
fn colliding_edge(grid: &OccupancyGrid, rng: &mut ChaCha8Rng) -> (FlatState, FlatState, PiecewiseTrajectory) {
    let limits = Limits::default();
    loop {
        let a = Vec3::new(rng.random_range(2.0..28.0), rng.random_range(2.0..28.0), 1.5);
        let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let b = a + Vec3::new(ang.cos(), ang.sin(), 0.0) * rng.random_range(2.0..6.0);
        if grid.is_occupied(a) || grid.is_occupied(b) {
            continue;
        }
        let (x1, x2) = (FlatState::rest(a), FlatState::rest(b));
        let s = steer::steer_with_limits(&x1, &x2, 100.0, &limits);
        if !check_trajectory(&s.trajectory, grid, grid.default_check_dt(limits.v_max)).is_free() {
            return (x1, x2, s.trajectory);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn successes_are_safe_and_keep_endpoints(seed in any::<u64>()) {
        let grid = envgen::build(&EnvSpec::forest(1)).unwrap();
        let limits = Limits::default();
        let cfg = RegionalConfig::default();
        let (x1, x2, traj) = colliding_edge(&grid, &mut ChaCha8Rng::seed_from_u64(seed));
        let out = regional_optimize(&x1, &x2, &traj, &grid, &limits, &cfg).unwrap();
        prop_assert!(out.iterations <= cfg.max_iterations);
        prop_assert_eq!(out.success(), out.failure.is_none());
        if let Some(t) = out.trajectory {
            prop_assert!(t.start_state().max_abs_diff(&x1) < 1e-9);
            prop_assert!(t.end_state().max_abs_diff(&x2) < 1e-9);
            prop_assert!(t.is_c2_continuous());
            prop_assert!(t.within_limits(&limits, 1e-6));
            let dt = cfg.check_dt(&grid, &limits) / 10.0;
            prop_assert!(check_trajectory(&t, &grid, dt).is_free());
        }
    }
}

#[test]
fn regional_optimizer_repairs_most_forest_edges() {
    let grid = envgen::build(&EnvSpec::forest(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let ok = (0..100)
        .filter(|_| {
            let (x1, x2, t) = colliding_edge(&grid, &mut rng);
            regional_optimize(&x1, &x2, &t, &grid, &Limits::default(), &RegionalConfig::default()).unwrap().success()
        })
        .count();
    assert!(ok >= 80, "{ok}/100 repaired");
}

#[test]
fn sealed_goal_fails_cleanly() {
    let mut grid = OccupancyGrid::new(Vec3::ZERO, 0.1, [60, 30, 20]).unwrap();
    for y in 0..30 {
        for z in 0..20 {
            grid.set_cell([30, y, z], true);
        }
    }
    let (x1, x2) = (FlatState::rest(Vec3::new(1.0, 1.5, 1.0)), FlatState::rest(Vec3::new(5.0, 1.5, 1.0)));
    let s = steer::steer_with_limits(&x1, &x2, 100.0, &Limits::default());
    let out = regional_optimize(&x1, &x2, &s.trajectory, &grid, &Limits::default(), &RegionalConfig::default()).unwrap();
    assert!(!out.success());
    assert!(out.failure.is_some());
}

#[test]
fn sampler_positions_are_uniform() {
    let grid = OccupancyGrid::new(Vec3::ZERO, 0.1, [100, 100, 30]).unwrap();
    let s = InformedSampler::new(
        &grid,
        &FlatState::rest(Vec3::new(2.0, 2.0, 1.0)),
        &GoalRegion::at_rest(Vec3::new(8.0, 8.0, 2.0)),
        100.0,
        7.0,
        SamplerConfig { padding: Vec3::splat(1.0), ..SamplerConfig::default() },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bins = 10;
    let n = 20_000;
    let mut counts = vec![[0usize; 3]; bins];
    for _ in 0..n {
        let p = s.sample_position(&mut rng);
        for k in 0..3 {
            let u = (p[k] - s.lo[k]) / (s.hi[k] - s.lo[k]);
            counts[((u * bins as f64) as usize).min(bins - 1)][k] += 1;
        }
        let v = s.sample_velocity(p, &mut rng);
        assert!(v.norm() <= 7.0 + 1e-12);
    }
    let e = n as f64 / bins as f64;
    for k in 0..3 {
        let chi2: f64 = counts.iter().map(|c| (c[k] as f64 - e).powi(2) / e).sum();
        // 9 degrees of freedom, 99.9th percentile
        assert!(chi2 < 27.88, "axis {k}: chi² {chi2}");
    }
}

#[test]
fn informed_rejection_keeps_improving_states() {
    let grid = OccupancyGrid::new(Vec3::ZERO, 0.1, [100, 100, 30]).unwrap();
    let start = FlatState::rest(Vec3::new(1.0, 1.0, 1.0));
    let goal = GoalRegion::at_rest(Vec3::new(9.0, 9.0, 2.0));
    let s = InformedSampler::new(&grid, &start, &goal, 100.0, 7.0, SamplerConfig::default());
    let best = 1.3 * steer::optimal_cost_to_region(&start, &goal, 100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut work = WorkCounters::default();
    for _ in 0..200 {
        if let Some(x) = s.sample(&mut rng, &grid, Some(best), &mut work) {
            let h = steer::optimal_cost(&start, &x, 100.0) + steer::optimal_cost_to_region(&x, &goal, 100.0);
            assert!(h <= best);
        }
    }
    assert!(work.samples >= 200);
}
