//! Measures the per-operation costs behind [`WorkClock`] on this machine.

use std::hint::black_box;
use std::time::Instant;

use kinoplan_core::grid::{check_trajectory, local_astar_with_stats, BoundBox};
use kinoplan_core::planner::{primitive, InformedSampler, PrimitiveSet, SamplerConfig};
use kinoplan_core::{envgen, qp, steer, trajectory, CostWeights, EnvSpec, FlatState, GoalRegion, Limits, QpProblem, Vec3, WorkClock, WorkCounters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn per_op(start: Instant, ops: usize) -> f64 {
    start.elapsed().as_secs_f64() / ops.max(1) as f64
}

/// Times each counted operation on the default forest with `pairs` random
/// state pairs and returns the resulting cost model.
pub fn measure(pairs: usize) -> kinoplan_core::Result<WorkClock> {
    let grid = envgen::build(&EnvSpec::forest(1))?;
    let limits = Limits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let state = |rng: &mut ChaCha8Rng| {
        let p = Vec3::new(rng.random_range(2.0..28.0), rng.random_range(2.0..28.0), rng.random_range(0.5..2.5));
        let v = Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0));
        FlatState::new(p, v, Vec3::ZERO)
    };
    let pairs: Vec<(FlatState, FlatState)> = (0..pairs.max(10))
        .map(|_| {
            let a = state(&mut rng);
            let mut b = state(&mut rng);
            b.position = a.position + (b.position - a.position) * 0.2;
            (a, b)
        })
        .collect();

    let t = Instant::now();
    for (a, b) in &pairs {
        black_box(steer::optimal_cost(a, b, 100.0));
    }
    let bvp_cost = per_op(t, pairs.len());

    let t = Instant::now();
    let mut steers = 0;
    let mut trajs = Vec::new();
    for (a, b) in &pairs {
        let s = steer::steer_with_limits(a, b, 100.0, &limits);
        steers += 1 + s.stretches;
        trajs.push(s.trajectory);
    }
    let steer = per_op(t, steers);

    let t = Instant::now();
    let mut samples = 0;
    for tr in &trajs {
        samples += check_trajectory(tr, &grid, grid.default_check_dt(limits.v_max)).samples;
    }
    let collision_sample = per_op(t, samples);

    let t = Instant::now();
    let mut segments = 0;
    for tr in trajs.iter().take(pairs.len() / 4) {
        let p = QpProblem::from_reference(&trajectory::split_uniform(&tr.segments[0], 10), CostWeights::default());
        black_box(qp::solve_closed_form(&p)?);
        segments += 10;
    }
    let qp_segment = per_op(t, segments);

    let t = Instant::now();
    let mut expansions = 0;
    for (a, b) in pairs.iter().take(pairs.len() / 4) {
        expansions += local_astar_with_stats(&grid, a.position, b.position, BoundBox::around(&[a.position, b.position], 1.0)).expansions;
    }
    let astar_expansion = per_op(t, expansions);

    let prims = PrimitiveSet::new(limits.j_max, 5, 0.5);
    let t = Instant::now();
    let mut n = 0;
    for (a, _) in pairs.iter().take(pairs.len() / 4) {
        for &u in &prims.inputs {
            let s = primitive(a, u, prims.duration);
            black_box(s.end_state().within_limits(&limits) && s.derivative_extremum(1) < limits.v_max);
            n += 1;
        }
    }
    let primitive = per_op(t, n);

    let (a, b) = pairs[0];
    let sampler = InformedSampler::new(
        &grid,
        &a,
        &GoalRegion::at_rest(b.position),
        100.0,
        limits.v_max,
        SamplerConfig { padding: Vec3::splat(30.0), ..SamplerConfig::default() },
    );
    let mut work = WorkCounters::default();
    let t = Instant::now();
    for _ in 0..pairs.len() * 5 {
        black_box(sampler.sample(&mut rng, &grid, None, &mut work));
    }
    let sample = per_op(t, work.samples as usize);

    Ok(WorkClock { bvp_cost, steer, collision_sample, qp_segment, astar_expansion, primitive, sample })
}
