use kinoplan_core::qp::{self, constraint_system, solve_closed_form, solve_dense_kkt, ReducedProblem};
use kinoplan_core::{AttractingPoint, CostWeights, FlatState, PiecewiseTrajectory, PolySegment, QpProblem, Vec3};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
    Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
}

/// Random problem: `j` pieces, up to five attractors, optional pinned waypoints.
fn random_problem(seed: u64, pins: bool) -> QpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = rng.random_range(4..=12);
    let segments: Vec<PolySegment> = (0..j)
        .map(|_| {
            let mut c = [[0.0; 6]; 3];
            for axis in c.iter_mut() {
                for v in axis.iter_mut() {
                    *v = rng.random_range(-2.0..2.0);
                }
            }
            PolySegment::new(c, rng.random_range(0.2..1.2))
        })
        .collect();
    let reference = PiecewiseTrajectory::new(segments);
    let weights = CostWeights {
        rho: 100.0,
        lambda_s: rng.random_range(0.01..2.0),
        lambda_r: rng.random_range(0.0..2.0),
        lambda_c: rng.random_range(0.0..5.0),
    };
    let mut p = QpProblem::from_reference(&reference, weights);
    p.start = FlatState::new(random_vec(&mut rng, 3.0), random_vec(&mut rng, 2.0), random_vec(&mut rng, 1.0));
    p.end = FlatState::new(random_vec(&mut rng, 3.0), random_vec(&mut rng, 2.0), random_vec(&mut rng, 1.0));
    let total: f64 = p.durations.iter().sum();
    for _ in 0..rng.random_range(0..=5) {
        let a = rng.random_range(0.0..total);
        let b = (a + rng.random_range(0.05..1.5)).min(total);
        p.attractors.push(AttractingPoint::new(random_vec(&mut rng, 4.0), (a, b), &p.durations).unwrap());
    }
    if pins {
        for w in p.waypoints.iter_mut() {
            if rng.random_bool(0.3) {
                *w = Some(random_vec(&mut rng, 3.0));
            }
        }
    }
    p
}

fn stacked(traj: &PiecewiseTrajectory, axis: usize) -> DVector<f64> {
    DVector::from_iterator(6 * traj.segments.len(), traj.segments.iter().flat_map(|s| s.coeffs[axis]))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_dense_kkt(seed in any::<u64>(), pins in any::<bool>()) {
        let p = random_problem(seed, pins);
        let fast = solve_closed_form(&p).unwrap();
        let dense = solve_dense_kkt(&p).unwrap();
        prop_assert!(rel(fast.objective_value, dense.objective_value) < 1e-8,
            "objective {} vs {}", fast.objective_value, dense.objective_value);
        for axis in 0..3 {
            let diff = (stacked(&fast.trajectory, axis) - stacked(&dense.trajectory, axis)).amax();
            prop_assert!(diff < 1e-6, "axis {axis} coefficient gap {diff}");
        }
    }

    #[test]
    fn closed_form_satisfies_constraints(seed in any::<u64>(), pins in any::<bool>()) {
        let p = random_problem(seed, pins);
        let sol = solve_closed_form(&p).unwrap();
        let (a, d) = constraint_system(&p);
        for axis in 0..3 {
            let r = (&a * stacked(&sol.trajectory, axis) - &d[axis]).amax();
            prop_assert!(r < 1e-9, "axis {axis} residual {r}");
        }
        prop_assert!(sol.trajectory.is_c2_continuous());
    }

    #[test]
    fn reduced_gradient_vanishes_and_matches_differences(seed in any::<u64>()) {
        let p = random_problem(seed, false);
        let red = ReducedProblem::new(&p).unwrap();
        let opt = red.solve().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
        for axis in 0..3 {
            // the Hessian scale makes 1e-7 absolute meaningful only after normalizing
            let scale = red.rhs(axis).amax().max(1.0);
            prop_assert!(red.gradient(axis, &opt[axis]).amax() / scale < 1e-7);
            let x = DVector::from_fn(red.free_dimension(), |_, _| rng.random_range(-1.0..1.0));
            let g = red.gradient(axis, &x);
            for k in 0..x.len() {
                let h = 1e-5;
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                let fd = (red.objective(axis, &xp) - red.objective(axis, &xm)) / (2.0 * h);
                prop_assert!((fd - g[k]).abs() <= 1e-3 * g[k].abs().max(1.0), "component {k}: {fd} vs {}", g[k]);
            }
        }
    }

    #[test]
    fn no_feasible_competitor_beats_the_optimum(seed in any::<u64>()) {
        let p = random_problem(seed, true);
        let red = ReducedProblem::new(&p).unwrap();
        let opt = red.solve().unwrap();
        let best = qp::objective(&p, &red.pieces(&opt)).iter().sum::<f64>();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        for _ in 0..20 {
            // any choice of free knot derivatives is a feasible trajectory
            let trial: [DVector<f64>; 3] = core::array::from_fn(|a| {
                let n = opt[a].len();
                &opt[a] + DVector::from_fn(n, |_, _| rng.random_range(-0.5..0.5))
            });
            let pieces = red.pieces(&trial);
            let other = qp::objective(&p, &pieces).iter().sum::<f64>();
            prop_assert!(other >= best - 1e-9 * best.abs().max(1.0));
        }
    }

    #[test]
    fn reduced_objective_equals_direct_evaluation(seed in any::<u64>()) {
        let p = random_problem(seed, true);
        let red = ReducedProblem::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: [DVector<f64>; 3] =
            core::array::from_fn(|_| DVector::from_fn(red.free_dimension(), |_, _| rng.random_range(-1.0..1.0)));
        let direct = qp::objective(&p, &red.pieces(&x));
        for axis in 0..3 {
            prop_assert!(rel(red.objective(axis, &x[axis]), direct[axis]) < 1e-9);
        }
    }
}

#[test]
fn pure_resemblance_returns_the_reference() {
    let p = {
        let mut p = random_problem(7, false);
        p.weights = CostWeights { rho: 100.0, lambda_s: 0.0, lambda_r: 1.0, lambda_c: 0.0 };
        p.attractors.clear();
        // a C² reference with matching endpoints
        let seg = p.reference[0];
        let r = kinoplan_core::trajectory::split_uniform(&seg, 5);
        QpProblem::from_reference(&r, p.weights)
    };
    let sol = solve_closed_form(&p).unwrap();
    assert!(sol.objective_value.abs() < 1e-9);
    let reference = PiecewiseTrajectory::new(p.reference.clone());
    for k in 0..=100 {
        let t = reference.duration() * k as f64 / 100.0;
        for order in 0..3 {
            let gap = (sol.trajectory.evaluate(t, order).unwrap() - reference.evaluate(t, order).unwrap()).norm_inf();
            assert!(gap < 1e-7, "order {order} at {t}: {gap}");
        }
    }
}
