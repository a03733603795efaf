use kinoplan_core::planner::maybe_within;
use kinoplan_core::steer::{self, MAX_STRETCH, STRETCH_FACTOR, TAU_MIN};
use kinoplan_core::{FlatState, GoalRegion, Limits, Vec3};
use proptest::prelude::*;

fn vec3(s: f64) -> impl Strategy<Value = Vec3> {
    (-s..s, -s..s, -s..s).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn state() -> impl Strategy<Value = FlatState> {
    (vec3(10.0), vec3(5.0), vec3(3.0)).prop_map(|(p, v, a)| FlatState::new(p, v, a))
}

const RHO: f64 = 100.0;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_states_are_met(x0 in state(), x1 in state()) {
        let r = steer::solve_fixed_bvp(&x0, &x1, RHO);
        prop_assert!(r.trajectory.start_state().max_abs_diff(&x0) < 1e-9);
        prop_assert!(r.trajectory.end_state().max_abs_diff(&x1) < 1e-9);
    }

    #[test]
    fn optimal_duration_beats_a_duration_grid(x0 in state(), x1 in state()) {
        let r = steer::solve_fixed_bvp(&x0, &x1, RHO);
        for k in 0..400 {
            // geometric grid from 10 ms to 40 s
            let tau = 0.01 * 4000f64.powf(k as f64 / 399.0);
            let c = steer::cost_for_tau(&x0, &x1, RHO, tau);
            prop_assert!(r.cost <= c + 1e-6 * c.abs().max(1.0), "tau {tau}: {c} < {}", r.cost);
        }
    }

    #[test]
    fn reported_cost_matches_quadrature(x0 in state(), x1 in state()) {
        let r = steer::solve_fixed_bvp(&x0, &x1, RHO);
        let direct = RHO * r.tau + 0.5 * r.trajectory.jerk_integral();
        prop_assert!((direct - r.cost).abs() <= 1e-8 * r.cost.max(1.0));
        let fast = steer::optimal_cost(&x0, &x1, RHO);
        prop_assert!((fast - r.cost).abs() <= 1e-9 * r.cost.max(1.0));
    }

    #[test]
    fn cost_is_stationary_at_interior_optimum(x0 in state(), x1 in state()) {
        let r = steer::solve_fixed_bvp(&x0, &x1, RHO);
        prop_assume!(r.tau > 10.0 * TAU_MIN);
        let h = 1e-6 * r.tau;
        let d = (steer::cost_for_tau(&x0, &x1, RHO, r.tau + h) - steer::cost_for_tau(&x0, &x1, RHO, r.tau - h)) / (2.0 * h);
        prop_assert!(d.abs() <= 1e-4 * (r.cost / r.tau).max(1.0), "dJ/dτ = {d}");
    }

    #[test]
    fn stretched_steering_respects_limits(x0 in state(), x1 in state()) {
        let limits = Limits::default();
        let free = steer::solve_fixed_bvp(&x0, &x1, RHO);
        let r = steer::steer_with_limits(&x0, &x1, RHO, &limits);
        prop_assert!(r.stretches <= MAX_STRETCH);
        let expected = free.tau * STRETCH_FACTOR.powi(r.stretches as i32);
        prop_assert!((r.tau - expected).abs() <= 1e-9 * expected);
        if r.feasible_derivatives {
            prop_assert!(r.trajectory.within_limits(&limits, 1e-6));
        }
        prop_assert!(r.trajectory.end_state().max_abs_diff(&x1) < 1e-8);
    }

    #[test]
    fn free_final_acceleration_never_costs_more(x0 in state(), p in vec3(10.0)) {
        let region = GoalRegion::at_rest(p);
        let r = steer::steer_to_region(&x0, &region, RHO, &Limits { v_max: 1e9, a_max: 1e9, j_max: 1e9 });
        let end = r.trajectory.end_state();
        prop_assert!(end.position.distance(p) < 1e-9 && end.velocity.norm_inf() < 1e-9);
        let fixed = steer::optimal_cost(&x0, &FlatState::rest(p), RHO);
        prop_assert!(r.cost <= fixed + 1e-9 * fixed);
        prop_assert!((steer::optimal_cost_to_region(&x0, &region, RHO) - r.cost).abs() <= 1e-9 * r.cost.max(1.0));
    }

    #[test]
    fn reach_prefilter_has_no_false_negatives(x0 in state(), x1 in state(), r in 100.0..5000.0f64) {
        if steer::optimal_cost(&x0, &x1, RHO) <= r {
            prop_assert!(maybe_within(&x0, &x1, RHO, r));
        }
    }
}

#[test]
fn rest_to_rest_duration_has_closed_form() {
    // J(τ) = ρτ + 360 d² / τ⁵ per axis, so τ* = (1800 d² / ρ)^(1/6)
    for d in [0.5, 2.0, 7.0, 20.0] {
        let r = steer::solve_fixed_bvp(&FlatState::rest(Vec3::ZERO), &FlatState::rest(Vec3::new(d, 0.0, 0.0)), RHO);
        let tau = (1800.0 * d * d / RHO).powf(1.0 / 6.0);
        assert!((r.tau - tau).abs() < 1e-9 * tau, "{} vs {tau}", r.tau);
    }
}

#[test]
fn identical_states_give_minimal_edge() {
    let x = FlatState::new(Vec3::splat(1.0), Vec3::ZERO, Vec3::ZERO);
    let r = steer::solve_fixed_bvp(&x, &x, RHO);
    assert!(r.cost <= RHO * TAU_MIN + 1e-12);
    assert!(r.trajectory.end_state().max_abs_diff(&x) < 1e-12);
}
