use kinoplan::verify::{endpoint_error, verify_trajectory, Violation};
use kinoplan_core::{steer, FlatState, Limits, OccupancyGrid, PiecewiseTrajectory, Vec3};

fn open_grid() -> OccupancyGrid {
    OccupancyGrid::new(Vec3::ZERO, 0.1, [80, 40, 30]).unwrap()
}

fn crossing() -> (FlatState, FlatState, PiecewiseTrajectory) {
    let (a, b) = (FlatState::rest(Vec3::new(1.0, 2.0, 1.5)), FlatState::rest(Vec3::new(7.0, 2.0, 1.5)));
    let s = steer::steer_with_limits(&a, &b, 100.0, &Limits::default());
    (a, b, s.trajectory.subdivided(0.5))
}

#[test]
fn clean_trajectory_passes() {
    let (a, b, t) = crossing();
    assert_eq!(verify_trajectory(&t, &open_grid(), &Limits::default(), 0.01), Ok(()));
    assert!(endpoint_error(&t, &a, &b) < 1e-9);
}

#[test]
fn obstacle_on_the_path_is_reported() {
    let (_, _, t) = crossing();
    let mut g = open_grid();
    let mid = t.position(t.duration() / 2.0);
    g.set_cell(g.cell_of(mid), true);
    assert!(matches!(verify_trajectory(&t, &g, &Limits::default(), 0.01), Err(Violation::Collision { .. })));
}

#[test]
fn compressed_timing_breaks_limits() {
    let (_, _, t) = crossing();
    let fast = t.time_scaled(0.3);
    assert!(matches!(verify_trajectory(&fast, &open_grid(), &Limits::default(), 0.01), Err(Violation::Limit { .. })));
}

#[test]
fn knot_jump_is_reported() {
    let (_, _, mut t) = crossing();
    t.segments[2].coeffs[1][2] += 1e-3;
    assert!(matches!(
        verify_trajectory(&t, &open_grid(), &Limits::default(), 0.01),
        Err(Violation::Discontinuity { order: 2, knot: 2, .. })
    ));
}

#[test]
fn degenerate_inputs_are_rejected() {
    let g = open_grid();
    let empty = PiecewiseTrajectory::new(Vec::new());
    assert_eq!(verify_trajectory(&empty, &g, &Limits::default(), 0.01), Err(Violation::Empty));
    let (_, _, mut t) = crossing();
    t.segments[0].coeffs[0][0] = f64::NAN;
    assert_eq!(verify_trajectory(&t, &g, &Limits::default(), 0.01), Err(Violation::NonFinite));
}
