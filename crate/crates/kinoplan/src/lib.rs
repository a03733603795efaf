//! File formats, wall-clock budgets and the benchmark harness around
//! `kinoplan-core`.

pub mod bench;
pub mod calibrate;
pub mod clock;
pub mod io;
pub mod verify;

pub use bench::{
    run_backend_bench, run_convergence, run_frontend_bench, run_regional_suite, BenchReport, ConvergenceReport, Method, RegionalReport,
    RegionalSuite, Scenario, TrialRecord,
};
pub use clock::WallClock;
pub use verify::{verify_trajectory, Violation};
