//! Seeded benchmark batches: front-end comparison, back-end comparison and
//! anytime convergence curves, with per-trial, summary and timing CSVs.
//!
//! Planning time is read from the planners' work clock, so the per-trial and
//! summary CSVs are identical across runs and thread counts. Wall-clock
//! timings go to a separate `timing.csv`.

use std::path::Path;
use std::time::Instant;

use kinoplan_core::planner::{ka_star, kfmt_star, krrt_star, PlanResult, PlannerConfig, SolutionRecord};
use kinoplan_core::regional::{regional_optimize, RegionalConfig};
use kinoplan_core::{
    check_trajectory, envgen, refine, steer, Clock, Limits, EnvSpec, FlatState, GoalRegion, OccupancyGrid, PiecewiseTrajectory, RefineConfig, RefineMode, Vec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{self, IoError};
use crate::verify::{endpoint_error, verify_trajectory};

/// Maximum endpoint deviation accepted from a refiner.
pub const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kinoplan_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
}

pub type BenchResult<T> = Result<T, BenchError>;

/// Front-end planner variants compared by the benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KrrtWith,
    KrrtWithout,
    KfmtWith,
    KfmtWithout,
    KaStar,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::KrrtWith, Method::KrrtWithout, Method::KfmtWith, Method::KfmtWithout, Method::KaStar];

    pub fn name(self) -> &'static str {
        match self {
            Method::KrrtWith => "krrt_with",
            Method::KrrtWithout => "krrt_without",
            Method::KfmtWith => "kfmt_with",
            Method::KfmtWithout => "kfmt_without",
            Method::KaStar => "ka_star",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn uses_regional(self) -> bool {
        matches!(self, Method::KrrtWith | Method::KfmtWith)
    }

    pub fn plan(self, start: &FlatState, goal: &GoalRegion, grid: &OccupancyGrid, config: &PlannerConfig) -> kinoplan_core::Result<PlanResult> {
        let mut c = *config;
        c.enable_regional = self.uses_regional();
        match self {
            Method::KrrtWith | Method::KrrtWithout => krrt_star(start, goal, grid, &c),
            Method::KfmtWith | Method::KfmtWithout => kfmt_star(start, goal, grid, &c),
            Method::KaStar => ka_star(start, goal, grid, &c),
        }
    }
}

/// How trial start and goal positions are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Endpoints {
    /// Uniform free positions at least `min_separation` times the longer
    /// horizontal extent apart, `margin` meters inside the map.
    Random { min_separation: f64, margin: f64 },
    Explicit { start: Vec3, goal: Vec3 },
}

impl Default for Endpoints {
    fn default() -> Self {
        Endpoints::Random { min_separation: 0.75, margin: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    pub env: EnvSpec,
    pub trials: usize,
    pub seed: u64,
    pub endpoints: Endpoints,
    /// Planning budget in modeled seconds; overrides `planner.time_budget`.
    pub budget: f64,
    pub methods: Vec<Method>,
    pub modes: Vec<RefineMode>,
    pub planner: PlannerConfig,
    pub refine: RefineConfig,
    /// Evenly spaced convergence checkpoints over the budget.
    pub checkpoints: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "forest".into(),
            env: EnvSpec::forest(1),
            trials: 50,
            seed: 1,
            endpoints: Endpoints::default(),
            budget: 2.0,
            methods: vec![Method::KrrtWith, Method::KrrtWithout],
            modes: RefineMode::ALL.to_vec(),
            planner: PlannerConfig::default(),
            refine: RefineConfig::default(),
            checkpoints: 50,
        }
    }
}

impl Scenario {
    /// 50 corridor trials, 2 s, kRRT* and kFMT* with and without regional optimization.
    pub fn corridor() -> Self {
        Scenario {
            name: "corridor".into(),
            env: EnvSpec::corridor(1),
            methods: vec![Method::KrrtWith, Method::KrrtWithout, Method::KfmtWith, Method::KfmtWithout],
            ..Scenario::default()
        }
    }

    /// 50 forest trials, 2 s budget for the sampling planners; kA* gets 60 s.
    pub fn forest() -> Self {
        Scenario { methods: vec![Method::KrrtWith, Method::KaStar], budget: 60.0, ..Scenario::default() }
    }

    /// 100 forest trials refined in every mode.
    pub fn forest_backend() -> Self {
        Scenario { name: "forest_backend".into(), trials: 100, seed: 2, ..Scenario::default() }
    }

    /// 50 anytime double-wall trials with a 10 s budget.
    pub fn double_wall() -> Self {
        let mut s = Scenario {
            name: "double_wall".into(),
            env: EnvSpec::double_wall(1),
            budget: 10.0,
            ..Scenario::default()
        };
        s.planner.anytime = true;
        s
    }

    pub fn preset(name: &str) -> Option<Scenario> {
        match name {
            "corridor" => Some(Scenario::corridor()),
            "forest" => Some(Scenario::forest()),
            "forest_backend" => Some(Scenario::forest_backend()),
            "double_wall" => Some(Scenario::double_wall()),
            _ => None,
        }
    }

    pub fn validate(&self) -> BenchResult<()> {
        self.env.validate()?;
        if !(self.budget > 0.0) {
            return Err(BenchError::Config("budget must be positive".into()));
        }
        if let Endpoints::Random { min_separation, margin } = self.endpoints {
            if !(0.0..1.0).contains(&min_separation) || !(margin >= 0.0) {
                return Err(BenchError::Config("endpoints: min_separation in [0, 1) and margin ≥ 0".into()));
            }
        }
        self.planner_config(0).validate()?;
        self.refine.validate()?;
        Ok(())
    }

    pub fn planner_config(&self, seed: u64) -> PlannerConfig {
        PlannerConfig { time_budget: self.budget, seed, ..self.planner }
    }
}

/// Seed of trial `trial` in a batch seeded with `seed` (SplitMix64 mix).
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed ^ (trial as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Start and goal positions for one trial.
pub fn sample_endpoints(endpoints: &Endpoints, env: &EnvSpec, grid: &OccupancyGrid, seed: u64) -> BenchResult<(Vec3, Vec3)> {
    let (min_separation, margin) = match *endpoints {
        Endpoints::Explicit { start, goal } => {
            if grid.is_occupied(start) || grid.is_occupied(goal) {
                return Err(BenchError::Config("explicit start or goal is occupied".into()));
            }
            return Ok((start, goal));
        }
        Endpoints::Random { min_separation, margin } => (min_separation, margin),
    };
    let e = env.extents;
    let lo = Vec3::splat(margin).component_min(e * 0.5);
    let hi = (e - Vec3::splat(margin)).component_max(e * 0.5);
    let needed = min_separation * e.x.max(e.y);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        Vec3::new(rng.random_range(lo.x..=hi.x), rng.random_range(lo.y..=hi.y), rng.random_range(lo.z..=hi.z))
    };
    for _ in 0..100_000 {
        let (s, g) = (draw(&mut rng), draw(&mut rng));
        if s.distance(g) >= needed && !grid.is_occupied(s) && !grid.is_occupied(g) {
            return Ok((s, g));
        }
    }
    Err(BenchError::Config("no free start/goal pair with the requested separation".into()))
}

/// One method (or refine mode) on one trial. Metric fields are empty
/// unless `success`; `cost` is the time-energy cost divided by 100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: String,
    pub success: bool,
    pub failure: String,
    /// Modeled planning (or refinement) time.
    pub planning_time_ms: f64,
    pub first_solution_ms: Option<f64>,
    pub trajectory_length: Option<f64>,
    pub trajectory_duration: Option<f64>,
    pub cost: Option<f64>,
    pub jerk_integration: Option<f64>,
    pub iterations: Option<usize>,
    pub ro_calls: u64,
    pub ro_successes: u64,
    pub verified: bool,
}

impl TrialRecord {
    fn new(trial: usize, seed: u64, method: &str) -> Self {
        TrialRecord {
            trial,
            seed,
            method: method.into(),
            success: false,
            failure: String::new(),
            planning_time_ms: 0.0,
            first_solution_ms: None,
            trajectory_length: None,
            trajectory_duration: None,
            cost: None,
            jerk_integration: None,
            iterations: None,
            ro_calls: 0,
            ro_successes: 0,
            verified: false,
        }
    }

    fn set_trajectory(&mut self, traj: &PiecewiseTrajectory, rho: f64) {
        self.success = true;
        self.trajectory_length = Some(traj.arc_length());
        self.trajectory_duration = Some(traj.duration());
        self.cost = Some(traj.cost_time_energy(rho) / 100.0);
        self.jerk_integration = Some(traj.jerk_integral());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub trial: usize,
    pub method: String,
    pub wall_ms: f64,
}

/// Per-method aggregate; means are over successful trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_planning_time_ms: Option<f64>,
    pub mean_length: Option<f64>,
    pub mean_duration: Option<f64>,
    pub mean_cost: Option<f64>,
    pub mean_jerk_integration: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub ro_calls: u64,
    pub ro_successes: u64,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn summarize(method: &str, records: &[&TrialRecord]) -> Summary {
    let ok: Vec<&&TrialRecord> = records.iter().filter(|r| r.success).collect();
    Summary {
        method: method.into(),
        trials: records.len(),
        successes: ok.len(),
        success_rate: if records.is_empty() { 0.0 } else { 100.0 * ok.len() as f64 / records.len() as f64 },
        mean_planning_time_ms: mean(ok.iter().map(|r| r.planning_time_ms)),
        mean_length: mean(ok.iter().filter_map(|r| r.trajectory_length)),
        mean_duration: mean(ok.iter().filter_map(|r| r.trajectory_duration)),
        mean_cost: mean(ok.iter().filter_map(|r| r.cost)),
        mean_jerk_integration: mean(ok.iter().filter_map(|r| r.jerk_integration)),
        mean_iterations: mean(ok.iter().filter_map(|r| r.iterations.map(|i| i as f64))),
        ro_calls: records.iter().map(|r| r.ro_calls).sum(),
        ro_successes: records.iter().map(|r| r.ro_successes).sum(),
    }
}

/// Records of a batch plus aggregates and any verification failures.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub scenario: String,
    pub records: Vec<TrialRecord>,
    pub timings: Vec<TimingRecord>,
    pub summary: Vec<Summary>,
    pub violations: Vec<String>,
}

impl BenchReport {
    fn assemble(scenario: &str, methods: &[String], trials: Vec<TrialOutput>) -> Self {
        let mut r = BenchReport { scenario: scenario.into(), ..BenchReport::default() };
        for t in trials {
            r.records.extend(t.records);
            r.timings.extend(t.timings);
            r.violations.extend(t.violations);
        }
        r.summary = methods
            .iter()
            .map(|m| summarize(m, &r.records.iter().filter(|x| &x.method == m).collect::<Vec<_>>()))
            .collect();
        r
    }

    pub fn summary_for(&self, method: &str) -> Option<&Summary> {
        self.summary.iter().find(|s| s.method == method)
    }

    pub fn records_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a TrialRecord> + 'a {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn mean_wall_ms(&self, method: &str) -> Option<f64> {
        mean(self.timings.iter().filter(|t| t.method == method).map(|t| t.wall_ms))
    }

    /// File name and contents of every CSV that depends only on the seeds.
    pub fn deterministic_csv(&self) -> BenchResult<Vec<(&'static str, String)>> {
        Ok(vec![
            ("trials.csv", csv_text(&self.records, TRIAL_HEADER)?),
            ("summary.csv", csv_text(&self.summary, SUMMARY_HEADER)?),
        ])
    }

    /// Writes `trials.csv`, `summary.csv` and `timing.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> BenchResult<()> {
        write_files(dir, &self.deterministic_csv()?)?;
        write_rows(&dir.join("timing.csv"), &self.timings, TIMING_HEADER)?;
        Ok(())
    }
}

const TRIAL_HEADER: &[&str] = &[
    "trial", "seed", "method", "success", "failure", "planning_time_ms", "first_solution_ms", "trajectory_length",
    "trajectory_duration", "cost", "jerk_integration", "iterations", "ro_calls", "ro_successes", "verified",
];
const SUMMARY_HEADER: &[&str] = &[
    "method", "trials", "successes", "success_rate", "mean_planning_time_ms", "mean_length", "mean_duration", "mean_cost",
    "mean_jerk_integration", "mean_iterations", "ro_calls", "ro_successes",
];
const TIMING_HEADER: &[&str] = &["trial", "method", "wall_ms"];
const SERIES_HEADER: &[&str] = &["trial", "method", "time_s", "cost"];
const CURVE_HEADER: &[&str] = &["checkpoint_s", "method", "mean_cost", "trials"];

/// CSV text of `rows` under `header`; the header is written even when
/// there are no rows.
pub fn csv_text<T: Serialize>(rows: &[T], header: &[&str]) -> BenchResult<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(IoError::from)?;
    for row in rows {
        w.serialize(row).map_err(IoError::from)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> BenchResult<()> {
    Ok(io::write_file(path, &csv_text(rows, header)?)?)
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> BenchResult<()> {
    for (name, text) in files {
        io::write_file(&dir.join(name), text)?;
    }
    Ok(())
}

struct TrialOutput {
    records: Vec<TrialRecord>,
    timings: Vec<TimingRecord>,
    violations: Vec<String>,
    series: Vec<(String, Vec<SolutionRecord>)>,
}

impl TrialOutput {
    fn new() -> Self {
        TrialOutput { records: Vec::new(), timings: Vec::new(), violations: Vec::new(), series: Vec::new() }
    }
}

fn check_dt(grid: &OccupancyGrid, config: &PlannerConfig) -> f64 {
    config.check_dt.unwrap_or_else(|| grid.default_check_dt(config.limits.v_max))
}

/// Runs one planner on one trial, verifying any solution.
fn plan_trial(
    method: Method,
    trial: usize,
    seed: u64,
    start: Vec3,
    goal: Vec3,
    grid: &OccupancyGrid,
    config: &PlannerConfig,
    out: &mut TrialOutput,
) -> Option<PiecewiseTrajectory> {
    let mut rec = TrialRecord::new(trial, seed, method.name());
    let t0 = Instant::now();
    let result = method.plan(&FlatState::rest(start), &GoalRegion::at_rest(goal), grid, config);
    out.timings.push(TimingRecord { trial, method: method.name().into(), wall_ms: t0.elapsed().as_secs_f64() * 1e3 });
    let mut kept = None;
    match result {
        Err(e) => {
            rec.failure = e.to_string();
        }
        Ok(r) => {
            rec.planning_time_ms = r.stats.planning_time * 1e3;
            rec.first_solution_ms = r.stats.first_solution_time.map(|t| t * 1e3);
            rec.ro_calls = r.stats.ro_calls;
            rec.ro_successes = r.stats.ro_successes;
            out.series.push((method.name().into(), r.solutions.clone()));
            match r.trajectory {
                None => rec.failure = "budget exhausted".into(),
                Some(traj) => {
                    rec.set_trajectory(&traj, config.rho);
                    let end_ok = traj.start_state().max_abs_diff(&FlatState::rest(start)) <= 1e-6
                        && GoalRegion::at_rest(goal).contains(&traj.end_state());
                    match verify_trajectory(&traj, grid, &config.limits, check_dt(grid, config)) {
                        Ok(()) if end_ok => rec.verified = true,
                        Ok(()) => out.violations.push(format!("trial {trial} {}: endpoints off", method.name())),
                        Err(v) => out.violations.push(format!("trial {trial} {}: {v}", method.name())),
                    }
                    kept = Some(traj);
                }
            }
        }
    }
    out.records.push(rec);
    kept
}

fn trial_endpoints(s: &Scenario, grid: &OccupancyGrid, trial: usize) -> BenchResult<(u64, Vec3, Vec3)> {
    let seed = trial_seed(s.seed, trial);
    let (start, goal) = sample_endpoints(&s.endpoints, &s.env, grid, seed)?;
    Ok((seed, start, goal))
}

fn run_trials(s: &Scenario, f: impl Fn(usize) -> BenchResult<TrialOutput> + Sync + Send) -> BenchResult<Vec<TrialOutput>> {
    s.validate()?;
    (0..s.trials).into_par_iter().map(f).collect()
}

/// Every configured method on every trial.
pub fn run_frontend_bench(s: &Scenario) -> BenchResult<BenchReport> {
    let grid = envgen::build(&s.env)?;
    let trials = run_trials(s, |trial| {
        let (seed, start, goal) = trial_endpoints(s, &grid, trial)?;
        let mut out = TrialOutput::new();
        for &m in &s.methods {
            plan_trial(m, trial, seed, start, goal, &grid, &s.planner_config(seed), &mut out);
        }
        Ok(out)
    })?;
    let names: Vec<String> = s.methods.iter().map(|m| m.name().to_string()).collect();
    Ok(BenchReport::assemble(&s.name, &names, trials))
}

/// Name of the cached front-end rows in back-end reports.
pub const FRONTEND_ROW: &str = "frontend";

/// kRRT* with regional optimization once per trial, then every configured
/// refine mode on that same front-end trajectory. Trials whose front-end
/// failed get a `frontend` row only.
pub fn run_backend_bench(s: &Scenario) -> BenchResult<BenchReport> {
    let grid = envgen::build(&s.env)?;
    let trials = run_trials(s, |trial| {
        let (seed, start, goal) = trial_endpoints(s, &grid, trial)?;
        let mut out = TrialOutput::new();
        let config = s.planner_config(seed);
        let front = plan_trial(Method::KrrtWith, trial, seed, start, goal, &grid, &config, &mut out);
        out.records[0].method = FRONTEND_ROW.into();
        out.timings[0].method = FRONTEND_ROW.into();
        let Some(front) = front.filter(|_| out.records[0].verified) else {
            return Ok(out);
        };
        for &mode in &s.modes {
            out.records.push(refine_trial(mode, trial, seed, &front, &grid, s, &mut out.timings, &mut out.violations)?);
        }
        Ok(out)
    })?;
    let mut names = vec![FRONTEND_ROW.to_string()];
    names.extend(s.modes.iter().map(|m| m.name().to_string()));
    Ok(BenchReport::assemble(&s.name, &names, trials))
}

#[allow(clippy::too_many_arguments)]
fn refine_trial(
    mode: RefineMode,
    trial: usize,
    seed: u64,
    front: &PiecewiseTrajectory,
    grid: &OccupancyGrid,
    s: &Scenario,
    timings: &mut Vec<TimingRecord>,
    violations: &mut Vec<String>,
) -> BenchResult<TrialRecord> {
    let config = RefineConfig { mode, ..s.refine };
    let t0 = Instant::now();
    let outcome = refine(front, grid, &s.planner.limits, &config)?;
    timings.push(TimingRecord { trial, method: mode.name().into(), wall_ms: t0.elapsed().as_secs_f64() * 1e3 });
    let mut rec = TrialRecord::new(trial, seed, mode.name());
    rec.planning_time_ms = s.planner.clock.elapsed(&outcome.work) * 1e3;
    rec.iterations = Some(outcome.iterations);
    match &outcome.refined {
        None => rec.failure = outcome.failure.map_or_else(String::new, |f| format!("{f:?}")),
        Some(traj) => {
            rec.set_trajectory(traj, config.weights.rho);
            let dt = config.check_dt.unwrap_or_else(|| grid.default_check_dt(s.planner.limits.v_max));
            let err = endpoint_error(traj, &front.start_state(), &front.end_state());
            match verify_trajectory(traj, grid, &s.planner.limits, dt) {
                Ok(()) if err <= ENDPOINT_TOL => rec.verified = true,
                Ok(()) => violations.push(format!("trial {trial} {}: endpoint error {err:.3e}", mode.name())),
                Err(v) => violations.push(format!("trial {trial} {}: {v}", mode.name())),
            }
        }
    }
    Ok(rec)
}

/// One improvement of an anytime run; `cost` is divided by 100.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub trial: usize,
    pub method: String,
    pub time_s: f64,
    pub cost: f64,
}

/// Mean cost at a checkpoint over the trials every method has solved by then.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub checkpoint_s: f64,
    pub method: String,
    pub mean_cost: Option<f64>,
    pub trials: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceReport {
    pub bench: BenchReport,
    pub series: Vec<SeriesPoint>,
    pub curve: Vec<CurvePoint>,
    /// Mean first-solution cost per method over trials all methods solved.
    pub first_solution: Vec<(String, Option<f64>)>,
}

impl ConvergenceReport {
    pub fn curve_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a CurvePoint> + 'a {
        self.curve.iter().filter(move |c| c.method == method)
    }

    pub fn first_solution_for(&self, method: &str) -> Option<f64> {
        self.first_solution.iter().find(|(m, _)| m == method).and_then(|(_, c)| *c)
    }

    pub fn deterministic_csv(&self) -> BenchResult<Vec<(&'static str, String)>> {
        let mut files = self.bench.deterministic_csv()?;
        files.push(("series.csv", csv_text(&self.series, SERIES_HEADER)?));
        files.push(("curve.csv", csv_text(&self.curve, CURVE_HEADER)?));
        Ok(files)
    }

    /// Writes the bench CSVs plus `series.csv` and `curve.csv`.
    pub fn write_csv(&self, dir: &Path) -> BenchResult<()> {
        self.bench.write_csv(dir)?;
        write_files(dir, &self.deterministic_csv()?[2..])
    }
}

fn cost_at(series: &[SolutionRecord], t: f64) -> Option<f64> {
    series.iter().take_while(|s| s.time <= t).last().map(|s| s.cost)
}

/// Anytime runs of every configured method; costs are tracked against
/// `checkpoints` evenly spaced times up to the budget.
pub fn run_convergence(s: &Scenario) -> BenchResult<ConvergenceReport> {
    let grid = envgen::build(&s.env)?;
    let trials = run_trials(s, |trial| {
        let (seed, start, goal) = trial_endpoints(s, &grid, trial)?;
        let mut out = TrialOutput::new();
        let config = PlannerConfig { anytime: true, ..s.planner_config(seed) };
        for &m in &s.methods {
            plan_trial(m, trial, seed, start, goal, &grid, &config, &mut out);
        }
        Ok(out)
    })?;
    let names: Vec<String> = s.methods.iter().map(|m| m.name().to_string()).collect();
    // per trial, per method solution series (empty on errors)
    let table: Vec<Vec<Vec<SolutionRecord>>> = trials
        .iter()
        .map(|t| {
            names
                .iter()
                .map(|n| t.series.iter().find(|(m, _)| m == n).map(|(_, v)| v.clone()).unwrap_or_default())
                .collect()
        })
        .collect();
    let mut series = Vec::new();
    for (trial, row) in table.iter().enumerate() {
        for (name, sols) in names.iter().zip(row) {
            series.extend(sols.iter().map(|p| SeriesPoint { trial, method: name.clone(), time_s: p.time, cost: p.cost / 100.0 }));
        }
    }
    let mut curve = Vec::new();
    for k in 1..=s.checkpoints {
        let t = s.budget * k as f64 / s.checkpoints as f64;
        let joint: Vec<Vec<f64>> = table
            .iter()
            .filter_map(|row| row.iter().map(|sols| cost_at(sols, t)).collect::<Option<Vec<f64>>>())
            .collect();
        for (i, name) in names.iter().enumerate() {
            curve.push(CurvePoint {
                checkpoint_s: t,
                method: name.clone(),
                mean_cost: mean(joint.iter().map(|c| c[i] / 100.0)),
                trials: joint.len(),
            });
        }
    }
    let solved: Vec<&Vec<Vec<SolutionRecord>>> = table.iter().filter(|row| row.iter().all(|s| !s.is_empty())).collect();
    let first_solution = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), mean(solved.iter().map(|row| row[i][0].cost / 100.0))))
        .collect();
    Ok(ConvergenceReport { bench: BenchReport::assemble(&s.name, &names, trials), series, curve, first_solution })
}

/// A seeded batch of short colliding edges handed straight to the regional
/// optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegionalSuite {
    pub env: EnvSpec,
    pub edges: usize,
    pub seed: u64,
    /// Straight-line edge length range (m).
    pub min_length: f64,
    pub max_length: f64,
    pub rho: f64,
    pub limits: Limits,
    pub regional: RegionalConfig,
}

impl Default for RegionalSuite {
    fn default() -> Self {
        RegionalSuite {
            env: EnvSpec::forest(1),
            edges: 200,
            seed: 1,
            min_length: 2.0,
            max_length: 6.0,
            rho: 100.0,
            limits: Limits::default(),
            regional: RegionalConfig::default(),
        }
    }
}

/// One edge of a regional suite; metric fields are empty unless `success`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionalRecord {
    pub edge: usize,
    pub length: f64,
    pub collision_fraction: f64,
    pub success: bool,
    pub failure: String,
    pub iterations: usize,
    pub attractors: usize,
    pub duration: Option<f64>,
    pub jerk_integration: Option<f64>,
    pub verified: bool,
}

const REGIONAL_HEADER: &[&str] = &[
    "edge", "length", "collision_fraction", "success", "failure", "iterations", "attractors", "duration", "jerk_integration",
    "verified",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RegionalReport {
    pub records: Vec<RegionalRecord>,
    pub violations: Vec<String>,
}

impl RegionalReport {
    pub fn success_rate(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        100.0 * self.records.iter().filter(|r| r.success).count() as f64 / self.records.len() as f64
    }

    pub fn deterministic_csv(&self) -> BenchResult<Vec<(&'static str, String)>> {
        Ok(vec![("regional.csv", csv_text(&self.records, REGIONAL_HEADER)?)])
    }

    pub fn write_csv(&self, dir: &Path) -> BenchResult<()> {
        write_files(dir, &self.deterministic_csv()?)
    }
}

/// Draws `edges` rest-to-rest edges with free endpoints whose limit-aware
/// steering collides, in a fixed order given `seed`.
pub fn colliding_edges(s: &RegionalSuite, grid: &OccupancyGrid) -> BenchResult<Vec<(FlatState, FlatState, PiecewiseTrajectory, f64)>> {
    if !(s.min_length > 0.0 && s.max_length >= s.min_length) {
        return Err(BenchError::Config("edge lengths must satisfy 0 < min ≤ max".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let e = s.env.extents;
    let margin = Vec3::new(1.0, 1.0, 0.5).component_min(e * 0.5);
    let dt = grid.default_check_dt(s.limits.v_max);
    let mut out = Vec::with_capacity(s.edges);
    let mut attempts = 0usize;
    while out.len() < s.edges {
        attempts += 1;
        if attempts > 1000 * (s.edges + 1) {
            return Err(BenchError::Config("could not find enough colliding edges".into()));
        }
        let a = Vec3::new(
            rng.random_range(margin.x..=e.x - margin.x),
            rng.random_range(margin.y..=e.y - margin.y),
            rng.random_range(margin.z..=e.z - margin.z),
        );
        let heading: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        let b = a + Vec3::new(heading.cos(), heading.sin(), 0.0) * rng.random_range(s.min_length..=s.max_length);
        if grid.is_occupied(a) || grid.is_occupied(b) {
            continue;
        }
        let (x1, x2) = (FlatState::rest(a), FlatState::rest(b));
        let steered = steer::steer_with_limits(&x1, &x2, s.rho, &s.limits);
        let report = check_trajectory(&steered.trajectory, grid, dt);
        if !report.is_free() {
            let fraction = report.total_duration() / steered.tau;
            out.push((x1, x2, steered.trajectory, fraction));
        }
    }
    Ok(out)
}

/// Runs the regional optimizer once per edge and verifies every success.
pub fn run_regional_suite(s: &RegionalSuite) -> BenchResult<RegionalReport> {
    s.env.validate()?;
    s.regional.validate()?;
    let grid = envgen::build(&s.env)?;
    let edges = colliding_edges(s, &grid)?;
    let dt = s.regional.check_dt(&grid, &s.limits);
    let rows: Vec<(RegionalRecord, Option<String>)> = edges
        .par_iter()
        .enumerate()
        .map(|(edge, (x1, x2, traj, fraction))| {
            let out = regional_optimize(x1, x2, traj, &grid, &s.limits, &s.regional)?;
            let mut rec = RegionalRecord {
                edge,
                length: x1.position.distance(x2.position),
                collision_fraction: *fraction,
                success: out.success(),
                failure: out.failure.map_or_else(String::new, |f| format!("{f:?}")),
                iterations: out.iterations,
                attractors: out.attractors.len(),
                duration: None,
                jerk_integration: None,
                verified: false,
            };
            let mut violation = None;
            if let Some(t) = &out.trajectory {
                rec.duration = Some(t.duration());
                rec.jerk_integration = Some(t.jerk_integral());
                let err = endpoint_error(t, x1, x2);
                match verify_trajectory(t, &grid, &s.limits, dt) {
                    Ok(()) if err <= ENDPOINT_TOL => rec.verified = true,
                    Ok(()) => violation = Some(format!("edge {edge}: endpoint error {err:.3e}")),
                    Err(v) => violation = Some(format!("edge {edge}: {v}")),
                }
            }
            Ok((rec, violation))
        })
        .collect::<BenchResult<_>>()?;
    let mut report = RegionalReport::default();
    for (rec, v) in rows {
        report.records.push(rec);
        report.violations.extend(v);
    }
    Ok(report)
}
