//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness so the lines always show.

use std::io::Write;
use std::time::Instant;

use kinoplan::bench::{self, BenchReport, ConvergenceReport, RegionalReport, FRONTEND_ROW};
use kinoplan::{Method, RegionalSuite, Scenario};
use kinoplan_core::qp::{constraint_system, solve_closed_form, solve_dense_kkt, ReducedProblem};
use kinoplan_core::{steer, AttractingPoint, CostWeights, FlatState, PiecewiseTrajectory, PolySegment, QpProblem, RefineMode, Vec3};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RHO: f64 = 100.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(id: u32, name: &str, o: &Outcome, secs: f64) {
    let mut out = std::io::stdout().lock();
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    writeln!(out, "criterion {id} {verdict} [{name}, {secs:.1} s] {}", o.detail).unwrap();
    out.flush().unwrap();
}

fn random_vec(rng: &mut ChaCha8Rng, s: f64) -> Vec3 {
    Vec3::new(rng.random_range(-s..s), rng.random_range(-s..s), rng.random_range(-s..s))
}

fn random_state(rng: &mut ChaCha8Rng) -> FlatState {
    FlatState::new(random_vec(rng, 10.0), random_vec(rng, 5.0), random_vec(rng, 3.0))
}

fn bvp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_residual, mut worst_gap) = (0.0f64, f64::NEG_INFINITY);
    let mut times = Vec::new();
    for _ in 0..100 {
        let (x0, x1) = (random_state(&mut rng), random_state(&mut rng));
        let t0 = Instant::now();
        for _ in 0..20 {
            std::hint::black_box(steer::solve_fixed_bvp(std::hint::black_box(&x0), &x1, RHO));
        }
        times.push(t0.elapsed().as_secs_f64() / 20.0);
        let r = steer::solve_fixed_bvp(&x0, &x1, RHO);
        let residual = r.trajectory.start_state().max_abs_diff(&x0).max(r.trajectory.end_state().max_abs_diff(&x1));
        worst_residual = worst_residual.max(residual);
        for k in 0..400 {
            let tau = 0.01 * 4000f64.powf(k as f64 / 399.0);
            let c = steer::cost_for_tau(&x0, &x1, RHO, tau);
            worst_gap = worst_gap.max((r.cost - c) / c.abs().max(1.0));
        }
    }
    times.sort_by(f64::total_cmp);
    let median_us = times[50] * 1e6;
    Outcome {
        pass: worst_residual < 1e-9 && worst_gap <= 1e-6 && median_us < 1000.0,
        detail: format!(
            "max residual {worst_residual:.2e}, max J(τ*)-J(τ) over grid {worst_gap:.2e}, median solve {median_us:.2} µs{}",
            if median_us < 50.0 { "" } else { " (above 50 µs soft target)" }
        ),
    }
}

fn random_problem(rng: &mut ChaCha8Rng) -> QpProblem {
    let j = rng.random_range(4..=12);
    let segments: Vec<PolySegment> = (0..j)
        .map(|_| {
            let mut c = [[0.0; 6]; 3];
            for v in c.iter_mut().flatten() {
                *v = rng.random_range(-2.0..2.0);
            }
            PolySegment::new(c, rng.random_range(0.2..1.2))
        })
        .collect();
    let weights = CostWeights {
        rho: RHO,
        lambda_s: rng.random_range(0.01..2.0),
        lambda_r: rng.random_range(0.0..2.0),
        lambda_c: rng.random_range(0.0..5.0),
    };
    let mut p = QpProblem::from_reference(&PiecewiseTrajectory::new(segments), weights);
    p.start = FlatState::new(random_vec(rng, 3.0), random_vec(rng, 2.0), random_vec(rng, 1.0));
    p.end = FlatState::new(random_vec(rng, 3.0), random_vec(rng, 2.0), random_vec(rng, 1.0));
    let total: f64 = p.durations.iter().sum();
    for _ in 0..rng.random_range(0..=5) {
        let a = rng.random_range(0.0..total);
        let b = (a + rng.random_range(0.05..1.5)).min(total);
        p.attractors.push(AttractingPoint::new(random_vec(rng, 4.0), (a, b), &p.durations).unwrap());
    }
    p
}

fn stacked(t: &PiecewiseTrajectory, axis: usize) -> DVector<f64> {
    DVector::from_iterator(6 * t.segments.len(), t.segments.iter().flat_map(|s| s.coeffs[axis]))
}

fn qp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut obj, mut coef, mut res, mut grad, mut fd) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let p = random_problem(&mut rng);
        let fast = solve_closed_form(&p).unwrap();
        let dense = solve_dense_kkt(&p).unwrap();
        let scale = fast.objective_value.abs().max(dense.objective_value.abs()).max(1.0);
        obj = obj.max((fast.objective_value - dense.objective_value).abs() / scale);
        let (a, d) = constraint_system(&p);
        for axis in 0..3 {
            coef = coef.max((stacked(&fast.trajectory, axis) - stacked(&dense.trajectory, axis)).amax());
            res = res.max((&a * stacked(&fast.trajectory, axis) - &d[axis]).amax());
        }
        let red = ReducedProblem::new(&p).unwrap();
        let opt = red.solve().unwrap();
        for axis in 0..3 {
            grad = grad.max(red.gradient(axis, &opt[axis]).amax());
            let x = DVector::from_fn(red.free_dimension(), |_, _| rng.random_range(-1.0..1.0));
            let g = red.gradient(axis, &x);
            for k in 0..x.len() {
                let h = 1e-5;
                let (mut xp, mut xm) = (x.clone(), x.clone());
                xp[k] += h;
                xm[k] -= h;
                let diff = (red.objective(axis, &xp) - red.objective(axis, &xm)) / (2.0 * h);
                fd = fd.max((diff - g[k]).abs() / g[k].abs().max(1.0));
            }
        }
    }
    Outcome {
        pass: obj < 1e-8 && coef < 1e-6 && res < 1e-9 && grad < 1e-7 && fd < 1e-3,
        detail: format!(
            "objective rel gap {obj:.2e}, coefficient gap {coef:.2e}, constraint residual {res:.2e}, reduced gradient {grad:.2e}, finite-difference gap {fd:.2e}"
        ),
    }
}

fn regional(r: &RegionalReport) -> Outcome {
    let within = r.records.iter().filter(|x| x.success && x.iterations <= 10).count();
    let rate = 100.0 * within as f64 / r.records.len().max(1) as f64;
    let verified = r.records.iter().filter(|x| x.success).all(|x| x.verified);
    Outcome {
        pass: r.records.len() == 200 && rate >= 80.0 && verified && r.violations.is_empty(),
        detail: format!("{within}/{} edges repaired within 10 iterations ({rate:.1}%), all successes rechecked: {verified}", r.records.len()),
    }
}

fn rate(r: &BenchReport, m: Method) -> f64 {
    r.summary_for(m.name()).map_or(0.0, |s| s.success_rate)
}

fn frontend(corridor: &BenchReport, dw: &ConvergenceReport) -> Outcome {
    let (with, without) = (rate(corridor, Method::KrrtWith), rate(corridor, Method::KrrtWithout));
    let curve_w: Vec<_> = dw.curve_for(Method::KrrtWith.name()).collect();
    let curve_wo: Vec<_> = dw.curve_for(Method::KrrtWithout.name()).collect();
    let defined: Vec<(f64, f64)> =
        curve_w.iter().zip(&curve_wo).filter_map(|(a, b)| Some((a.mean_cost?, b.mean_cost?))).collect();
    let below = defined.iter().filter(|(a, b)| a <= b).count();
    let (fw, fwo) = (dw.first_solution_for(Method::KrrtWith.name()), dw.first_solution_for(Method::KrrtWithout.name()));
    let first_ok = matches!((fw, fwo), (Some(a), Some(b)) if a < b);
    let curve_ok = !defined.is_empty() && below as f64 >= 0.8 * curve_w.len() as f64;
    Outcome {
        pass: with >= without + 10.0 && curve_ok && first_ok,
        detail: format!(
            "corridor success w/ {with:.1}% vs w/o {without:.1}%; double-wall curve w/ ≤ w/o at {below}/{} checkpoints ({} with joint data); first-solution cost/100 w/ {} vs w/o {}",
            curve_w.len(),
            defined.len(),
            fmt(fw),
            fmt(fwo)
        ),
    }
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3}"))
}

fn baselines(corridor: &BenchReport, forest: &BenchReport) -> Outcome {
    let (fw, fwo) = (rate(corridor, Method::KfmtWith), rate(corridor, Method::KfmtWithout));
    let (ka, rrt) = (Method::KaStar.name(), Method::KrrtWith.name());
    let joint: Vec<(f64, f64)> = forest
        .records_for(ka)
        .filter_map(|a| {
            let b = forest.records_for(rrt).find(|b| b.trial == a.trial)?;
            Some((a.cost?, b.cost?))
        })
        .collect();
    let n = joint.len().max(1) as f64;
    let (cost_ka, cost_rrt) = (joint.iter().map(|c| c.0).sum::<f64>() / n, joint.iter().map(|c| c.1).sum::<f64>() / n);
    let time = |m: &str| forest.summary_for(m).and_then(|s| s.mean_planning_time_ms);
    let (t_ka, t_rrt) = (time(ka), time(rrt));
    let time_ok = matches!((t_ka, t_rrt), (Some(a), Some(b)) if a >= 10.0 * b);
    Outcome {
        pass: fw > fwo && !joint.is_empty() && cost_ka < cost_rrt && time_ok,
        detail: format!(
            "corridor kFMT* success w/ {fw:.1}% vs w/o {fwo:.1}%; forest joint trials {}: cost/100 kA* {cost_ka:.3} vs kRRT*-w/ {cost_rrt:.3}; mean time kA* {} ms vs kRRT*-w/ {} ms (kA* success {:.1}%)",
            joint.len(),
            fmt(t_ka),
            fmt(t_rrt),
            rate(forest, Method::KaStar)
        ),
    }
}

fn backend(r: &BenchReport) -> Outcome {
    let (p, b1) = (RefineMode::Proposed.name(), RefineMode::ResemblanceOnly.name());
    let front = r.summary_for(FRONTEND_ROW).map_or(0, |s| s.trials);
    let proposed = r.summary_for(p);
    let success = proposed.map_or(0.0, |s| s.success_rate);
    let jerk = |m: &str| r.summary_for(m).and_then(|s| s.mean_jerk_integration);
    let (jp, jb) = (jerk(p), jerk(b1));
    let jerk_ok = matches!((jp, jb), (Some(a), Some(b)) if a <= 0.8 * b);
    let wall = r.mean_wall_ms(p);
    let preserved = r.violations.iter().all(|v| !v.contains("endpoint"));
    Outcome {
        pass: front == 100 && success >= 90.0 && jerk_ok && wall.is_some_and(|w| w < 5.0) && preserved,
        detail: format!(
            "{front} trials, {} with a front-end; proposed success {success:.1}%; mean jerk proposed {} vs resemblance_only {}; mean refine wall time {} ms (modeled {} ms); endpoints preserved: {preserved}",
            proposed.map_or(0, |s| s.trials),
            fmt(jp),
            fmt(jb),
            fmt(wall),
            fmt(proposed.and_then(|s| s.mean_planning_time_ms))
        ),
    }
}

/// Everything criteria 3 to 6 produce, with the deterministic CSV texts.
struct Runs {
    regional: RegionalReport,
    corridor: BenchReport,
    double_wall: ConvergenceReport,
    forest: BenchReport,
    backend: BenchReport,
    csv: Vec<(String, String)>,
    secs: [f64; 4],
}

fn run_all() -> Runs {
    let t = Instant::now();
    let regional = bench::run_regional_suite(&RegionalSuite::default()).unwrap();
    let t3 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let corridor = bench::run_frontend_bench(&Scenario::corridor()).unwrap();
    let double_wall = bench::run_convergence(&Scenario::double_wall()).unwrap();
    let t4 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let forest = bench::run_frontend_bench(&Scenario::forest()).unwrap();
    let t5 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let backend = bench::run_backend_bench(&Scenario::forest_backend()).unwrap();
    let t6 = t.elapsed().as_secs_f64();
    let mut csv = Vec::new();
    let mut add = |prefix: &str, files: Vec<(&'static str, String)>| {
        csv.extend(files.into_iter().map(|(name, text)| (format!("{prefix}/{name}"), text)));
    };
    add("regional", regional.deterministic_csv().unwrap());
    add("corridor", corridor.deterministic_csv().unwrap());
    add("double_wall", double_wall.deterministic_csv().unwrap());
    add("forest", forest.deterministic_csv().unwrap());
    add("forest_backend", backend.deterministic_csv().unwrap());
    Runs { regional, corridor, double_wall, forest, backend, csv, secs: [t3, t4, t5, t6] }
}

fn invariants(r: &Runs) -> Outcome {
    let violations: Vec<&String> = r
        .regional
        .violations
        .iter()
        .chain(&r.corridor.violations)
        .chain(&r.double_wall.bench.violations)
        .chain(&r.forest.violations)
        .chain(&r.backend.violations)
        .collect();
    let checked = r.regional.records.iter().filter(|x| x.success).count()
        + [&r.corridor, &r.double_wall.bench, &r.forest, &r.backend]
            .iter()
            .map(|b| b.records.iter().filter(|x| x.success).count())
            .sum::<usize>();
    let unverified = r.regional.records.iter().filter(|x| x.success && !x.verified).count()
        + [&r.corridor, &r.double_wall.bench, &r.forest, &r.backend]
            .iter()
            .map(|b| b.records.iter().filter(|x| x.success && !x.verified).count())
            .sum::<usize>();
    let mut detail = format!("{checked} successful trajectories rechecked, {} violations", violations.len());
    for v in violations.iter().take(5) {
        detail.push_str(&format!("; {v}"));
    }
    Outcome { pass: violations.is_empty() && unverified == 0, detail }
}

fn determinism(a: &Runs, b: &Runs) -> Outcome {
    let differing: Vec<&str> =
        a.csv.iter().zip(&b.csv).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let bytes: usize = a.csv.iter().map(|(_, t)| t.len()).sum();
    Outcome {
        pass: a.csv.len() == b.csv.len() && differing.is_empty(),
        detail: format!("{} CSV files ({bytes} bytes) compared, differing: {:?}", a.csv.len(), differing),
    }
}

fn main() {
    // libtest passes flags such as --nocapture or a name filter; a filter
    // that does not name this suite skips it
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return;
    }
    let mut failed = Vec::new();
    let mut record = |id: u32, name: &str, o: Outcome, secs: f64| {
        line(id, name, &o, secs);
        if !o.pass {
            failed.push(id);
        }
    };

    let t = Instant::now();
    let o = bvp();
    record(1, "steering", o, t.elapsed().as_secs_f64());
    let t = Instant::now();
    let o = qp_oracle();
    record(2, "closed-form QP", o, t.elapsed().as_secs_f64());

    let first = run_all();
    let [t3, t4, t5, t6] = first.secs;
    record(3, "regional optimizer", regional(&first.regional), t3);
    record(4, "front-end regional effect", frontend(&first.corridor, &first.double_wall), t4);
    record(5, "kFMT*/kA* baselines", baselines(&first.corridor, &first.forest), t5);
    record(6, "back-end refiner", backend(&first.backend), t6);
    record(7, "pipeline invariants", invariants(&first), 0.0);

    let t = Instant::now();
    let second = run_all();
    record(8, "determinism", determinism(&first, &second), t.elapsed().as_secs_f64());

    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
