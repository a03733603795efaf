use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kinoplan::bench::{self, BenchReport, Method, Scenario};
use kinoplan::{calibrate, io, verify};
use kinoplan_core::{envgen, refine, EnvKind, EnvSpec, FlatState, GoalRegion, OccupancyGrid, RefineConfig, RefineMode, Vec3};

#[derive(Parser)]
#[command(name = "kinoplan", version, about = "Kinodynamic planning with regional trajectory optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate (and inflate) a benchmark map and save it as a grid file.
    GenEnv {
        #[command(flatten)]
        source: ScenarioArgs,
        /// Map type when no scenario is given.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan one trajectory between two rest states.
    Plan {
        #[command(flatten)]
        source: ScenarioArgs,
        /// Grid file to plan in instead of the scenario's map.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[arg(long, default_value = "krrt_with")]
        method: String,
        #[arg(long, value_parser = parse_vec3)]
        start: Vec3,
        #[arg(long, value_parser = parse_vec3)]
        goal: Vec3,
        /// Trajectory JSON output.
        #[arg(long)]
        out: PathBuf,
        /// Optional sampled CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Refine a collision-free trajectory.
    Refine {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, default_value = "proposed")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare front-end planners over seeded trials.
    BenchFrontend {
        #[command(flatten)]
        source: ScenarioArgs,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Compare refine modes over cached front-end trajectories.
    BenchBackend {
        #[command(flatten)]
        source: ScenarioArgs,
        #[command(flatten)]
        batch: BatchArgs,
        /// Comma-separated refine modes.
        #[arg(long)]
        modes: Option<String>,
    },
    /// Anytime cost-versus-time curves.
    Convergence {
        #[command(flatten)]
        source: ScenarioArgs,
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Run the regional optimizer on seeded colliding forest edges.
    BenchRegional {
        #[arg(long, default_value_t = 200)]
        edges: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Measure per-operation costs and print them as a clock table.
    Calibrate {
        #[arg(long, default_value_t = 20000)]
        pairs: usize,
    },
    /// Print a scenario as TOML.
    ShowScenario {
        #[command(flatten)]
        source: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario: corridor, forest, forest_backend, double_wall.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    budget_ms: Option<f64>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated planner methods.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err("expected x,y,z".into()),
    }
}

fn parse_kind(s: &str) -> Result<EnvKind> {
    Ok(match s {
        "forest" => EnvKind::Forest,
        "cave" => EnvKind::Cave,
        "corridor" => EnvKind::Corridor,
        "double_wall" => EnvKind::DoubleWall,
        "empty" => EnvKind::Empty,
        _ => bail!("unknown map kind {s}"),
    })
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let mut s = match (&self.scenario, &self.preset) {
            (Some(p), _) => io::load_scenario(p)?,
            (None, Some(name)) => Scenario::preset(name).ok_or_else(|| anyhow!("unknown preset {name}"))?,
            (None, None) => Scenario::default(),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
            s.env.seed = seed;
        }
        if let Some(ms) = self.budget_ms {
            s.budget = ms / 1e3;
        }
        s.validate()?;
        Ok(s)
    }
}

impl BatchArgs {
    fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(n) = self.trials {
            s.trials = n;
        }
        if let Some(list) = &self.methods {
            s.methods = list
                .split(',')
                .map(|m| Method::parse(m.trim()).ok_or_else(|| anyhow!("unknown method {m}")))
                .collect::<Result<_>>()?;
        }
        Ok(())
    }
}

fn parse_mode(s: &str) -> Result<RefineMode> {
    RefineMode::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| anyhow!("unknown refine mode {s}"))
}

fn report(dir: &Path, r: &BenchReport) -> Result<bool> {
    r.write_csv(dir)?;
    for s in &r.summary {
        println!(
            "{:<18} success {:>6.2}% ({}/{})  time {:>9} ms  cost/100 {:>7}  jerk {:>9}",
            s.method,
            s.success_rate,
            s.successes,
            s.trials,
            fmt(s.mean_planning_time_ms),
            fmt(s.mean_cost),
            fmt(s.mean_jerk_integration)
        );
    }
    for v in &r.violations {
        eprintln!("verification failure: {v}");
    }
    println!("wrote {}", dir.display());
    Ok(r.violations.is_empty())
}

fn fmt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3}"))
}

fn load_map(source: &ScenarioArgs, grid: &Option<PathBuf>) -> Result<(Scenario, OccupancyGrid)> {
    let s = source.load()?;
    let g = match grid {
        Some(p) => io::load_grid(p)?,
        None => envgen::build(&s.env)?,
    };
    Ok((s, g))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenEnv { source, kind, out } => {
            let mut s = source.load()?;
            if let Some(k) = kind {
                let seed = s.env.seed;
                s.env = match parse_kind(&k)? {
                    EnvKind::Forest => EnvSpec::forest(seed),
                    EnvKind::Cave => EnvSpec::cave(seed),
                    EnvKind::Corridor => EnvSpec::corridor(seed),
                    EnvKind::DoubleWall => EnvSpec::double_wall(seed),
                    EnvKind::Empty => EnvSpec::new(EnvKind::Empty, s.env.extents, seed),
                };
            }
            let g = envgen::build(&s.env)?;
            io::save_grid(&out, &g)?;
            println!("{} cells, {} occupied, wrote {}", g.cell_count(), g.occupied_count(), out.display());
            Ok(true)
        }
        Command::Plan { source, grid, method, start, goal, out, csv } => {
            let (s, g) = load_map(&source, &grid)?;
            let m = Method::parse(&method).ok_or_else(|| anyhow!("unknown method {method}"))?;
            let config = s.planner_config(s.seed);
            let r = m.plan(&FlatState::rest(start), &GoalRegion::at_rest(goal), &g, &config)?;
            let Some(traj) = r.trajectory else {
                println!("no solution within {:.3} s ({} nodes)", r.stats.planning_time, r.stats.nodes);
                return Ok(false);
            };
            let dt = config.check_dt.unwrap_or_else(|| g.default_check_dt(config.limits.v_max));
            verify::verify_trajectory(&traj, &g, &config.limits, dt).context("planner output failed verification")?;
            io::save_trajectory_json(&out, &traj)?;
            if let Some(p) = csv {
                io::save_trajectory_csv(&p, &traj, 0.01)?;
            }
            println!(
                "cost/100 {:.3}  duration {:.3} s  length {:.3} m  time {:.1} ms  ro {}/{}",
                r.cost.unwrap_or(f64::NAN) / 100.0,
                traj.duration(),
                traj.arc_length(),
                r.stats.planning_time * 1e3,
                r.stats.ro_successes,
                r.stats.ro_calls
            );
            Ok(true)
        }
        Command::Refine { grid, trajectory, mode, out, csv } => {
            let g = io::load_grid(&grid)?;
            let front = io::load_trajectory_json(&trajectory)?;
            let config = RefineConfig::with_mode(parse_mode(&mode)?);
            let limits = Scenario::default().planner.limits;
            let o = refine(&front, &g, &limits, &config)?;
            let traj = o.trajectory_or(&front);
            if o.success() {
                let dt = g.default_check_dt(limits.v_max);
                verify::verify_trajectory(traj, &g, &limits, dt).context("refined trajectory failed verification")?;
            }
            io::save_trajectory_json(&out, traj)?;
            if let Some(p) = csv {
                io::save_trajectory_csv(&p, traj, 0.01)?;
            }
            println!(
                "{} after {} iterations; jerk {:.3} -> {:.3}",
                if o.success() { "refined" } else { "kept front-end" },
                o.iterations,
                front.jerk_integral(),
                traj.jerk_integral()
            );
            Ok(true)
        }
        Command::BenchFrontend { source, batch } => {
            let mut s = source.load()?;
            batch.apply(&mut s)?;
            report(&batch.output_dir, &bench::run_frontend_bench(&s)?)
        }
        Command::BenchBackend { source, batch, modes } => {
            let mut s = source.load()?;
            batch.apply(&mut s)?;
            if let Some(list) = modes {
                s.modes = list.split(',').map(|m| parse_mode(m.trim())).collect::<Result<_>>()?;
            }
            report(&batch.output_dir, &bench::run_backend_bench(&s)?)
        }
        Command::Convergence { source, batch } => {
            let mut s = source.load()?;
            batch.apply(&mut s)?;
            let r = bench::run_convergence(&s)?;
            r.write_csv(&batch.output_dir)?;
            for (m, c) in &r.first_solution {
                println!("{m:<18} mean first-solution cost/100 {}", fmt(*c));
            }
            let ok = report(&batch.output_dir, &r.bench)?;
            Ok(ok)
        }
        Command::BenchRegional { edges, seed, output_dir } => {
            let r = bench::run_regional_suite(&bench::RegionalSuite { edges, seed, ..Default::default() })?;
            r.write_csv(&output_dir)?;
            let ok = r.records.iter().filter(|x| x.success).count();
            println!("repaired {ok}/{} edges ({:.2}%), wrote {}", r.records.len(), r.success_rate(), output_dir.display());
            for v in &r.violations {
                eprintln!("verification failure: {v}");
            }
            Ok(r.violations.is_empty())
        }
        Command::Calibrate { pairs } => {
            let clock = calibrate::measure(pairs)?;
            print!("[planner.clock]\n{}", toml::to_string(&clock)?);
            Ok(true)
        }
        Command::ShowScenario { source } => {
            print!("{}", toml::to_string_pretty(&source.load()?)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
