use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kbf::artifact::{self, SvgLayers};
use kbf::bench::{self, BenchCase, BenchConfig, PlannerSpec};
use kbf::scenario::{self, scenario_name};
use kbf::{inject_perception_error, load_scenario};
use kbf_core::planners::{PlanError, PlannerKind};
use kbf_core::sim::{self, FollowConfig, FollowErrorKind};
use kbf_core::{Scenario, UncertaintyBounds};

#[derive(Parser)]
#[command(name = "kbf", version, about = "Kinodynamic barrier-function motion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan once and report the path.
    Plan(PlanArgs),
    /// Plan, then track the plan with the safety-filtered controller.
    Simulate(SimulateArgs),
    /// Seeded timing campaign over scenarios and planners.
    Bench(BenchArgs),
    /// Write a copy of a scenario with perturbed obstacles.
    Inject(InjectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Planner {
    Rrt,
    RrtKbf,
    RobustRrtKbf,
    RrtCbfQp,
}

impl From<Planner> for PlannerKind {
    fn from(p: Planner) -> Self {
        match p {
            Planner::Rrt => PlannerKind::Rrt,
            Planner::RrtKbf => PlannerKind::RrtKbf,
            Planner::RobustRrtKbf => PlannerKind::RobustRrtKbf,
            Planner::RrtCbfQp => PlannerKind::RrtCbfQp,
        }
    }
}

#[derive(Args)]
struct Bounds {
    /// Additive model-error bound for the robust planner.
    #[arg(long, default_value_t = 0.0)]
    delta1: f64,
    /// Multiplicative model-error bound, a fraction in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    delta2: f64,
}

impl Bounds {
    fn get(&self) -> UncertaintyBounds {
        UncertaintyBounds::new(self.delta1, self.delta2)
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "rrt-kbf")]
    planner: Planner,
    /// Defaults to the scenario's planner seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    bounds: Bounds,
    /// Waypoint CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// The true workspace; collisions are judged against it.
    #[arg(long)]
    scenario: PathBuf,
    /// What the robot believes (see `inject`); defaults to the truth.
    #[arg(long)]
    perceived: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rrt-kbf")]
    planner: Planner,
    #[arg(long)]
    seed: Option<u64>,
    /// Planner bounds, and the controller's robust rows when nonzero.
    #[command(flatten)]
    bounds: Bounds,
    #[arg(long, default_value_t = 0.02)]
    dt_ctrl: f64,
    /// Trajectory CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Scenario file; repeat for several.
    #[arg(long, required = true)]
    scenario: Vec<PathBuf>,
    /// Planner; repeat for several. Defaults to rrt, rrt-kbf and rrt-cbf-qp.
    #[arg(long, value_enum)]
    planner: Vec<Planner>,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Seed of the first run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    bounds: Bounds,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center displacement (m).
    #[arg(long, default_value_t = 0.5)]
    pos_err: f64,
    /// Largest radius change (m).
    #[arg(long, default_value_t = 0.25)]
    radius_err: f64,
    /// Perceived scenario JSON; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    /// Bad arguments or unreadable input files.
    Input(anyhow::Error),
    /// No path, or the controller gave up.
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => plan(a),
        Command::Simulate(a) => simulate(a),
        Command::Bench(a) => bench(a),
        Command::Inject(a) => inject(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(e)) => {
            eprintln!("kbf: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("kbf: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Scenario> {
    load_scenario(path).with_context(|| format!("scenario {}", path.display()))
}

fn check_bounds(b: &Bounds) -> anyhow::Result<UncertaintyBounds> {
    let u = b.get();
    u.validate().map_err(|r| anyhow!("invalid bounds: {r}"))?;
    Ok(u)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn plan_failure(e: PlanError) -> Failure {
    match e {
        PlanError::NoPath { .. } => Failure::Run(anyhow!(e)),
        other => Failure::Input(anyhow!(other)),
    }
}

fn plan(a: PlanArgs) -> Result<(), Failure> {
    let s = load(&a.scenario)?;
    let bounds = check_bounds(&a.bounds)?;
    let kind = PlannerKind::from(a.planner);
    let seed = a.seed.unwrap_or(s.planner.seed);
    let (out, _) = bench::plan_timed(kind, &s, &bounds, &mut bench::seeded_rng(seed));
    let p = out.map_err(plan_failure)?;
    println!(
        "{kind}: {} waypoints, {} nodes, {} iterations, length {:.3} m, duration {:.2} s, {:.3} ms",
        p.waypoints.len(),
        p.nodes.len(),
        p.iterations_used,
        p.path_length(),
        p.duration(),
        p.wall_time * 1e3
    );
    if let Some(c) = p.min_clearance(&s.obstacles, &s.robot) {
        println!("min clearance {c:.4} m");
    }
    if let Some(path) = &a.out {
        artifact::write_plan_csv(&p, create(path)?).map_err(anyhow::Error::from)?;
    }
    if let Some(path) = &a.svg {
        let layers = SvgLayers {
            plan: Some(&p),
            ..Default::default()
        };
        artifact::emit_svg(&s, &layers, path).map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let truth = load(&a.scenario)?;
    let perceived = match &a.perceived {
        Some(p) => load(p)?,
        None => truth.clone(),
    };
    if perceived.obstacles.len() != truth.obstacles.len() {
        return Err(anyhow!("perceived and true scenarios differ in obstacle count").into());
    }
    let bounds = check_bounds(&a.bounds)?;
    let kind = PlannerKind::from(a.planner);
    let seed = a.seed.unwrap_or(perceived.planner.seed);
    let (out, _) = bench::plan_timed(kind, &perceived, &bounds, &mut bench::seeded_rng(seed));
    let p = out.map_err(plan_failure)?;
    println!(
        "{kind}: {} waypoints, duration {:.2} s, planned in {:.3} ms",
        p.waypoints.len(),
        p.duration(),
        p.wall_time * 1e3
    );
    let cfg = FollowConfig {
        dt_ctrl: a.dt_ctrl,
        uncertainty: (bounds != UncertaintyBounds::ZERO).then_some(bounds),
        ..FollowConfig::default()
    };
    // The plant moves through the true workspace; the controller only
    // knows the perceived obstacles.
    let sim_scenario = Scenario {
        obstacles: truth.obstacles.clone(),
        ..perceived.clone()
    };
    let (traj, failure) = match sim::follow_path(&p, &sim_scenario, &perceived.obstacles, &cfg) {
        Ok(t) => (t, None),
        Err(e) => {
            if let FollowErrorKind::InvalidInput(_) = e.kind {
                return Err(anyhow!(e).into());
            }
            let msg = e.to_string();
            (e.partial, Some(msg))
        }
    };
    println!("{} ticks, {:.2} s", traj.len(), traj.duration());
    match sim::min_barrier(&traj) {
        Some(m) => println!(
            "min barrier {:.6} at t = {:.2} s (obstacle {}), {} colliding ticks",
            m.value,
            m.t,
            m.obstacle,
            sim::collision_ticks(&traj, 1e-6)
        ),
        None => println!("no obstacles"),
    }
    if let Some(path) = &a.out {
        artifact::write_trajectory_csv(&traj, create(path)?).map_err(anyhow::Error::from)?;
    }
    if let Some(path) = &a.svg {
        let layers = SvgLayers {
            plan: Some(&p),
            trajectory: Some(&traj),
            perceived: a.perceived.is_some().then_some(&perceived),
        };
        artifact::emit_svg(&truth, &layers, path).map_err(anyhow::Error::from)?;
    }
    match failure {
        Some(msg) => Err(Failure::Run(anyhow!(msg))),
        None => Ok(()),
    }
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let bounds = check_bounds(&a.bounds)?;
    let cases = a
        .scenario
        .iter()
        .map(|p| {
            Ok(BenchCase {
                name: scenario_name(p),
                scenario: load(p)?,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let planners: Vec<PlannerSpec> = if a.planner.is_empty() {
        [PlannerKind::Rrt, PlannerKind::RrtKbf, PlannerKind::RrtCbfQp]
            .into_iter()
            .map(PlannerSpec::nominal)
            .collect()
    } else {
        a.planner
            .iter()
            .map(|&p| PlannerSpec {
                kind: p.into(),
                bounds,
            })
            .collect()
    };
    let cfg = BenchConfig {
        runs: a.runs,
        seed_base: a.seed,
        jobs: a.jobs,
        ..BenchConfig::default()
    };
    let report = bench::run_bench(&cases, &planners, &cfg);
    print!("{report}");
    for r in &report.rows {
        if r.failures() > 0 {
            println!("{} on {}: {} of {} runs failed", r.planner, r.scenario, r.failures(), r.runs);
        }
    }
    if let Some(path) = &a.out {
        report.write_csv(create(path)?).map_err(anyhow::Error::from)?;
    }
    Ok(())
}

fn inject(a: InjectArgs) -> Result<(), Failure> {
    let s = load(&a.scenario)?;
    if !(a.pos_err >= 0.0 && a.radius_err >= 0.0 && a.pos_err.is_finite() && a.radius_err.is_finite()) {
        return Err(anyhow!("errors must be finite and nonnegative").into());
    }
    let p = inject_perception_error(&s, a.pos_err, a.radius_err, &mut bench::seeded_rng(a.seed));
    for w in p.warnings() {
        eprintln!("kbf: warning: {w}");
    }
    let json = scenario::scenario_to_json(&p.perceived) + "\n";
    match &a.out {
        Some(path) => artifact::write_file(path, json.as_bytes()).map_err(anyhow::Error::from)?,
        None => io::stdout()
            .write_all(json.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}
