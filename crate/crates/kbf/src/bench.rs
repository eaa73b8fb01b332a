//! Seeded benchmark campaigns.
//!
//! Run `i` of every (scenario, planner) pair uses seed `seed_base + i`, so
//! all planners see the same seeds. Work is issued scenario by scenario,
//! seed by seed, cycling through the planners within one seed so slow
//! drifts in machine speed hit every planner alike. Only the planning call
//! is timed.

use std::fmt;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use kbf_core::planners::{self, PlanError, PlannerKind};
use kbf_core::{PlanResult, Scenario, UncertaintyBounds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ArtifactError;

/// Runs the selected planner. `bounds` is only read by the robust planner.
pub fn plan<R: Rng + ?Sized>(
    kind: PlannerKind,
    s: &Scenario,
    bounds: &UncertaintyBounds,
    rng: &mut R,
) -> Result<PlanResult, PlanError> {
    match kind {
        PlannerKind::Rrt => planners::plan_rrt(s, rng),
        PlannerKind::RrtKbf => planners::plan_rrt_kbf(s, rng),
        PlannerKind::RobustRrtKbf => planners::plan_robust_rrt_kbf(s, bounds, rng),
        PlannerKind::RrtCbfQp => planners::plan_rrt_cbf_qp(s, rng),
    }
}

/// [`plan`] with `wall_time` filled in from a monotonic clock.
pub fn plan_timed<R: Rng + ?Sized>(
    kind: PlannerKind,
    s: &Scenario,
    bounds: &UncertaintyBounds,
    rng: &mut R,
) -> (Result<PlanResult, PlanError>, f64) {
    let t0 = Instant::now();
    let out = plan(kind, s, bounds, rng);
    let secs = t0.elapsed().as_secs_f64();
    (
        out.map(|mut p| {
            p.wall_time = secs;
            p
        }),
        secs,
    )
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerSpec {
    pub kind: PlannerKind,
    pub bounds: UncertaintyBounds,
}

impl PlannerSpec {
    pub fn nominal(kind: PlannerKind) -> Self {
        Self {
            kind,
            bounds: UncertaintyBounds::ZERO,
        }
    }

    pub fn robust(bounds: UncertaintyBounds) -> Self {
        Self {
            kind: PlannerKind::RobustRrtKbf,
            bounds,
        }
    }

    /// Report label; the robust planner carries its bounds, e.g.
    /// `robust-rrt-kbf[3,0.3]`.
    pub fn label(&self) -> String {
        match self.kind {
            PlannerKind::RobustRrtKbf => format!(
                "{}[{},{}]",
                self.kind, self.bounds.delta1_max, self.bounds.delta2_max
            ),
            k => k.name().to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub runs: usize,
    pub seed_base: u64,
    /// Worker threads; 0 means one per available core.
    pub jobs: usize,
    /// Untimed runs per (scenario, planner) before measuring.
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            seed_base: 0,
            jobs: 1,
            warmup: 1,
        }
    }
}

/// Outcome of one seeded planning call.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub planner: String,
    pub scenario: String,
    pub seed: u64,
    pub success: bool,
    pub iterations: usize,
    pub nodes: usize,
    pub wall_time: f64,
    pub path_length: Option<f64>,
    pub clearance: Option<f64>,
}

/// Aggregate over the runs of one (planner, scenario) pair. Statistics are
/// taken over successful runs only and are NaN when there are none.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub planner: String,
    pub scenario: String,
    pub runs: usize,
    pub successes: usize,
    pub mean_s: f64,
    pub median_s: f64,
    pub std_s: f64,
    pub mean_len_m: f64,
    pub mean_clearance_m: f64,
}

impl BenchRow {
    pub fn failures(&self) -> usize {
        self.runs - self.successes
    }
}

impl PartialEq for BenchRow {
    /// NaN statistics compare equal to NaN.
    fn eq(&self, o: &Self) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
        self.planner == o.planner
            && self.scenario == o.scenario
            && self.runs == o.runs
            && self.successes == o.successes
            && same(self.mean_s, o.mean_s)
            && same(self.median_s, o.median_s)
            && same(self.std_s, o.std_s)
            && same(self.mean_len_m, o.mean_len_m)
            && same(self.mean_clearance_m, o.mean_clearance_m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub seed_base: u64,
    pub runs: usize,
    /// Crate version, build profile and target, for telling reports apart.
    pub fingerprint: String,
    pub rows: Vec<BenchRow>,
    /// Every run, ordered by scenario, planner, then seed.
    pub records: Vec<RunRecord>,
}

impl BenchReport {
    pub fn row(&self, planner: &str, scenario: &str) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.planner == planner && r.scenario == scenario)
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), ArtifactError> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

pub const CSV_HEADER: &str =
    "planner,scenario,runs,successes,mean_s,median_s,std_s,mean_len_m,mean_clearance_m";

/// Parses rows written by [`BenchReport::write_csv`].
pub fn parse_bench_csv<R: io::Read>(r: R) -> Result<Vec<BenchRow>, ArtifactError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(ArtifactError::Report {
            row: 0,
            message: format!("unexpected header `{header}`"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: BenchRow = rec?;
        if row.successes > row.runs {
            return Err(ArtifactError::Report {
                row: i + 1,
                message: format!("{} successes out of {} runs", row.successes, row.runs),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} runs per cell, seeds {}..{}, {}",
            self.runs,
            self.seed_base,
            self.seed_base + self.runs as u64,
            self.fingerprint
        )?;
        writeln!(
            f,
            "{:<24} {:<12} {:>8} {:>12} {:>12} {:>12} {:>9} {:>10}",
            "planner", "scenario", "ok/runs", "mean (ms)", "median (ms)", "std (ms)", "len (m)", "clear (m)"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<24} {:<12} {:>8} {:>12.4} {:>12.4} {:>12.4} {:>9.3} {:>10.3}",
                r.planner,
                r.scenario,
                format!("{}/{}", r.successes, r.runs),
                r.mean_s * 1e3,
                r.median_s * 1e3,
                r.std_s * 1e3,
                r.mean_len_m,
                r.mean_clearance_m
            )?;
        }
        Ok(())
    }
}

pub fn fingerprint() -> String {
    let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
    format!(
        "kbf {} ({profile}, {}-{})",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

struct Job {
    case: usize,
    planner: usize,
    run: usize,
}

fn run_one(case: &BenchCase, spec: &PlannerSpec, seed: u64) -> RunRecord {
    let mut rng = seeded_rng(seed);
    let (out, secs) = plan_timed(spec.kind, &case.scenario, &spec.bounds, &mut rng);
    let mut rec = RunRecord {
        planner: spec.label(),
        scenario: case.name.clone(),
        seed,
        success: false,
        iterations: 0,
        nodes: 0,
        wall_time: secs,
        path_length: None,
        clearance: None,
    };
    match out {
        Ok(p) => {
            rec.success = true;
            rec.iterations = p.iterations_used;
            rec.nodes = p.nodes.len();
            rec.path_length = Some(p.path_length());
            rec.clearance = p.min_clearance(&case.scenario.obstacles, &case.scenario.robot);
        }
        Err(PlanError::NoPath { iterations }) => rec.iterations = iterations,
        Err(_) => {}
    }
    rec
}

/// Runs every planner on every case `cfg.runs` times. Planner failures are
/// recorded, never propagated.
pub fn run_bench(cases: &[BenchCase], planners: &[PlannerSpec], cfg: &BenchConfig) -> BenchReport {
    for case in cases {
        for spec in planners {
            for w in 0..cfg.warmup {
                let mut rng = seeded_rng(cfg.seed_base.wrapping_add(w as u64));
                let _ = plan(spec.kind, &case.scenario, &spec.bounds, &mut rng);
            }
        }
    }

    let mut jobs = Vec::with_capacity(cases.len() * planners.len() * cfg.runs);
    for case in 0..cases.len() {
        for run in 0..cfg.runs {
            for planner in 0..planners.len() {
                jobs.push(Job { case, planner, run });
            }
        }
    }
    let workers = match cfg.jobs {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(jobs.len().max(1));

    let slots: Vec<Mutex<Option<RunRecord>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(job) = jobs.get(i) else { break };
        let seed = cfg.seed_base + job.run as u64;
        let rec = run_one(&cases[job.case], &planners[job.planner], seed);
        *slots[i].lock().expect("slot lock") = Some(rec);
    };
    if workers <= 1 {
        work();
    } else {
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(work);
            }
        });
    }

    let mut by_job: Vec<(usize, usize, usize, RunRecord)> = jobs
        .iter()
        .zip(slots)
        .map(|(j, slot)| {
            let rec = slot.into_inner().expect("slot lock").expect("every job ran");
            (j.case, j.planner, j.run, rec)
        })
        .collect();
    by_job.sort_by_key(|&(c, p, r, _)| (c, p, r));

    let mut rows = Vec::new();
    for chunk in by_job.chunk_by(|a, b| a.0 == b.0 && a.1 == b.1) {
        let recs: Vec<&RunRecord> = chunk.iter().map(|x| &x.3).collect();
        rows.push(aggregate(&recs));
    }
    BenchReport {
        seed_base: cfg.seed_base,
        runs: cfg.runs,
        fingerprint: fingerprint(),
        rows,
        records: by_job.into_iter().map(|x| x.3).collect(),
    }
}

fn aggregate(recs: &[&RunRecord]) -> BenchRow {
    let ok: Vec<&&RunRecord> = recs.iter().filter(|r| r.success).collect();
    let mut times: Vec<f64> = ok.iter().map(|r| r.wall_time).collect();
    let lens: Vec<f64> = ok.iter().filter_map(|r| r.path_length).collect();
    let clears: Vec<f64> = ok.iter().filter_map(|r| r.clearance).collect();
    times.sort_by(f64::total_cmp);
    BenchRow {
        planner: recs[0].planner.clone(),
        scenario: recs[0].scenario.clone(),
        runs: recs.len(),
        successes: ok.len(),
        mean_s: mean(&times),
        median_s: median(&times),
        std_s: std_dev(&times),
        mean_len_m: mean(&lens),
        mean_clearance_m: mean(&clears),
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median of already sorted values.
fn median(sorted: &[f64]) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    }
}

/// Sample standard deviation; zero for a single value.
fn std_dev(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => f64::NAN,
        1 => 0.0,
        n => {
            let m = mean(xs);
            (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        }
    }
}
