use std::path::PathBuf;

use kbf::bench::RunRecord;
use kbf::{load_scenario, run_bench, BenchCase, BenchConfig, PlannerSpec};
use kbf_core::planners::PlannerKind;
use kbf_core::UncertaintyBounds;

fn cases() -> Vec<BenchCase> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    ["scenario1", "scenario4"]
        .into_iter()
        .map(|name| BenchCase {
            name: name.into(),
            scenario: load_scenario(dir.join(format!("{name}.json"))).unwrap(),
        })
        .collect()
}

fn without_time(r: &RunRecord) -> RunRecord {
    RunRecord { wall_time: 0.0, ..r.clone() }
}

#[test]
fn reports_are_reproducible_apart_from_timing() {
    let planners = [
        PlannerSpec::nominal(PlannerKind::Rrt),
        PlannerSpec::nominal(PlannerKind::RrtKbf),
        PlannerSpec::robust(UncertaintyBounds::new(3.0, 0.3)),
    ];
    let serial = BenchConfig {
        runs: 8,
        seed_base: 40,
        jobs: 1,
        warmup: 0,
    };
    let a = run_bench(&cases(), &planners, &serial);
    let b = run_bench(&cases(), &planners, &BenchConfig { jobs: 4, ..serial });
    assert_eq!(a.records.len(), 2 * 3 * 8);
    let strip = |r: &[RunRecord]| r.iter().map(without_time).collect::<Vec<_>>();
    assert_eq!(strip(&a.records), strip(&b.records));
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!((&x.planner, &x.scenario, x.successes), (&y.planner, &y.scenario, y.successes));
        assert_eq!(x.mean_len_m.to_bits(), y.mean_len_m.to_bits());
    }
}

#[test]
fn rows_cover_every_pair_and_seed() {
    let planners = [PlannerSpec::nominal(PlannerKind::Rrt)];
    let cfg = BenchConfig {
        runs: 3,
        seed_base: 9,
        jobs: 1,
        warmup: 1,
    };
    let r = run_bench(&cases(), &planners, &cfg);
    assert_eq!(r.rows.len(), 2);
    let seeds: Vec<u64> = r.records.iter().map(|x| x.seed).collect();
    assert_eq!(seeds, [9, 10, 11, 9, 10, 11]);
    assert!(r.rows.iter().all(|row| row.runs == 3 && row.successes == 3 && row.mean_s > 0.0));
}

#[test]
fn failed_runs_leave_statistics_undefined() {
    let mut c = cases();
    c.truncate(1);
    c[0].scenario.planner.max_iters = 1;
    let planners = [PlannerSpec::nominal(PlannerKind::RrtKbf)];
    let r = run_bench(&c, &planners, &BenchConfig { runs: 4, ..BenchConfig::default() });
    let row = &r.rows[0];
    assert_eq!(row.failures(), 4);
    assert!(row.mean_s.is_nan() && row.mean_len_m.is_nan());
}
