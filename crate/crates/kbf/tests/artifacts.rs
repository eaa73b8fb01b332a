use std::path::PathBuf;

use kbf::artifact::{read_trajectory_csv, TRAJECTORY_HEADER};
use kbf::bench::{self, parse_bench_csv};
use kbf::{
    load_scenario, render_svg, run_bench, write_plan_csv, write_trajectory_csv, BenchCase, BenchConfig,
    PlannerSpec, SvgLayers,
};
use kbf_core::planners::{plan_rrt_kbf, PlannerKind};
use kbf_core::sim::{follow_path, FollowConfig};
use kbf_core::Scenario;

fn scenario(k: usize) -> Scenario {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("scenarios/scenario{k}.json"));
    load_scenario(p).unwrap()
}

fn circles(svg: &str) -> usize {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants().filter(|n| n.has_tag_name("circle")).count()
}

#[test]
fn svg_has_two_circles_per_obstacle() {
    let mut s = scenario(1);
    s.obstacles.truncate(4);
    assert_eq!(circles(&render_svg(&s, &SvgLayers::default())), 8);
    s.obstacles.clear();
    assert_eq!(circles(&render_svg(&s, &SvgLayers::default())), 0);
}

#[test]
fn svg_with_plans_and_trajectories_stays_well_formed() {
    let s = scenario(1);
    for seed in 0..20 {
        let Ok(p) = plan_rrt_kbf(&s, &mut bench::seeded_rng(seed)) else { continue };
        let t = match follow_path(&p, &s, &s.obstacles, &FollowConfig::default()) {
            Ok(t) => t,
            Err(e) => e.partial,
        };
        let layers = SvgLayers {
            plan: Some(&p),
            trajectory: Some(&t),
            perceived: Some(&s),
        };
        assert_eq!(circles(&render_svg(&s, &layers)), 2 * s.obstacles.len());
    }
}

#[test]
fn trajectory_csv_round_trips() {
    let s = scenario(3);
    let p = (0..).find_map(|seed| plan_rrt_kbf(&s, &mut bench::seeded_rng(seed)).ok()).unwrap();
    let t = match follow_path(&p, &s, &s.obstacles, &FollowConfig::default()) {
        Ok(t) => t,
        Err(e) => e.partial,
    };
    let mut buf = Vec::new();
    write_trajectory_csv(&t, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER.join(","));
    let rows = read_trajectory_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), t.len());
    for (r, k) in rows.iter().zip(&t.samples) {
        let expect = [
            k.t,
            k.state.x,
            k.state.y,
            k.state.theta,
            k.state.v,
            k.control.c,
            k.control.a,
            k.min_barrier(),
            k.lyapunov,
            k.relaxation,
        ];
        for (a, b) in r.iter().zip(expect) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn plan_csv_has_one_row_per_waypoint() {
    let s = scenario(2);
    let p = (0..).find_map(|seed| plan_rrt_kbf(&s, &mut bench::seeded_rng(seed)).ok()).unwrap();
    let mut buf = Vec::new();
    write_plan_csv(&p, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), p.waypoints.len() + 1);
}

#[test]
fn bench_csv_round_trips() {
    let cases = [BenchCase {
        name: "scenario1".into(),
        scenario: scenario(1),
    }];
    let planners = [PlannerSpec::nominal(PlannerKind::Rrt), PlannerSpec::nominal(PlannerKind::RrtKbf)];
    let cfg = BenchConfig {
        runs: 5,
        ..BenchConfig::default()
    };
    let report = run_bench(&cases, &planners, &cfg);
    let rows = parse_bench_csv(report.to_csv().as_bytes()).unwrap();
    assert_eq!(rows, report.rows);
}
