use std::path::PathBuf;

use kbf::scenario::scenario_from_str;
use kbf::{load_scenario, parse_scenario, scenario_to_json, ScenarioError};
use kbf_core::validate_scenario;

fn shipped() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    (1..=4).map(|k| dir.join(format!("scenario{k}.json"))).collect()
}

#[test]
fn shipped_scenarios_load_and_validate() {
    for p in shipped() {
        let s = load_scenario(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert!(!s.obstacles.is_empty());
        assert!(validate_scenario(s).is_ok());
    }
}

#[test]
fn scenarios_round_trip_bit_identically() {
    for p in shipped() {
        let s = load_scenario(&p).unwrap();
        let json = scenario_to_json(&s);
        let back = parse_scenario(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(scenario_to_json(&back), json);
    }
}

#[test]
fn awkward_floats_survive_a_round_trip() {
    let mut s = load_scenario(&shipped()[0]).unwrap();
    s.obstacles[0].x = 0.1 + 0.2;
    s.obstacles[0].r = 1.0 / 3.0;
    s.robot.v_max = f64::MIN_POSITIVE * 3.0 + 1.7;
    let back = parse_scenario(&scenario_to_json(&s)).unwrap();
    assert_eq!(back.obstacles[0].x.to_bits(), s.obstacles[0].x.to_bits());
    assert_eq!(back.obstacles[0].r.to_bits(), s.obstacles[0].r.to_bits());
    assert_eq!(back.robot.v_max.to_bits(), s.robot.v_max.to_bits());
}

#[test]
fn missing_file_is_an_io_error() {
    let e = load_scenario("/nonexistent/dir/s.json").unwrap_err();
    assert!(matches!(e, ScenarioError::Io { .. }));
    assert!(e.to_string().contains("/nonexistent/dir/s.json"));
}

#[test]
fn malformed_json_reports_a_position() {
    let e = scenario_from_str("{\n  \"start\": ,\n}").unwrap_err();
    let ScenarioError::Parse(p) = e else { panic!("{e:?}") };
    assert_eq!(p.line, 2);
}

#[test]
fn start_inside_an_obstacle_is_invalid() {
    let mut s = load_scenario(&shipped()[0]).unwrap();
    s.obstacles[0].x = s.start.x;
    s.obstacles[0].y = s.start.y;
    let e = scenario_from_str(&scenario_to_json(&s)).unwrap_err();
    assert!(matches!(e, ScenarioError::Invalid(_)), "{e:?}");
}
