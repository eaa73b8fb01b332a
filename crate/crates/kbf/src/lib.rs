//! Scenario files, perception-error injection, seeded benchmarks and
//! CSV/SVG artifacts around the `kbf-core` planners. The `kbf` binary wraps
//! all of it.

pub mod artifact;
pub mod bench;
pub mod error;
pub mod perception;
pub mod scenario;

pub use artifact::{emit_svg, render_svg, write_plan_csv, write_trajectory_csv, SvgLayers};
pub use bench::{run_bench, BenchCase, BenchConfig, BenchReport, BenchRow, PlannerSpec};
pub use error::{ArtifactError, ParseError, ScenarioError};
pub use perception::{inject_perception_error, PerceivedScenario};
pub use scenario::{load_scenario, parse_scenario, scenario_to_json};
