//! CSV and SVG output for plans and closed-loop trajectories.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! value re-parses to the identical `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use kbf_core::sim::Trajectory;
use kbf_core::{combined_radius, PlanResult, Scenario};

use crate::error::ArtifactError;

pub const TRAJECTORY_HEADER: [&str; 10] = ["t", "x", "y", "theta", "v", "c", "a", "minB", "V", "d"];
pub const PLAN_HEADER: [&str; 7] = ["t", "x", "y", "theta", "v", "c", "a"];

/// One row per controller tick: time, state, applied input, smallest true
/// barrier value (`inf` without obstacles), Lyapunov value and relaxation.
pub fn write_trajectory_csv<W: io::Write>(traj: &Trajectory, w: W) -> Result<(), ArtifactError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        let z = &s.state;
        let vals = [
            s.t,
            z.x,
            z.y,
            z.theta,
            z.v,
            s.control.c,
            s.control.a,
            s.min_barrier(),
            s.lyapunov,
            s.relaxation,
        ];
        out.write_record(vals.iter().map(f64::to_string))?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Waypoints with the control held from each one to the next; the control
/// columns are empty where the planner records none.
pub fn write_plan_csv<W: io::Write>(plan: &PlanResult, w: W) -> Result<(), ArtifactError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PLAN_HEADER)?;
    for wp in &plan.waypoints {
        let z = &wp.state;
        let mut rec: Vec<String> = [wp.t, z.x, z.y, z.theta, z.v].iter().map(f64::to_string).collect();
        match wp.control {
            Some(u) => rec.extend([u.c.to_string(), u.a.to_string()]),
            None => rec.extend([String::new(), String::new()]),
        }
        out.write_record(&rec)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Parses a trajectory CSV back into rows of the ten header columns.
pub fn read_trajectory_csv<R: io::Read>(r: R) -> Result<Vec<[f64; 10]>, ArtifactError> {
    let mut rdr = csv::Reader::from_reader(r);
    if rdr.headers()?.iter().ne(TRAJECTORY_HEADER) {
        return Err(ArtifactError::Report {
            row: 0,
            message: "unexpected trajectory header".into(),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 10];
        for (k, field) in rec.iter().enumerate().take(10) {
            row[k] = field.parse().map_err(|e| ArtifactError::Report {
                row: i + 1,
                message: format!("column {}: {e}", TRAJECTORY_HEADER[k]),
            })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<(), ArtifactError> {
    fs::write(path, contents).map_err(|source| ArtifactError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// What to draw on top of the workspace.
#[derive(Debug, Clone, Copy, Default)]
pub struct SvgLayers<'a> {
    pub plan: Option<&'a PlanResult>,
    pub trajectory: Option<&'a Trajectory>,
    /// Obstacles as the planner perceived them, drawn dotted.
    pub perceived: Option<&'a Scenario>,
}

const PX_PER_M: f64 = 100.0;
const PAD: f64 = 20.0;

/// Workspace plot. Each obstacle is exactly two `<circle>` elements, its
/// radius (solid) and its safety radius (dashed); markers use other shapes
/// so circle counts stay meaningful.
pub fn render_svg(s: &Scenario, layers: &SvgLayers<'_>) -> String {
    let b = &s.bounds;
    let w = b.width() * PX_PER_M + 2.0 * PAD;
    let h = b.height() * PX_PER_M + 2.0 * PAD;
    let px = |x: f64| PAD + (x - b.xmin) * PX_PER_M;
    let py = |y: f64| PAD + (b.ymax - y) * PX_PER_M;
    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(
        o,
        r#"<rect class="bounds" x="{PAD}" y="{PAD}" width="{:.2}" height="{:.2}" fill="white" stroke="black"/>"#,
        b.width() * PX_PER_M,
        b.height() * PX_PER_M
    );

    o.push_str("<g class=\"obstacles\">\n");
    for ob in &s.obstacles {
        let (cx, cy) = (px(ob.x), py(ob.y));
        let _ = writeln!(
            o,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="#888" stroke="black"/>"##,
            ob.r * PX_PER_M
        );
        let _ = writeln!(
            o,
            r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#c00" stroke-dasharray="6 4"/>"##,
            combined_radius(ob, &s.robot) * PX_PER_M
        );
    }
    o.push_str("</g>\n");

    if let Some(p) = layers.perceived {
        o.push_str("<g class=\"perceived\">\n");
        for ob in &p.obstacles {
            let _ = writeln!(
                o,
                r##"<ellipse cx="{:.2}" cy="{:.2}" rx="{r:.2}" ry="{r:.2}" fill="none" stroke="#06c" stroke-dasharray="2 3"/>"##,
                px(ob.x),
                py(ob.y),
                r = ob.r * PX_PER_M
            );
        }
        o.push_str("</g>\n");
    }

    if let Some(plan) = layers.plan {
        o.push_str("<g class=\"tree\" stroke=\"#999\" stroke-width=\"0.5\" stroke-opacity=\"0.4\">\n");
        for &(a, c) in &plan.tree_edges {
            let (Some(p), Some(q)) = (plan.nodes.get(a), plan.nodes.get(c)) else {
                continue;
            };
            let _ = writeln!(
                o,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
                px(p.x),
                py(p.y),
                px(q.x),
                py(q.y)
            );
        }
        o.push_str("</g>\n");
        let pts = polyline(plan.waypoints.iter().map(|w| (px(w.state.x), py(w.state.y))));
        let _ = writeln!(
            o,
            r##"<polyline class="path" points="{pts}" fill="none" stroke="#06c" stroke-width="3"/>"##
        );
    }

    if let Some(traj) = layers.trajectory {
        let pts = polyline(traj.samples.iter().map(|t| (px(t.state.x), py(t.state.y))));
        let _ = writeln!(
            o,
            r##"<polyline class="trajectory" points="{pts}" fill="none" stroke="#090" stroke-width="2"/>"##
        );
    }

    let (sx, sy) = (px(s.start.x), py(s.start.y));
    let _ = writeln!(
        o,
        r##"<rect class="start" x="{:.2}" y="{:.2}" width="12" height="12" fill="#090"/>"##,
        sx - 6.0,
        sy - 6.0
    );
    let (gx, gy) = (px(s.goal.x), py(s.goal.y));
    let _ = writeln!(
        o,
        r##"<polygon class="goal" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#c90"/>"##,
        gx,
        gy - 8.0,
        gx + 8.0,
        gy,
        gx,
        gy + 8.0,
        gx - 8.0,
        gy
    );
    o.push_str("</svg>\n");
    o
}

fn polyline(pts: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (i, (x, y)) in pts.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

pub fn emit_svg(s: &Scenario, layers: &SvgLayers<'_>, path: &Path) -> Result<(), ArtifactError> {
    write_file(path, render_svg(s, layers).as_bytes())
}
