use serde::Serialize;

use crate::dynamics::{disk_integrate, wall_overlap, DwellSegment, Termination};
use crate::error::DynamicsError;
use crate::field::VectorField;
use crate::maze::{convex_corner_vertices, estimate_channel_width_cells, MazeSpec};
use crate::oracle::ComparisonMetrics;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MazeSummary {
    pub nx: usize,
    pub ny: usize,
    pub cell_size_mm: f64,
    pub channel_width_cells: usize,
    pub channel_cells: usize,
    pub coated_cells: usize,
    pub convex_corners: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub final_residual: f64,
    pub tolerance: f64,
    pub converged: bool,
    /// Per unit sheet depth, A/m.
    pub current_in: f64,
    pub current_out: f64,
    pub current_imbalance: f64,
    pub max_abs_div_off_electrode: f64,
    pub mean_abs_j: f64,
}

/// Why a locked droplet stayed put.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LockDiagnostics {
    /// Drive on the droplet at its final position after wall contacts.
    pub residual_drive: f64,
    pub static_threshold: f64,
    /// Residual drive over static threshold.
    pub drive_ratio: f64,
    /// Outcome of the same run with half the static threshold.
    pub half_threshold_termination: Termination,
    /// True when halving the static threshold changes the outcome.
    pub parameter_sensitive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectorySummary {
    pub termination: Termination,
    pub steps: usize,
    pub duration: f64,
    pub path_length_mm: f64,
    pub radius_mm: f64,
    pub dt: f64,
    pub static_threshold: f64,
    pub start_cell: (usize, usize),
    pub final_position_mm: (f64, f64),
    pub peak_speed: f64,
    pub dwell_segments: Vec<DwellSegment>,
    /// Dwell segments whose mean position lies within two channel widths of
    /// a convex wall corner.
    pub corner_dwells: usize,
    pub lock: Option<LockDiagnostics>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSummary {
    pub source_cell: (usize, usize),
    pub path_cells: usize,
    pub path_length_mm: f64,
    pub streamline_end: crate::oracle::StreamlineEnd,
    pub streamline_length_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerForce {
    pub vertex_mm: (f64, f64),
    pub max_force: f64,
}

/// Largest disk-integrated grad |J| force near convex wall corners.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CornerForceStats {
    pub field: &'static str,
    pub radius_mm: f64,
    pub max_force: f64,
    pub max_at_mm: Option<(f64, f64)>,
    pub corners: Vec<CornerForce>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; the only field that changes between
    /// identical runs.
    pub timestamp_unix: u64,
    pub config: std::collections::BTreeMap<String, String>,
    pub maze: MazeSummary,
    pub solve: SolveSummary,
    pub corner_force: CornerForceStats,
    pub trajectory: Option<TrajectorySummary>,
    pub oracle: Option<OracleSummary>,
    pub comparison: Option<ComparisonMetrics>,
    pub exit_code: i32,
}

/// Corner-force statistic: disks of radius `r` are centred on channel cells
/// where they fit without touching a wall, within one channel width of a
/// convex corner vertex and more than one channel width from every electrode
/// cell. For each corner the largest |force| over its centres is kept.
pub fn corner_force_stats(
    maze: &MazeSpec,
    grad_speed: &VectorField,
    r: f64,
) -> Result<CornerForceStats, DynamicsError> {
    let h = maze.cell_size_mm();
    let w = estimate_channel_width_cells(maze) as f64 * h;
    let vertices: Vec<(f64, f64)> = convex_corner_vertices(maze)
        .into_iter()
        .map(|(vx, vy)| (vx as f64 * h, vy as f64 * h))
        .collect();
    let electrode: Vec<(f64, f64)> = maze
        .electrodes()
        .iter()
        .flat_map(|e| e.cells.iter().map(|&(x, y)| maze.cell_center_mm(x, y)))
        .collect();
    let near = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1) <= w;

    let mut per_corner = vec![None::<f64>; vertices.len()];
    let mut best: Option<(f64, (f64, f64))> = None;
    for y in 0..maze.ny() {
        for x in 0..maze.nx() {
            if !maze.is_channel(x, y) {
                continue;
            }
            let c = maze.cell_center_mm(x, y);
            let corners: Vec<usize> = (0..vertices.len())
                .filter(|&k| near(c, vertices[k]))
                .collect();
            if corners.is_empty()
                || wall_overlap(maze, c, r) > 0.0
                || electrode.iter().any(|&e| near(c, e))
            {
                continue;
            }
            let f = disk_integrate(grad_speed, maze, c, r, 1.0)?;
            let m = f.0.hypot(f.1);
            for k in corners {
                per_corner[k] = Some(per_corner[k].map_or(m, |v: f64| v.max(m)));
            }
            if best.is_none_or(|(b, _)| m > b) {
                best = Some((m, c));
            }
        }
    }
    let corners = vertices
        .iter()
        .zip(per_corner)
        .filter_map(|(&v, m)| {
            m.map(|max_force| CornerForce {
                vertex_mm: v,
                max_force,
            })
        })
        .collect();
    Ok(CornerForceStats {
        field: "grad|J|",
        radius_mm: r,
        max_force: best.map_or(0.0, |b| b.0),
        max_at_mm: best.map(|b| b.1),
        corners,
    })
}
