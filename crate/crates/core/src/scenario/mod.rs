//! Reproducible scenarios: a flat `key = value` config names a maze source
//! and the solver and droplet settings; a run solves the fields, simulates
//! the droplet, computes the oracle path and writes a bundle of files.
//!
//! ```text
//! # insulated vs coated corners on the same ring maze
//! generator = ring
//! seed = 7
//! coated_corners = true
//! artifacts = report,heatmap
//! ```
//!
//! Bundle files: `report.json`, `comparison.json`, `potential.csv`,
//! `current.csv`, `potential.pgm`, `joule.pgm`, `trajectory.csv` and
//! `path.csv`. Column layouts are listed in [`crate::io`].

mod config;
mod report;

pub use config::{load_config, parse_config, Artifact, MazeSource, ScenarioConfig};
pub use report::{
    corner_force_stats, CornerForce, CornerForceStats, LockDiagnostics, MazeSummary, OracleSummary,
    ScenarioReport, SolveSummary, TrajectorySummary,
};

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::dynamics::{
    disk_integrate, driving_field, effective_drive, simulate, start_cell, velocity_profile,
    DynamicsParams, Termination, Trajectory,
};
use crate::error::{DynamicsError, FieldError, HarnessError};
use crate::field::{conservation, solve_fields, FieldSet, SolverSettings};
use crate::io::{
    render_field, write_path_csv, write_scalar_csv, write_trajectory_csv, write_vector_csv,
    FieldRef, Normalization, Overlay, RenderOptions, RenderStyle,
};
use crate::maze::{
    convex_corner_vertices, estimate_channel_width_cells, generate_bifurcation_maze,
    generate_ring_maze, generate_straight_channel, parse_maze, validate_and_components, CellKind,
    MazeSpec, Polarity,
};
use crate::oracle::{compare_trajectory, extract_path, lee_label, streamline, Path, Streamline};

pub const TOOL: &str = "dropmaze";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How far a run goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Fields only.
    Solve,
    /// Fields, Lee path and streamline.
    Oracle,
    /// Everything, droplet included.
    Simulate,
}

pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub maze: MazeSpec,
    pub fields: FieldSet,
    pub trajectory: Option<Trajectory>,
    pub path: Option<Path>,
    pub streamline: Option<Streamline>,
    pub report: ScenarioReport,
}

/// Process exit status for a finished run.
pub fn termination_exit_code(t: Termination) -> i32 {
    match t {
        Termination::ReachedTarget => 0,
        Termination::Locked => 2,
        Termination::MaxSteps => 3,
    }
}

/// Process exit status for a failed run: 4 bad config or input file,
/// 5 unsolvable maze, 6 solver did not converge, 1 anything else.
pub fn error_exit_code(e: &HarnessError) -> i32 {
    match e {
        HarnessError::Config { .. }
        | HarnessError::Maze(_)
        | HarnessError::Csv { .. }
        | HarnessError::Format { .. }
        | HarnessError::Dynamics(DynamicsError::Parameter(_)) => 4,
        HarnessError::Unsolvable | HarnessError::Field(FieldError::Disconnected) => 5,
        HarnessError::NotConverged { .. } => 6,
        _ => 1,
    }
}

/// Build the maze a config describes, corner coating applied.
pub fn build_maze(cfg: &ScenarioConfig) -> Result<MazeSpec, HarnessError> {
    let maze = match &cfg.maze {
        MazeSource::File(p) => {
            let text = fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?;
            parse_maze(&text)?
        }
        MazeSource::Ring(r) => generate_ring_maze(r)?,
        MazeSource::Bifurcation(b) => generate_bifurcation_maze(b)?,
        MazeSource::Straight {
            length_mm,
            channel_width_mm,
            physics,
        } => generate_straight_channel(*length_mm, *channel_width_mm, *physics)?,
    };
    Ok(if cfg.coated_corners {
        maze.with_coated_corners()?
    } else {
        maze
    })
}

fn solver_settings(cfg: &ScenarioConfig, maze: &MazeSpec) -> SolverSettings {
    let mut s = SolverSettings::for_maze(maze);
    if let Some(t) = cfg.solver_tol {
        s.tol = t;
    }
    if let Some(n) = cfg.solver_max_iter {
        s.max_iter = n;
    }
    s
}

/// Solve the potential and derived fields, failing on unsolvable mazes and
/// unconverged solves.
pub fn solve_scenario(cfg: &ScenarioConfig, maze: &MazeSpec) -> Result<FieldSet, HarnessError> {
    if !validate_and_components(maze).solvable {
        return Err(HarnessError::Unsolvable);
    }
    let fields = solve_fields(maze, &solver_settings(cfg, maze)).map_err(|e| match e {
        FieldError::Disconnected => HarnessError::Unsolvable,
        e => e.into(),
    })?;
    if !fields.report.converged {
        return Err(HarnessError::NotConverged {
            iterations: fields.report.iterations,
            residual: fields.report.final_residual,
        });
    }
    Ok(fields)
}

fn maze_summary(maze: &MazeSpec) -> MazeSummary {
    let count = |k: CellKind| maze.cells().iter().filter(|&&c| c == k).count();
    MazeSummary {
        nx: maze.nx(),
        ny: maze.ny(),
        cell_size_mm: maze.cell_size_mm(),
        channel_width_cells: estimate_channel_width_cells(maze),
        channel_cells: count(CellKind::Channel),
        coated_cells: count(CellKind::CoatedWall),
        convex_corners: convex_corner_vertices(maze).len(),
    }
}

fn solve_summary(fields: &FieldSet) -> Result<SolveSummary, HarnessError> {
    let c = conservation(&fields.current, &fields.electrodes)?;
    let r = &fields.report;
    Ok(SolveSummary {
        iterations: r.iterations,
        final_residual: r.final_residual,
        tolerance: r.tolerance,
        converged: r.converged,
        current_in: c.current_in,
        current_out: c.current_out,
        current_imbalance: c.imbalance(),
        max_abs_div_off_electrode: c.max_abs_div_off_electrode,
        mean_abs_j: c.mean_abs_j,
    })
}

fn trajectory_summary(
    cfg: &ScenarioConfig,
    maze: &MazeSpec,
    fields: &FieldSet,
    traj: &Trajectory,
) -> Result<TrajectorySummary, HarnessError> {
    let profile = velocity_profile(traj);
    let h = maze.cell_size_mm();
    let w = estimate_channel_width_cells(maze) as f64 * h;
    let corners: Vec<(f64, f64)> = convex_corner_vertices(maze)
        .into_iter()
        .map(|(x, y)| (x as f64 * h, y as f64 * h))
        .collect();
    let corner_dwells = profile
        .dwell_segments
        .iter()
        .filter(|d| {
            corners
                .iter()
                .any(|c| (c.0 - d.x).hypot(c.1 - d.y) <= 2.0 * w)
        })
        .count();
    let last = traj.samples.last().expect("trajectory has a start sample");
    let lock = if traj.termination == Termination::Locked {
        let field = driving_field(fields, cfg.dynamics.force_source);
        let p = (last.x, last.y);
        let f = disk_integrate(field, maze, p, traj.radius_mm, cfg.dynamics.force_gain)?;
        let e = effective_drive(maze, p, traj.radius_mm, f);
        let residual = e.0.hypot(e.1);
        let threshold = traj.static_threshold;
        let half = DynamicsParams {
            static_threshold: Some(0.5 * threshold),
            dt: Some(traj.dt),
            ..cfg.dynamics.clone()
        };
        let other = simulate(maze, fields, &half)?.termination;
        Some(LockDiagnostics {
            residual_drive: residual,
            static_threshold: threshold,
            drive_ratio: if threshold > 0.0 {
                residual / threshold
            } else {
                0.0
            },
            half_threshold_termination: other,
            parameter_sensitive: other != Termination::Locked,
        })
    } else {
        None
    };
    Ok(TrajectorySummary {
        termination: traj.termination,
        steps: traj.samples.len() - 1,
        duration: last.t,
        path_length_mm: traj.path_length_mm,
        radius_mm: traj.radius_mm,
        dt: traj.dt,
        static_threshold: traj.static_threshold,
        start_cell: traj.start_cell,
        final_position_mm: (last.x, last.y),
        peak_speed: profile.peak_speed,
        corner_dwells,
        dwell_segments: profile.dwell_segments,
        lock,
    })
}

fn now_unix() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

/// Run a scenario up to `stage`. Nothing is written; see [`export_bundle`].
pub fn run_scenario(cfg: &ScenarioConfig, stage: Stage) -> Result<ScenarioRun, HarnessError> {
    let maze = build_maze(cfg)?;
    let fields = solve_scenario(cfg, &maze)?;
    let r = cfg.dynamics.radius_for(&maze);
    let corner_force = corner_force_stats(&maze, &fields.grad_speed, r)?;

    let trajectory = match stage {
        Stage::Simulate => Some(simulate(&maze, &fields, &cfg.dynamics)?),
        _ => None,
    };
    let (path, stream) = match stage {
        Stage::Solve => (None, None),
        _ => {
            let source = match &trajectory {
                Some(t) => t.start_cell,
                None => start_cell(&maze, r)?,
            };
            let labels = lee_label(&maze, &maze.electrode_cells(Polarity::Negative))?;
            let path = extract_path(&labels, source, maze.cell_size_mm())?;
            let h = maze.cell_size_mm();
            let s = streamline(
                &fields.current,
                &maze,
                maze.cell_center_mm(source.0, source.1),
                0.2 * h,
                10 * maze.nx() * maze.ny(),
            )?;
            (Some(path), Some(s))
        }
    };
    let comparison = match (&trajectory, &path) {
        (Some(t), Some(p)) => Some(compare_trajectory(t, p, &maze)),
        _ => None,
    };
    let oracle = match (&path, &stream) {
        (Some(p), Some(s)) => Some(OracleSummary {
            source_cell: p.cells[0],
            path_cells: p.cells.len(),
            path_length_mm: p.length_mm(),
            streamline_end: s.end,
            streamline_length_mm: s.length_mm(),
        }),
        _ => None,
    };
    let summary = trajectory
        .as_ref()
        .map(|t| trajectory_summary(cfg, &maze, &fields, t))
        .transpose()?;
    let exit_code = trajectory
        .as_ref()
        .map_or(0, |t| termination_exit_code(t.termination));
    let report = ScenarioReport {
        tool: TOOL,
        version: VERSION,
        timestamp_unix: now_unix(),
        config: cfg.echo(),
        maze: maze_summary(&maze),
        solve: solve_summary(&fields)?,
        corner_force,
        trajectory: summary,
        oracle,
        comparison,
        exit_code,
    };
    Ok(ScenarioRun {
        config: cfg.clone(),
        maze,
        fields,
        trajectory,
        path,
        streamline: stream,
        report,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

fn write_file(
    dir: &FsPath,
    name: &str,
    bytes: &[u8],
    written: &mut Vec<PathBuf>,
) -> Result<(), HarnessError> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| HarnessError::io(&p, e))?;
    written.push(p);
    Ok(())
}

fn csv_bytes(
    f: impl FnOnce(&mut Vec<u8>) -> Result<(), HarnessError>,
) -> Result<Vec<u8>, HarnessError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

/// Write the requested artifacts of a run into `dir`, creating it if
/// needed. Artifacts whose data the run did not produce are skipped.
/// Returns the written paths.
pub fn export_bundle(run: &ScenarioRun, dir: &FsPath) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let want = |a: Artifact| run.config.artifacts.contains(&a);
    let mut written = Vec::new();
    let f = &run.fields;
    if want(Artifact::Report) {
        write_file(
            dir,
            "report.json",
            to_json(&run.report).as_bytes(),
            &mut written,
        )?;
    }
    if want(Artifact::Fields) {
        write_file(
            dir,
            "potential.csv",
            &csv_bytes(|b| write_scalar_csv(&f.potential, b))?,
            &mut written,
        )?;
        write_file(
            dir,
            "current.csv",
            &csv_bytes(|b| write_vector_csv(&f.current, b))?,
            &mut written,
        )?;
    }
    if want(Artifact::Heatmap) {
        let maze = Overlay {
            maze: Some(&run.maze),
            ..Overlay::default()
        };
        let gray = RenderOptions::new(RenderStyle::Overlay);
        let img = render_field(FieldRef::Scalar(&f.potential), &gray, &maze)?;
        write_file(dir, "potential.pgm", &img.to_pgm(), &mut written)?;
        let log = RenderOptions {
            normalization: Normalization::Log { decades: 3.0 },
            ..gray
        };
        let img = render_field(FieldRef::Scalar(&f.joule), &log, &maze)?;
        write_file(dir, "joule.pgm", &img.to_pgm(), &mut written)?;
    }
    if let (true, Some(t)) = (want(Artifact::Trajectory), &run.trajectory) {
        write_file(
            dir,
            "trajectory.csv",
            &csv_bytes(|b| write_trajectory_csv(t, b))?,
            &mut written,
        )?;
    }
    if let (true, Some(p)) = (want(Artifact::Oracle), &run.path) {
        write_file(
            dir,
            "path.csv",
            &csv_bytes(|b| write_path_csv(p, b))?,
            &mut written,
        )?;
    }
    if let (true, Some(c)) = (want(Artifact::Comparison), &run.report.comparison) {
        write_file(dir, "comparison.json", to_json(c).as_bytes(), &mut written)?;
    }
    Ok(written)
}

/// Edge-study diff between two report bundles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BundleDiff {
    pub corner_force_a: f64,
    pub corner_force_b: f64,
    /// b over a.
    pub corner_force_ratio: f64,
    pub b_lower: bool,
    pub termination_a: Option<String>,
    pub termination_b: Option<String>,
    /// Config keys whose values differ, with the a and b values.
    pub config_changes: BTreeMap<String, (Option<String>, Option<String>)>,
}

/// Compare two `report.json` texts.
pub fn diff_reports(a: &str, b: &str) -> Result<BundleDiff, HarnessError> {
    let parse = |text: &str, which: &str| -> Result<Value, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Format {
            path: which.into(),
            message: e.to_string(),
        })
    };
    let (a, b) = (parse(a, "a/report.json")?, parse(b, "b/report.json")?);
    let force = |v: &Value, which: &str| {
        v.pointer("/corner_force/max_force")
            .and_then(Value::as_f64)
            .ok_or_else(|| HarnessError::Format {
                path: which.into(),
                message: "missing corner_force.max_force".into(),
            })
    };
    let term = |v: &Value| {
        v.pointer("/trajectory/termination")
            .and_then(Value::as_str)
            .map(String::from)
    };
    let config = |v: &Value| -> BTreeMap<String, String> {
        v.get("config")
            .and_then(Value::as_object)
            .map(|o| {
                o.iter()
                    .filter_map(|(k, v)| Some((k.clone(), v.as_str()?.to_string())))
                    .collect()
            })
            .unwrap_or_default()
    };
    let (fa, fb) = (force(&a, "a/report.json")?, force(&b, "b/report.json")?);
    let (ca, cb) = (config(&a), config(&b));
    let mut config_changes = BTreeMap::new();
    for k in ca.keys().chain(cb.keys()) {
        let (va, vb) = (ca.get(k).cloned(), cb.get(k).cloned());
        if va != vb {
            config_changes.insert(k.clone(), (va, vb));
        }
    }
    Ok(BundleDiff {
        corner_force_a: fa,
        corner_force_b: fb,
        corner_force_ratio: if fa > 0.0 { fb / fa } else { f64::NAN },
        b_lower: fb < fa,
        termination_a: term(&a),
        termination_b: term(&b),
        config_changes,
    })
}

/// Compare the reports in two bundle directories.
pub fn compare_bundles(a: &FsPath, b: &FsPath) -> Result<BundleDiff, HarnessError> {
    let read = |d: &FsPath| {
        let p = d.join("report.json");
        fs::read_to_string(&p).map_err(|e| HarnessError::io(&p, e))
    };
    diff_reports(&read(a)?, &read(b)?).map_err(|e| match e {
        HarnessError::Format { path, message } => {
            let dir = if path.starts_with("a") { a } else { b };
            HarnessError::Format {
                path: dir.join("report.json"),
                message,
            }
        }
        e => e,
    })
}

/// Serialize a diff as JSON text.
pub fn diff_json(d: &BundleDiff) -> String {
    to_json(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight() -> ScenarioConfig {
        parse_config("generator = straight\nlength_mm = 20\nchannel_width_mm = 2\n").unwrap()
    }

    #[test]
    fn straight_channel_reaches_target() {
        let run = run_scenario(&straight(), Stage::Simulate).unwrap();
        assert_eq!(run.report.exit_code, 0);
        let c = run.report.comparison.as_ref().unwrap();
        assert!((c.length_ratio - 1.0).abs() < 0.05, "{}", c.length_ratio);
        assert!(c.corridor_sequence_equal);
    }

    #[test]
    fn solve_stage_has_no_trajectory() {
        let run = run_scenario(&straight(), Stage::Solve).unwrap();
        assert!(run.trajectory.is_none() && run.path.is_none() && run.report.comparison.is_none());
        assert_eq!(run.report.exit_code, 0);
    }

    #[test]
    fn unconverged_solve_is_reported() {
        let mut cfg = straight();
        cfg.solver_max_iter = Some(1);
        cfg.solver_tol = Some(1e-15);
        let e = run_scenario(&cfg, Stage::Solve).err().unwrap();
        assert_eq!(error_exit_code(&e), 6, "{e}");
    }

    #[test]
    fn sealed_maze_is_unsolvable() {
        let dir = std::env::temp_dir().join(format!("dropmaze-sealed-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("m.txt");
        fs::write(&p, "S.#.T\n").unwrap();
        let cfg = ScenarioConfig {
            maze: MazeSource::File(p),
            ..ScenarioConfig::default()
        };
        let e = run_scenario(&cfg, Stage::Solve).err().unwrap();
        assert_eq!(error_exit_code(&e), 5);
        let cfg = ScenarioConfig {
            maze: MazeSource::File(dir.join("missing.txt")),
            ..ScenarioConfig::default()
        };
        let e = run_scenario(&cfg, Stage::Solve).err().unwrap();
        assert_eq!(error_exit_code(&e), 1);
        assert!(e.to_string().contains("missing.txt"));
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_diff() {
        let a = r#"{"corner_force":{"max_force":4.0},"config":{"coated_corners":"false","seed":"7"},"trajectory":{"termination":"ReachedTarget"}}"#;
        let b = r#"{"corner_force":{"max_force":3.0},"config":{"coated_corners":"true","seed":"7"},"trajectory":null}"#;
        let d = diff_reports(a, b).unwrap();
        assert!(d.b_lower);
        assert_eq!(d.corner_force_ratio, 0.75);
        assert_eq!(d.termination_a.as_deref(), Some("ReachedTarget"));
        assert_eq!(d.termination_b, None);
        assert_eq!(d.config_changes.len(), 1);
        assert!(diff_reports("{}", b).is_err());
        assert!(diff_reports("not json", b).is_err());
    }
}
