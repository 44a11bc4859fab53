use std::collections::VecDeque;

use serde::Serialize;

use super::corridor::{segment_corridors, Corridors};
use super::lee::Path;
use crate::dynamics::Trajectory;
use crate::field::ScalarField;
use crate::maze::{neighbors4, Cell, MazeSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonMetrics {
    /// Largest distance from a droplet position to the oracle path polyline.
    pub max_lateral_deviation_mm: f64,
    /// Droplet path length over oracle path length.
    pub length_ratio: f64,
    pub trajectory_corridors: Vec<usize>,
    pub path_corridors: Vec<usize>,
    pub corridor_sequence_equal: bool,
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Distance from a point to a polyline in the same units.
pub fn distance_to_polyline(p: (f64, f64), line: &[(f64, f64)]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [a] => (p.0 - a.0).hypot(p.1 - a.1),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Cells visited by a sequence of points in mm, with repeats collapsed.
/// Steps that jump between non-adjacent cells are filled in cell by cell,
/// preferring channel cells, so the result is 4-connected.
pub fn cells_of_points(maze: &MazeSpec, points: impl IntoIterator<Item = (f64, f64)>) -> Vec<Cell> {
    let mut out: Vec<Cell> = Vec::new();
    for (x, y) in points {
        let Some(c) = maze.cell_at_mm(x, y) else {
            continue;
        };
        while let Some(&(lx, ly)) = out.last() {
            if (lx, ly) == c || lx.abs_diff(c.0) + ly.abs_diff(c.1) <= 1 {
                break;
            }
            let sx = if c.0 > lx {
                lx + 1
            } else if c.0 < lx {
                lx - 1
            } else {
                lx
            };
            let sy = if c.1 > ly {
                ly + 1
            } else if c.1 < ly {
                ly - 1
            } else {
                ly
            };
            let next = if sx == lx || sy == ly {
                (sx, sy)
            } else if maze.is_channel(sx, ly) || !maze.is_channel(lx, sy) {
                (sx, ly)
            } else {
                (lx, sy)
            };
            out.push(next);
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

pub fn compare_trajectory(traj: &Trajectory, path: &Path, maze: &MazeSpec) -> ComparisonMetrics {
    compare_with_corridors(traj, path, &segment_corridors(maze), maze)
}

pub fn compare_with_corridors(
    traj: &Trajectory,
    path: &Path,
    corridors: &Corridors,
    maze: &MazeSpec,
) -> ComparisonMetrics {
    let line = path.centers_mm();
    let mut max_dev: f64 = 0.0;
    let mut last = None;
    for s in &traj.samples {
        let p = (s.x, s.y);
        if last == Some(p) {
            continue;
        }
        last = Some(p);
        max_dev = max_dev.max(distance_to_polyline(p, &line));
    }
    let oracle_len = path.length_mm();
    let length_ratio = if oracle_len > 0.0 {
        traj.path_length_mm / oracle_len
    } else {
        f64::INFINITY
    };
    let trajectory_corridors = corridors.sequence(cells_of_points(
        maze,
        traj.samples.iter().map(|s| (s.x, s.y)),
    ));
    let path_corridors = corridors.sequence(path.cells.iter().copied());
    ComparisonMetrics {
        max_lateral_deviation_mm: max_dev,
        length_ratio,
        corridor_sequence_equal: trajectory_corridors == path_corridors,
        trajectory_corridors,
        path_corridors,
    }
}

fn bfs_within(
    maze: &MazeSpec,
    allowed: &dyn Fn(usize) -> bool,
    sources: &[Cell],
) -> Vec<Option<usize>> {
    let (nx, ny) = (maze.nx(), maze.ny());
    let mut parent = vec![None; nx * ny];
    let mut queue = VecDeque::new();
    for &(x, y) in sources {
        let i = y * nx + x;
        if allowed(i) && parent[i].is_none() {
            parent[i] = Some(i);
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let i = y * nx + x;
        for (a, b) in neighbors4(x, y, nx, ny) {
            let j = b * nx + a;
            if parent[j].is_none() && allowed(j) {
                parent[j] = Some(i);
                queue.push_back((a, b));
            }
        }
    }
    parent
}

/// Hottest route through a scalar field: among paths from `sources` to
/// `targets` over channel cells, those whose smallest value is as large as
/// possible; of these, the shortest. Returns `None` when no route exists.
pub fn ridge_path(
    field: &ScalarField,
    maze: &MazeSpec,
    sources: &[Cell],
    targets: &[Cell],
) -> Option<Vec<Cell>> {
    let nx = maze.nx();
    let channel = |i: usize| maze.cells()[i].is_channel();
    let mut levels: Vec<f64> = (0..field.values.len())
        .filter(|&i| channel(i))
        .map(|i| field.values[i])
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let connects = |t: f64| {
        let parent = bfs_within(maze, &|i| channel(i) && field.values[i] >= t, sources);
        targets.iter().any(|&(x, y)| parent[y * nx + x].is_some())
    };
    if levels.is_empty() || !connects(levels[0]) {
        return None;
    }
    // Largest level that still connects.
    let (mut lo, mut hi) = (0, levels.len());
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if connects(levels[mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = levels[lo];
    let parent = bfs_within(maze, &|i| channel(i) && field.values[i] >= t, sources);
    // Nearest reached target in BFS order is found by walking all targets
    // and keeping the one with the shortest chain.
    let chain = |mut i: usize| {
        let mut cells = vec![(i % nx, i / nx)];
        while let Some(p) = parent[i] {
            if p == i {
                break;
            }
            i = p;
            cells.push((i % nx, i / nx));
        }
        cells.reverse();
        cells
    };
    targets
        .iter()
        .filter(|&&(x, y)| parent[y * nx + x].is_some())
        .map(|&(x, y)| chain(y * nx + x))
        .min_by_key(|c| c.len())
}

/// Fraction of cells of `a` lying within `tol` cells (Euclidean) of some cell of `b`.
pub fn coverage(a: &[Cell], b: &[Cell], tol: f64) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let t2 = tol * tol;
    let near = a
        .iter()
        .filter(|&&(x, y)| {
            b.iter().any(|&(u, v)| {
                let (dx, dy) = (x as f64 - u as f64, y as f64 - v as f64);
                dx * dx + dy * dy <= t2
            })
        })
        .count();
    near as f64 / a.len() as f64
}

/// Symmetric path overlap: the smaller of the two coverages.
pub fn path_overlap(a: &[Cell], b: &[Cell], tol: f64) -> f64 {
    coverage(a, b, tol).min(coverage(b, a, tol))
}
