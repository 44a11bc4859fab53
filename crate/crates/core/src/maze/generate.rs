//! Built-in maze generators.
//!
//! Ring mazes are concentric square annuli: a central chamber holding the
//! positive electrode, `rings` wall rings each pierced by gap openings, and
//! an outer channel holding the negative electrode. Bifurcation mazes are a
//! single inlet splitting into two branches that rejoin before the outlet.
//! Straight channels run between an electrode column at each end.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CellKind, Electrode, MazePhysics, MazeSpec, Polarity};
use crate::error::MazeError;

/// Outer boundary wall thickness, cells.
const BORDER: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct RingMazeParams {
    pub rings: usize,
    /// Openings per wall ring, innermost first. A single entry applies to
    /// every ring.
    pub gaps_per_ring: Vec<usize>,
    pub diameter_mm: f64,
    pub channel_width_mm: f64,
    pub seed: u64,
    pub physics: MazePhysics,
}

impl RingMazeParams {
    pub fn new(rings: usize, diameter_mm: f64, channel_width_mm: f64, seed: u64) -> Self {
        RingMazeParams {
            rings,
            gaps_per_ring: vec![1],
            diameter_mm,
            channel_width_mm,
            seed,
            physics: MazePhysics::default(),
        }
    }
}

/// Opening through one wall ring.
#[derive(Clone, Copy, Debug)]
struct Opening {
    side: usize,
    /// First cell along the side.
    start: usize,
}

pub fn generate_ring_maze(params: &RingMazeParams) -> Result<MazeSpec, MazeError> {
    let h = params.physics.cell_size_mm;
    if !(h > 0.0 && h.is_finite()) {
        return Err(MazeError::Parameter("cell_size_mm must be positive".into()));
    }
    if params.rings == 0 {
        return Err(MazeError::Parameter("rings must be at least 1".into()));
    }
    let gaps: Vec<usize> = match params.gaps_per_ring.len() {
        1 => vec![params.gaps_per_ring[0]; params.rings],
        n if n == params.rings => params.gaps_per_ring.clone(),
        n => {
            return Err(MazeError::Parameter(format!(
                "gaps_per_ring has {n} entries for {} rings",
                params.rings
            )))
        }
    };
    if gaps.contains(&0) {
        return Err(MazeError::Parameter(
            "every ring needs at least one gap".into(),
        ));
    }
    let width = (params.channel_width_mm / h).round() as usize;
    if width < 3 {
        return Err(MazeError::Infeasible(format!(
            "channel width {} mm is below 3 cells of {h} mm",
            params.channel_width_mm
        )));
    }
    let n = (params.diameter_mm / h).round() as usize;
    let rings = params.rings;
    // wall thickness chosen so the chamber keeps roughly two channel widths
    let budget =
        n as isize - 2 * BORDER as isize - 2 * (rings * width) as isize - 2 * width as isize;
    let wall = (budget / (2 * rings as isize)).clamp(2, 2 * width as isize) as usize;
    let used = 2 * (BORDER + rings * (width + wall));
    if used + width > n {
        return Err(MazeError::Infeasible(format!(
            "{rings} rings of {} mm channels do not fit in {} mm",
            params.channel_width_mm, params.diameter_mm
        )));
    }
    let chamber = n - used;

    // depth of each layer measured from the outer edge (Chebyshev distance)
    let mut cells = vec![CellKind::Wall; n * n];
    let depth = |x: usize, y: usize| x.min(y).min(n - 1 - x).min(n - 1 - y);
    // wall ring k (0 = outermost) occupies depths [ring_start(k), ring_start(k) + wall)
    let ring_start = |k: usize| BORDER + width + k * (width + wall);
    for y in 0..n {
        for x in 0..n {
            let d = depth(x, y);
            let channel = if d < BORDER {
                false
            } else if d >= BORDER + rings * (width + wall) {
                true
            } else {
                (d - BORDER) % (width + wall) < width
            };
            if channel {
                cells[y * n + x] = CellKind::Channel;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // angle (degrees) of the previous opening, starting from the chamber centre
    let mut prev_angle: Option<f64> = None;
    // innermost ring first so the path is built outwards
    for (inner_index, &count) in gaps.iter().enumerate() {
        let k = rings - 1 - inner_index;
        let d0 = ring_start(k);
        // openings must sit on the straight part of the side, clear of the
        // corner squares of the channel inside the ring (unless that is the chamber)
        let margin = if inner_index == 0 { 0 } else { width + 1 };
        let lo = d0 + wall + margin;
        let hi = (n - d0 - wall)
            .checked_sub(width + margin)
            .filter(|&hi| hi >= lo)
            .ok_or_else(|| {
                MazeError::Infeasible(format!(
                    "ring {inner_index} is too small for a {width}-cell opening"
                ))
            })?;
        let mut placed: Vec<Opening> = Vec::new();
        for g in 0..count {
            let mut found = None;
            for _ in 0..10_000 {
                let o = Opening {
                    side: rng.gen_range(0..4),
                    start: rng.gen_range(lo..=hi),
                };
                let clear = placed
                    .iter()
                    .all(|p| p.side != o.side || p.start.abs_diff(o.start) >= 3 * width);
                if !clear {
                    continue;
                }
                if g == 0 {
                    if let Some(prev) = prev_angle {
                        let a = opening_angle(o, n, width);
                        if !asymmetric(prev, a) {
                            continue;
                        }
                    }
                }
                found = Some(o);
                break;
            }
            let o = found.ok_or_else(|| {
                MazeError::Infeasible(format!("could not place gap {g} on ring {inner_index}"))
            })?;
            for t in 0..wall {
                for s in 0..width {
                    let (x, y) = side_cell(o.side, o.start + s, d0 + t, n);
                    cells[y * n + x] = CellKind::Channel;
                }
            }
            placed.push(o);
        }
        prev_angle = Some(opening_angle(placed[0], n, width));
    }

    // negative electrode: a 2-cell-thick band across the outer channel
    let lo = BORDER + width + 1;
    let hi = n - BORDER - 2 * width - 1;
    let mut neg = None;
    for _ in 0..10_000 {
        let o = Opening {
            side: rng.gen_range(0..4),
            start: rng.gen_range(lo..=hi),
        };
        let centre = o.start + width / 2;
        if let Some(prev) = prev_angle {
            if !asymmetric(prev, side_angle(o.side, centre, n)) {
                continue;
            }
        }
        neg = Some((o.side, centre));
        break;
    }
    let (side, along) =
        neg.ok_or_else(|| MazeError::Infeasible("could not place the negative electrode".into()))?;
    let mut neg_cells = Vec::new();
    for t in 0..width {
        for s in 0..2 {
            neg_cells.push(side_cell(side, along + s, BORDER + t, n));
        }
    }

    // positive electrode: 2x2 block at the chamber centre
    let c = n / 2;
    let pos_cells = vec![(c - 1, c - 1), (c, c - 1), (c - 1, c), (c, c)];
    debug_assert!(chamber >= 2);

    let electrodes = vec![
        Electrode::new("E1", Polarity::Positive, pos_cells),
        Electrode::new("E2", Polarity::Negative, neg_cells),
    ];
    MazeSpec::new(n, n, cells, electrodes, params.physics)
}

/// Cell at position `along` on side `side` (0 top, 1 right, 2 bottom, 3 left)
/// at depth `depth` from the outer edge.
fn side_cell(side: usize, along: usize, depth: usize, n: usize) -> (usize, usize) {
    match side {
        0 => (along, depth),
        1 => (n - 1 - depth, along),
        2 => (n - 1 - along, n - 1 - depth),
        _ => (depth, n - 1 - along),
    }
}

fn side_angle(side: usize, along: usize, n: usize) -> f64 {
    let (x, y) = side_cell(side, along, 0, n);
    let c = n as f64 / 2.0;
    (y as f64 + 0.5 - c).atan2(x as f64 + 0.5 - c).to_degrees()
}

fn opening_angle(o: Opening, n: usize, width: usize) -> f64 {
    side_angle(o.side, o.start + width / 2, n)
}

/// Consecutive openings must be offset by 50..130 degrees so the two ways
/// around the channel between them differ clearly in length.
fn asymmetric(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(360.0);
    let d = d.min(360.0 - d);
    (50.0..=130.0).contains(&d)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BifurcationParams {
    /// Centreline length of the upper branch between the split and merge nodes.
    pub len_a_mm: f64,
    /// Centreline length of the lower branch.
    pub len_b_mm: f64,
    pub channel_width_mm: f64,
    pub physics: MazePhysics,
}

impl BifurcationParams {
    pub fn new(len_a_mm: f64, len_b_mm: f64, channel_width_mm: f64) -> Self {
        BifurcationParams {
            len_a_mm,
            len_b_mm,
            channel_width_mm,
            physics: MazePhysics::default(),
        }
    }
}

/// Geometry facts about a generated bifurcation maze, in cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BifurcationLayout {
    pub width: usize,
    /// Row of the inlet/outlet axis.
    pub axis_row: usize,
    /// Column of the split node centre.
    pub split_col: usize,
    /// Column of the merge node centre.
    pub merge_col: usize,
    /// Rows of the upper and lower branch centrelines.
    pub branch_a_row: usize,
    pub branch_b_row: usize,
}

impl BifurcationLayout {
    pub fn centerline_a(&self) -> usize {
        2 * (self.axis_row - self.branch_a_row) + (self.merge_col - self.split_col)
    }

    pub fn centerline_b(&self) -> usize {
        2 * (self.branch_b_row - self.axis_row) + (self.merge_col - self.split_col)
    }
}

pub fn generate_bifurcation_maze(params: &BifurcationParams) -> Result<MazeSpec, MazeError> {
    bifurcation_with_layout(params).map(|(m, _)| m)
}

/// Bifurcation maze plus the cell layout used to build it. The inlet runs
/// along a horizontal axis from the positive electrode at the left edge; the
/// upper branch (a) and lower branch (b) leave the split node, run right and
/// return to the axis at the merge node, from which the outlet runs to the
/// negative electrode at the right edge. The channel width is rounded to an
/// odd cell count so the axis passes through cell centres.
pub fn bifurcation_with_layout(
    params: &BifurcationParams,
) -> Result<(MazeSpec, BifurcationLayout), MazeError> {
    let h = params.physics.cell_size_mm;
    if !(h > 0.0 && h.is_finite()) {
        return Err(MazeError::Parameter("cell_size_mm must be positive".into()));
    }
    let (la, lb, w) = (params.len_a_mm, params.len_b_mm, params.channel_width_mm);
    if !(la > 2.0 * w && lb > 2.0 * w) {
        return Err(MazeError::Parameter(
            "branch lengths must exceed twice the channel width".into(),
        ));
    }
    let mut width = (w / h).round() as usize;
    if width.is_multiple_of(2) {
        width += 1;
    }
    if width < 3 {
        return Err(MazeError::Infeasible(format!(
            "channel width {w} mm is below 3 cells"
        )));
    }
    let half = width / 2;
    let la_c = la / h;
    let lb_c = lb / h;
    let span = (la_c.min(lb_c) / 2.0).round() as usize;
    let rise_a = ((la_c - span as f64) / 2.0).round() as usize;
    let rise_b = ((lb_c - span as f64) / 2.0).round() as usize;
    // the island between the branches must be at least one cell thick and long
    if rise_a + rise_b < width + 1 || span < width + 1 || rise_a <= half || rise_b <= half {
        return Err(MazeError::Infeasible(format!(
            "branches of {la} mm and {lb} mm cannot be separated at {h} mm cells"
        )));
    }

    let lead = 3 * width;
    let nx = BORDER + lead + span + lead + BORDER + 1;
    let axis = BORDER + rise_a + half;
    let ny = axis + rise_b + half + BORDER + 1;
    let split = BORDER + lead;
    let merge = split + span;
    let mut cells = vec![CellKind::Wall; nx * ny];
    let mut carve = |x0: usize, x1: usize, y0: usize, y1: usize| {
        for y in y0..=y1 {
            for x in x0..=x1 {
                cells[y * nx + x] = CellKind::Channel;
            }
        }
    };
    let ya = axis - rise_a;
    let yb = axis + rise_b;
    // inlet and outlet along the axis
    carve(BORDER, split, axis - half, axis + half);
    carve(merge, nx - BORDER - 1, axis - half, axis + half);
    // vertical legs at the split and merge columns
    for col in [split, merge] {
        carve(col - half, col + half, ya - half, yb + half);
    }
    // horizontal runs of both branches
    carve(split - half, merge + half, ya - half, ya + half);
    carve(split - half, merge + half, yb - half, yb + half);

    let pos: Vec<_> = (axis - half..=axis + half).map(|y| (BORDER, y)).collect();
    let neg: Vec<_> = (axis - half..=axis + half)
        .map(|y| (nx - BORDER - 1, y))
        .collect();
    let electrodes = vec![
        Electrode::new("E1", Polarity::Positive, pos),
        Electrode::new("E2", Polarity::Negative, neg),
    ];
    let maze = MazeSpec::new(nx, ny, cells, electrodes, params.physics)?;
    let layout = BifurcationLayout {
        width,
        axis_row: axis,
        split_col: split,
        merge_col: merge,
        branch_a_row: ya,
        branch_b_row: yb,
    };
    Ok((maze, layout))
}

/// Straight channel of the given length and width between two walls, with
/// the positive electrode filling the left end column and the negative
/// electrode the right end column.
pub fn generate_straight_channel(
    length_mm: f64,
    width_mm: f64,
    physics: MazePhysics,
) -> Result<MazeSpec, MazeError> {
    let h = physics.cell_size_mm;
    if !(h > 0.0 && h.is_finite()) {
        return Err(MazeError::Parameter("cell_size_mm must be positive".into()));
    }
    if !(length_mm.is_finite() && width_mm.is_finite()) {
        return Err(MazeError::Parameter(
            "length and width must be finite".into(),
        ));
    }
    let len = (length_mm / h).round();
    let width = (width_mm / h).round();
    if !(len >= 3.0 && width >= 1.0) || len * width > 1e8 {
        return Err(MazeError::Infeasible(format!(
            "a {length_mm} x {width_mm} mm channel at {h} mm cells"
        )));
    }
    let (nx, width) = (len as usize, width as usize);
    let ny = width + 2;
    let mut cells = vec![CellKind::Channel; nx * ny];
    cells[..nx].fill(CellKind::Wall);
    cells[(ny - 1) * nx..].fill(CellKind::Wall);
    let electrodes = vec![
        Electrode::new("E1", Polarity::Positive, (1..=width).map(|y| (0, y))),
        Electrode::new("E2", Polarity::Negative, (1..=width).map(|y| (nx - 1, y))),
    ];
    MazeSpec::new(nx, ny, cells, electrodes, physics)
}
