//! Rigid-disk droplet driven by the disk-integrated current field.
//!
//! The droplet is overdamped: its velocity is `mobility * force`. From rest
//! it only starts moving once the drive exceeds the static threshold; while
//! pinned, the drive grows linearly with the number of pinned steps
//! (`induction_steps` pinned steps double it), so a weakly pushed droplet
//! waits before moving on and a droplet with no tangential push stays put.
//! Wall contacts remove the inward normal component of the motion, and any
//! residual overlap is pushed back out along the contact normals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::DynamicsError;
use crate::field::{FieldSet, VectorField};
use crate::maze::{estimate_channel_width_cells, Cell, MazeSpec, Polarity};
use crate::numeric::exact_sum;
use crate::oracle::lee_label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ForceSource {
    /// Disk integral of the current density.
    DiskMeanJ,
    /// Disk integral of grad |J|.
    DiskMeanGradSpeedJ,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicsParams {
    /// Droplet radius; `None` uses a quarter of the estimated channel width
    /// (a disk whose diameter is half the channel).
    pub radius_mm: Option<f64>,
    /// Speed per unit force, (mm/s) per (field unit * mm^2).
    pub mobility: f64,
    /// Drive needed to set a resting droplet in motion; `None` uses
    /// `threshold_fraction` times the largest disk force found in the maze.
    pub static_threshold: Option<f64>,
    pub threshold_fraction: f64,
    /// Pinned steps after which the drive of a pinned droplet has doubled;
    /// 0 keeps the drive constant.
    pub induction_steps: f64,
    /// Time step; `None` picks the largest step that keeps every move at or
    /// below half a cell.
    pub dt: Option<f64>,
    pub max_steps: usize,
    pub lock_window: usize,
    pub lock_epsilon_mm: f64,
    pub force_source: ForceSource,
    pub force_gain: f64,
    /// Half-width of a uniform zero-mean random force per component; 0 is off.
    pub noise_amplitude: f64,
    pub noise_seed: u64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            radius_mm: None,
            mobility: 0.01,
            static_threshold: None,
            threshold_fraction: 0.5,
            induction_steps: 2000.0,
            dt: None,
            max_steps: 400_000,
            lock_window: 4000,
            lock_epsilon_mm: 0.05,
            force_source: ForceSource::DiskMeanJ,
            force_gain: 1.0,
            noise_amplitude: 0.0,
            noise_seed: 0,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::Parameter(m.into()));
        if !(self.mobility > 0.0 && self.mobility.is_finite()) {
            return bad("mobility must be positive");
        }
        if let Some(t) = self.static_threshold {
            if !(t >= 0.0 && t.is_finite()) {
                return bad("static_threshold must be non-negative");
            }
        }
        if !(self.threshold_fraction >= 0.0 && self.threshold_fraction.is_finite()) {
            return bad("threshold_fraction must be non-negative");
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad("dt must be positive");
            }
        }
        if let Some(r) = self.radius_mm {
            if !(r > 0.0 && r.is_finite()) {
                return bad("radius must be positive");
            }
        }
        if self.lock_window < 1 {
            return bad("lock_window must be at least 1");
        }
        if !(self.induction_steps >= 0.0)
            || !(self.lock_epsilon_mm >= 0.0)
            || !(self.noise_amplitude >= 0.0)
        {
            return bad(
                "induction_steps, lock_epsilon_mm and noise_amplitude must be non-negative",
            );
        }
        if !self.force_gain.is_finite() {
            return bad("force_gain must be finite");
        }
        Ok(())
    }

    /// Copy with radius, static threshold and time step fixed for this maze
    /// and driving field.
    pub fn resolved(
        &self,
        maze: &MazeSpec,
        field: &VectorField,
    ) -> Result<DynamicsParams, DynamicsError> {
        let r = self.radius_for(maze);
        let mut p = self.clone();
        if p.static_threshold.is_none() || p.dt.is_none() {
            let fmax = peak_disk_force(maze, field, r, self.force_gain)?;
            let threshold = *p
                .static_threshold
                .get_or_insert(self.threshold_fraction * fmax);
            // largest step that keeps the fastest possible move at half a cell
            let top = fmax.max(threshold).max(f64::MIN_POSITIVE);
            p.dt.get_or_insert(0.5 * maze.cell_size_mm() / (self.mobility * top));
        }
        p.radius_mm = Some(r);
        Ok(p)
    }

    pub fn radius_for(&self, maze: &MazeSpec) -> f64 {
        self.radius_mm.unwrap_or_else(|| {
            estimate_channel_width_cells(maze) as f64 * maze.cell_size_mm() / 4.0
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DropletState {
    pub position: (f64, f64),
    pub radius: f64,
    pub velocity: (f64, f64),
    pub t: f64,
    /// Consecutive steps spent pinned.
    pub pinned_steps: u64,
}

impl DropletState {
    pub fn at_rest(position: (f64, f64), radius: f64) -> Self {
        DropletState {
            position,
            radius,
            velocity: (0.0, 0.0),
            t: 0.0,
            pinned_steps: 0,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.0.hypot(self.velocity.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Termination {
    ReachedTarget,
    Locked,
    MaxSteps,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub force: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub termination: Termination,
    pub path_length_mm: f64,
    pub radius_mm: f64,
    pub dt: f64,
    pub start_cell: Cell,
    /// Static threshold the run used, in force units.
    pub static_threshold: f64,
}

// ---------------------------------------------------------------------------
// geometry

/// Area of the intersection of the disk of radius `r` centred at the origin
/// with the rectangle `[x0, x1] x [y0, y1]`.
///
/// Negating and swapping the `y` bounds gives a bit-identical result, which
/// keeps forces on mirror-symmetric configurations exactly symmetric.
pub fn disk_rect_area(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> f64 {
    let a = x0.max(-r);
    let b = x1.min(r);
    if b <= a || y1 <= y0 {
        return 0.0;
    }
    let mut xs = vec![a, b];
    for y in [y0, y1] {
        if y.abs() < r {
            let c = (r * r - y * y).sqrt();
            for v in [-c, c] {
                if v > a && v < b {
                    xs.push(v);
                }
            }
        }
    }
    xs.sort_by(|p, q| p.total_cmp(q));
    xs.dedup();
    let prim = |t: f64| {
        let t = t.clamp(-r, r);
        0.5 * (t * (r * r - t * t).max(0.0).sqrt() + r * r * (t / r).asin())
    };
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (p, q) = (w[0], w[1]);
        let mid = 0.5 * (p + q);
        let s = (r * r - mid * mid).max(0.0).sqrt();
        if y1.min(s) <= y0.max(-s) {
            continue;
        }
        let arc = prim(q) - prim(p);
        let top = if y1 < s { y1 * (q - p) } else { arc };
        let bottom = if y0 > -s { y0 * (q - p) } else { -arc };
        area += top - bottom;
    }
    area
}

/// Distance from a point to the axis-aligned square of cell `(cx, cy)` and
/// the nearest point on it, all in mm.
fn square_distance(px: f64, py: f64, cx: isize, cy: isize, h: f64) -> (f64, (f64, f64)) {
    let (x0, y0) = (cx as f64 * h, cy as f64 * h);
    let qx = px.clamp(x0, x0 + h);
    let qy = py.clamp(y0, y0 + h);
    ((px - qx).hypot(py - qy), (qx, qy))
}

/// Cells (signed, may lie off-grid) whose squares come within `reach` of the point.
fn cells_near(px: f64, py: f64, reach: f64, h: f64) -> impl Iterator<Item = (isize, isize)> {
    let x0 = ((px - reach) / h).floor() as isize;
    let x1 = ((px + reach) / h).floor() as isize;
    let y0 = ((py - reach) / h).floor() as isize;
    let y1 = ((py + reach) / h).floor() as isize;
    (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| (x, y)))
}

/// Outward contact normals of solid cells within `r + eps` of the centre.
fn contact_normals(maze: &MazeSpec, p: (f64, f64), r: f64) -> Vec<(f64, f64)> {
    let h = maze.cell_size_mm();
    let eps = 1e-9 * h;
    let mut out = Vec::new();
    for (cx, cy) in cells_near(p.0, p.1, r + eps, h) {
        if !maze.kind_or_wall(cx, cy).is_solid() {
            continue;
        }
        let (d, q) = square_distance(p.0, p.1, cx, cy, h);
        if d <= r + eps && d > 0.0 {
            out.push(((p.0 - q.0) / d, (p.1 - q.1) / d));
        }
    }
    out
}

/// Deepest overlap of the disk with any solid cell (0 when clear).
pub fn wall_overlap(maze: &MazeSpec, p: (f64, f64), r: f64) -> f64 {
    let h = maze.cell_size_mm();
    cells_near(p.0, p.1, r, h)
        .filter(|&(cx, cy)| maze.kind_or_wall(cx, cy).is_solid())
        .map(|(cx, cy)| r - square_distance(p.0, p.1, cx, cy, h).0)
        .fold(0.0, f64::max)
}

fn overlaps_polarity(
    maze: &MazeSpec,
    polarity: &[Option<Polarity>],
    p: (f64, f64),
    r: f64,
    want: Polarity,
) -> bool {
    let h = maze.cell_size_mm();
    cells_near(p.0, p.1, r, h).any(|(cx, cy)| {
        cx >= 0
            && cy >= 0
            && (cx as usize) < maze.nx()
            && (cy as usize) < maze.ny()
            && polarity[maze.index(cx as usize, cy as usize)] == Some(want)
            && square_distance(p.0, p.1, cx, cy, h).0 < r
    })
}

/// Remove motion into contacts: the closest of {v, v with one inward normal
/// component removed, 0} that points into none of the contacts.
fn project_contacts(v: (f64, f64), normals: &[(f64, f64)]) -> (f64, f64) {
    let scale = v.0.hypot(v.1);
    if scale == 0.0 {
        return v;
    }
    let tol = -1e-12 * scale;
    let feasible = |c: (f64, f64)| normals.iter().all(|n| c.0 * n.0 + c.1 * n.1 >= tol);
    if feasible(v) {
        return v;
    }
    let mut best: Option<((f64, f64), f64)> = None;
    for n in normals {
        let d = v.0 * n.0 + v.1 * n.1;
        if d >= 0.0 {
            continue;
        }
        let c = (v.0 - d * n.0, v.1 - d * n.1);
        if feasible(c) {
            let dist = (v.0 - c.0).hypot(v.1 - c.1);
            if best.is_none_or(|(_, bd)| dist < bd) {
                best = Some((c, dist));
            }
        }
    }
    best.map_or((0.0, 0.0), |(c, _)| c)
}

/// Push the disk out of any solid cells it overlaps. Returns `None` if the
/// overlap cannot be removed.
fn resolve_overlap(maze: &MazeSpec, mut p: (f64, f64), r: f64) -> Option<(f64, f64)> {
    let h = maze.cell_size_mm();
    let tol = 1e-9 * h;
    for _ in 0..16 {
        let mut px = Vec::new();
        let mut py = Vec::new();
        for (cx, cy) in cells_near(p.0, p.1, r, h) {
            if !maze.kind_or_wall(cx, cy).is_solid() {
                continue;
            }
            let (d, q) = square_distance(p.0, p.1, cx, cy, h);
            if d < r - tol {
                if d == 0.0 {
                    return None;
                }
                let depth = r - d;
                px.push(depth * (p.0 - q.0) / d);
                py.push(depth * (p.1 - q.1) / d);
            }
        }
        if px.is_empty() {
            return Some(p);
        }
        p = (p.0 + exact_sum(px), p.1 + exact_sum(py));
    }
    (wall_overlap(maze, p, r) <= tol).then_some(p)
}

// ---------------------------------------------------------------------------
// force

/// Disk integral of a vector field: the sum over cells of the field times the
/// area of the cell covered by the disk, times `gain`. Solid cells contribute
/// nothing.
pub fn disk_integrate(
    field: &VectorField,
    maze: &MazeSpec,
    center: (f64, f64),
    radius: f64,
    gain: f64,
) -> Result<(f64, f64), DynamicsError> {
    let h = field.cell_size_mm;
    let (nx, ny) = (field.nx as isize, field.ny as isize);
    let (px, py) = center;
    let (w, hgt) = (field.nx as f64 * h, field.ny as f64 * h);
    if px + radius <= 0.0
        || py + radius <= 0.0
        || px - radius >= w
        || py - radius >= hgt
        || !px.is_finite()
        || !py.is_finite()
    {
        return Err(DynamicsError::DiskOutsideGrid { x: px, y: py });
    }
    // offsets in cell units, exact when positions are representable multiples of h
    let ux = px / h;
    let uy = py / h;
    let rc = radius / h;
    let mut fx = Vec::new();
    let mut fy = Vec::new();
    for (cx, cy) in cells_near(px, py, radius, h) {
        if cx < 0 || cy < 0 || cx >= nx || cy >= ny {
            continue;
        }
        let (x, y) = (cx as usize, cy as usize);
        if maze.kind(x, y).is_solid() {
            continue;
        }
        let a = disk_rect_area(
            cx as f64 - ux,
            cx as f64 + 1.0 - ux,
            cy as f64 - uy,
            cy as f64 + 1.0 - uy,
            rc,
        );
        if a > 0.0 {
            let (vx, vy) = field.at(x, y);
            fx.push(vx * a);
            fy.push(vy * a);
        }
    }
    let s = gain * h * h;
    Ok((s * exact_sum(fx), s * exact_sum(fy)))
}

/// Field the droplet responds to.
pub fn driving_field(fields: &FieldSet, source: ForceSource) -> &VectorField {
    match source {
        ForceSource::DiskMeanJ => &fields.current,
        ForceSource::DiskMeanGradSpeedJ => &fields.grad_speed,
    }
}

// ---------------------------------------------------------------------------
// stepping

/// One overdamped stick-slip step under a given external force (noise
/// already added). An unresolved relative threshold counts as zero here;
/// see [`DynamicsParams::resolved`].
pub fn step_with_force(
    state: &DropletState,
    params: &DynamicsParams,
    maze: &MazeSpec,
    force: (f64, f64),
    dt: f64,
) -> DropletState {
    let r = state.radius;
    let h = maze.cell_size_mm();
    let eff = effective_drive(maze, state.position, r, force);
    let eff_mag = eff.0.hypot(eff.1);

    let threshold = params.static_threshold.unwrap_or(0.0);
    let rest_speed = params.mobility * threshold;
    let at_rest = state.speed() <= rest_speed;
    let boost = if params.induction_steps > 0.0 {
        1.0 + state.pinned_steps as f64 / params.induction_steps
    } else {
        1.0
    };
    if at_rest && eff_mag * boost < threshold {
        return DropletState {
            position: state.position,
            radius: r,
            velocity: (0.0, 0.0),
            t: state.t + dt,
            pinned_steps: state.pinned_steps + 1,
        };
    }

    let v = (params.mobility * eff.0, params.mobility * eff.1);
    let mut d = (v.0 * dt, v.1 * dt);
    let len = d.0.hypot(d.1);
    if len > 0.5 * h {
        let k = 0.5 * h / len;
        d = (d.0 * k, d.1 * k);
    }
    let proposed = (state.position.0 + d.0, state.position.1 + d.1);
    let position = resolve_overlap(maze, proposed, r).unwrap_or(state.position);
    DropletState {
        position,
        radius: r,
        velocity: v,
        t: state.t + dt,
        pinned_steps: 0,
    }
}

/// Part of `force` left once components pushing the disk into walls it
/// touches are removed.
pub fn effective_drive(
    maze: &MazeSpec,
    position: (f64, f64),
    r: f64,
    force: (f64, f64),
) -> (f64, f64) {
    project_contacts(force, &contact_normals(maze, position, r))
}

/// One step: integrate the driving field over the disk, then advance.
pub fn step(
    state: &DropletState,
    params: &DynamicsParams,
    maze: &MazeSpec,
    field: &VectorField,
    dt: f64,
) -> Result<DropletState, DynamicsError> {
    let f = disk_integrate(field, maze, state.position, state.radius, params.force_gain)?;
    Ok(step_with_force(state, params, maze, f, dt))
}

/// Centres of channel cells where a disk of radius `r` fits without
/// touching walls.
fn fitting_cells(maze: &MazeSpec, r: f64) -> Vec<Cell> {
    let mut v = Vec::new();
    for y in 0..maze.ny() {
        for x in 0..maze.nx() {
            if maze.is_channel(x, y) && wall_overlap(maze, maze.cell_center_mm(x, y), r) <= 0.0 {
                v.push((x, y));
            }
        }
    }
    v
}

/// Largest disk force over all cell centres where the droplet fits.
pub fn peak_disk_force(
    maze: &MazeSpec,
    field: &VectorField,
    r: f64,
    gain: f64,
) -> Result<f64, DynamicsError> {
    let mut fmax: f64 = 0.0;
    for (x, y) in fitting_cells(maze, r) {
        let f = disk_integrate(field, maze, maze.cell_center_mm(x, y), r, gain)?;
        fmax = fmax.max(f.0.hypot(f.1));
    }
    Ok(fmax)
}

/// Start cell: a channel cell where the disk fits without touching the
/// positive electrode, nearest to it by channel distance; ties go to the
/// cell closest to the electrode centroid, then the one nearest the target.
pub fn start_cell(maze: &MazeSpec, r: f64) -> Result<Cell, DynamicsError> {
    let pos = maze.electrode_cells(Polarity::Positive);
    let neg = maze.electrode_cells(Polarity::Negative);
    let from_pos =
        lee_label(maze, &pos).map_err(|_| DynamicsError::NoStartPosition { radius_mm: r })?;
    let to_neg =
        lee_label(maze, &neg).map_err(|_| DynamicsError::NoStartPosition { radius_mm: r })?;
    let polarity = maze.polarity_map();
    let (cx, cy) = {
        let n = pos.len() as f64;
        let sx: f64 = pos.iter().map(|c| c.0 as f64 + 0.5).sum();
        let sy: f64 = pos.iter().map(|c| c.1 as f64 + 0.5).sum();
        (sx / n, sy / n)
    };
    fitting_cells(maze, r)
        .into_iter()
        .filter(|&(x, y)| {
            !overlaps_polarity(
                maze,
                &polarity,
                maze.cell_center_mm(x, y),
                r,
                Polarity::Positive,
            ) && from_pos.get(x, y).is_some()
                && to_neg.get(x, y).is_some()
        })
        .min_by(|&a, &b| {
            let key = |(x, y): Cell| {
                let d2 = (x as f64 + 0.5 - cx).powi(2) + (y as f64 + 0.5 - cy).powi(2);
                (
                    from_pos.get(x, y).unwrap(),
                    d2,
                    to_neg.get(x, y).unwrap(),
                    y,
                    x,
                )
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.cmp(&kb.2))
                .then(ka.3.cmp(&kb.3))
                .then(ka.4.cmp(&kb.4))
        })
        .ok_or(DynamicsError::NoStartPosition { radius_mm: r })
}

/// Run the droplet from next to the positive electrode until it touches the
/// negative electrode, locks, or runs out of steps.
pub fn simulate(
    maze: &MazeSpec,
    fields: &FieldSet,
    params: &DynamicsParams,
) -> Result<Trajectory, DynamicsError> {
    params.validate()?;
    let field = driving_field(fields, params.force_source);
    let params = &params.resolved(maze, field)?;
    let r = params.radius_for(maze);
    let start = start_cell(maze, r)?;
    let dt = params.dt.expect("resolved");
    let polarity = maze.polarity_map();
    let mut rng = ChaCha8Rng::seed_from_u64(params.noise_seed);

    let mut state = DropletState::at_rest(maze.cell_center_mm(start.0, start.1), r);
    let mut samples = Vec::new();
    let mut path_length = 0.0;
    let force_at = |s: &DropletState, rng: &mut ChaCha8Rng| -> Result<(f64, f64), DynamicsError> {
        let mut f = disk_integrate(field, maze, s.position, r, params.force_gain)?;
        if params.noise_amplitude > 0.0 {
            let a = params.noise_amplitude;
            f.0 += rng.gen_range(-a..=a);
            f.1 += rng.gen_range(-a..=a);
        }
        Ok(f)
    };

    let mut force = force_at(&state, &mut rng)?;
    samples.push(Sample {
        t: 0.0,
        x: state.position.0,
        y: state.position.1,
        speed: 0.0,
        force: force.0.hypot(force.1),
    });
    let termination = loop {
        if overlaps_polarity(maze, &polarity, state.position, r, Polarity::Negative) {
            break Termination::ReachedTarget;
        }
        let k = samples.len() - 1;
        if k >= params.lock_window {
            let old = samples[k - params.lock_window];
            if (state.position.0 - old.x).hypot(state.position.1 - old.y) < params.lock_epsilon_mm {
                break Termination::Locked;
            }
        }
        if k >= params.max_steps {
            break Termination::MaxSteps;
        }
        let next = step_with_force(&state, params, maze, force, dt);
        path_length +=
            (next.position.0 - state.position.0).hypot(next.position.1 - state.position.1);
        state = next;
        force = force_at(&state, &mut rng)?;
        samples.push(Sample {
            t: (k + 1) as f64 * dt,
            x: state.position.0,
            y: state.position.1,
            speed: state.speed(),
            force: force.0.hypot(force.1),
        });
    };

    Ok(Trajectory {
        samples,
        termination,
        path_length_mm: path_length,
        radius_mm: r,
        dt,
        start_cell: start,
        static_threshold: params.static_threshold.unwrap_or(0.0),
    })
}

/// Run of consecutive samples with speed below 1% of the peak speed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DwellSegment {
    pub first: usize,
    pub last: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Mean droplet position over the segment, mm.
    pub x: f64,
    pub y: f64,
}

impl DwellSegment {
    pub fn steps(&self) -> usize {
        self.last - self.first + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VelocityProfile {
    pub series: Vec<(f64, f64)>,
    pub peak_speed: f64,
    pub dwell_segments: Vec<DwellSegment>,
}

pub fn velocity_profile(traj: &Trajectory) -> VelocityProfile {
    let series: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.t, s.speed)).collect();
    let peak = series.iter().map(|s| s.1).fold(0.0, f64::max);
    let slow = |s: &Sample| s.speed < 0.01 * peak;
    let mut dwell = Vec::new();
    let mut i = 0;
    let n = traj.samples.len();
    while i < n {
        if !slow(&traj.samples[i]) {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < n && slow(&traj.samples[i + 1]) {
            i += 1;
        }
        let seg = &traj.samples[first..=i];
        let m = seg.len() as f64;
        dwell.push(DwellSegment {
            first,
            last: i,
            t_start: seg[0].t,
            t_end: seg[seg.len() - 1].t,
            x: seg.iter().map(|s| s.x).sum::<f64>() / m,
            y: seg.iter().map(|s| s.y).sum::<f64>() / m,
        });
        i += 1;
    }
    VelocityProfile {
        series,
        peak_speed: peak,
        dwell_segments: dwell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorQuantity;
    use crate::maze::parse_maze;

    fn open_room(n: usize) -> MazeSpec {
        let mut s = String::new();
        for y in 0..n {
            for x in 0..n {
                s.push(if (x, y) == (0, 0) {
                    'S'
                } else if (x, y) == (n - 1, n - 1) {
                    'T'
                } else {
                    '.'
                });
            }
            s.push('\n');
        }
        parse_maze(&s).unwrap()
    }

    #[test]
    fn disk_rect_area_basics() {
        let r = 1.3;
        let full = std::f64::consts::PI * r * r;
        assert!((disk_rect_area(-2.0, 2.0, -2.0, 2.0, r) - full).abs() < 1e-12);
        assert!((disk_rect_area(0.0, 2.0, 0.0, 2.0, r) - full / 4.0).abs() < 1e-12);
        assert!((disk_rect_area(-2.0, 2.0, 0.0, 2.0, r) - full / 2.0).abs() < 1e-12);
        assert_eq!(disk_rect_area(2.0, 3.0, 0.0, 1.0, r), 0.0);
        // square inside the disk
        assert!((disk_rect_area(-0.5, 0.5, -0.5, 0.5, r) - 1.0).abs() < 1e-12);
        // mirror in y is bit-identical
        for &(a, b) in &[(0.2, 1.1), (-0.7, 0.3), (0.9, 1.6)] {
            assert_eq!(
                disk_rect_area(-0.4, 0.8, a, b, r),
                disk_rect_area(-0.4, 0.8, -b, -a, r)
            );
        }
    }

    #[test]
    fn cell_tiling_sums_to_disk_area() {
        let r = 2.37;
        let mut total = 0.0;
        for y in -4..4 {
            for x in -4..4 {
                total += disk_rect_area(
                    x as f64 + 0.13,
                    x as f64 + 1.13,
                    y as f64 - 0.4,
                    y as f64 + 0.6,
                    r,
                );
            }
        }
        assert!((total - std::f64::consts::PI * r * r).abs() < 1e-11);
    }

    #[test]
    fn uniform_field_force_is_gain_times_area() {
        let m = open_room(20);
        let f = VectorField::uniform(20, 20, 0.5, VectorQuantity::CurrentDensity, (3.0, -1.0));
        let (fx, fy) = disk_integrate(&f, &m, (5.0, 5.0), 1.5, 2.0).unwrap();
        let area = std::f64::consts::PI * 1.5 * 1.5;
        assert!((fx - 2.0 * 3.0 * area).abs() < 1e-9);
        assert!((fy + 2.0 * area).abs() < 1e-9);
    }

    #[test]
    fn disk_outside_grid_is_an_error() {
        let m = open_room(4);
        let f = VectorField::uniform(4, 4, 0.5, VectorQuantity::CurrentDensity, (1.0, 0.0));
        assert!(disk_integrate(&f, &m, (10.0, 1.0), 0.5, 1.0).is_err());
        assert!(disk_integrate(&f, &m, (-0.6, 1.0), 0.5, 1.0).is_err());
    }

    #[test]
    fn walls_do_not_contribute() {
        let m = parse_maze("S....\n..#..\n....T\n").unwrap();
        let f = VectorField::uniform(5, 3, 1.0, VectorQuantity::CurrentDensity, (1.0, 0.0));
        let (fx, _) = disk_integrate(&f, &m, (2.5, 1.5), 0.5, 1.0).unwrap();
        assert_eq!(fx, 0.0);
    }

    fn unit_cells(text: &str) -> MazeSpec {
        let m = parse_maze(text).unwrap();
        m.with_physics(crate::maze::MazePhysics {
            cell_size_mm: 1.0,
            ..*m.physics()
        })
        .unwrap()
    }

    fn params(threshold: f64) -> DynamicsParams {
        DynamicsParams {
            mobility: 0.1,
            static_threshold: Some(threshold),
            induction_steps: 0.0,
            ..DynamicsParams::default()
        }
    }

    #[test]
    fn free_step_moves_by_mobility_force_dt() {
        let m = open_room(40);
        let s = DropletState::at_rest((10.0, 10.0), 1.0);
        let n = step_with_force(&s, &params(1.0), &m, (2.0, 0.0), 0.5);
        assert!((n.position.0 - 10.1).abs() < 1e-12);
        assert_eq!(n.position.1, 10.0);
        assert_eq!(n.t, 0.5);
    }

    #[test]
    fn below_threshold_from_rest_is_pinned() {
        let m = open_room(40);
        let s = DropletState::at_rest((10.0, 10.0), 1.0);
        let n = step_with_force(&s, &params(4.0), &m, (2.0, 0.0), 0.5);
        assert_eq!(n.position, s.position);
        assert_eq!(n.pinned_steps, 1);
    }

    #[test]
    fn induction_releases_a_weakly_pushed_droplet() {
        let m = open_room(40);
        let p = DynamicsParams {
            induction_steps: 10.0,
            ..params(4.0)
        };
        let mut s = DropletState::at_rest((10.0, 10.0), 1.0);
        let mut moved_at = None;
        for k in 0..20 {
            s = step_with_force(&s, &p, &m, (2.0, 0.0), 0.5);
            if s.position.0 > 10.0 {
                moved_at = Some(k);
                break;
            }
        }
        // drive doubles after 10 pinned steps
        assert_eq!(moved_at, Some(10));
    }

    #[test]
    fn push_into_wall_slides_tangentially() {
        // wall along the top row; disk touching it from below
        let m = unit_cells("##########\nS........T\n..........\n..........\n..........\n");
        let r = 1.0;
        let s = DropletState::at_rest((5.0, 2.0), r);
        let f = (1.0, -1.0); // 45 degrees up into the wall
        let n = step_with_force(&s, &params(0.0), &m, f, 1.0);
        assert!((n.position.0 - 5.1).abs() < 1e-12, "{:?}", n.position);
        assert!((n.position.1 - 2.0).abs() < 1e-12);
        assert!(wall_overlap(&m, n.position, r) <= 1e-9);
    }

    #[test]
    fn corner_blocks_motion_into_it() {
        let m = unit_cells("#####\n#S..#\n#...#\n#..T#\n#####\n");
        let s = DropletState::at_rest((1.4, 1.4), 0.4);
        let n = step_with_force(&s, &params(0.0), &m, (-1.0, -1.0), 1.0);
        assert_eq!(n.position, s.position);
    }

    #[test]
    fn overlap_is_pushed_out() {
        let m = unit_cells("#####\n#S..#\n#...#\n#..T#\n#####\n");
        let p = resolve_overlap(&m, (1.2, 2.5), 0.5).unwrap();
        assert!((p.0 - 1.5).abs() < 1e-9);
        assert!(wall_overlap(&m, p, 0.5) <= 1e-9);
    }

    #[test]
    fn dwell_segments_are_runs_below_one_percent_of_peak() {
        let mk = |speed: f64, k: usize| Sample {
            t: k as f64,
            x: k as f64,
            y: 0.0,
            speed,
            force: 0.0,
        };
        let speeds = [0.0, 5.0, 5.0, 0.01, 0.02, 5.0, 0.0];
        let traj = Trajectory {
            samples: speeds.iter().enumerate().map(|(k, &s)| mk(s, k)).collect(),
            termination: Termination::MaxSteps,
            path_length_mm: 0.0,
            radius_mm: 1.0,
            dt: 1.0,
            start_cell: (0, 0),
            static_threshold: 0.0,
        };
        let p = velocity_profile(&traj);
        let d: Vec<(usize, usize)> = p.dwell_segments.iter().map(|d| (d.first, d.last)).collect();
        assert_eq!(d, vec![(0, 0), (3, 4), (6, 6)]);
        assert_eq!(p.peak_speed, 5.0);
    }
}
