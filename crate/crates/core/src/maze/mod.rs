//! Maze geometry: cell grid, electrodes and the physical parameters of the
//! electrolyte sheet.

mod format;
mod generate;

pub use format::{emit_maze, parse_maze};
pub use generate::{
    bifurcation_with_layout, generate_bifurcation_maze, generate_ring_maze,
    generate_straight_channel, BifurcationLayout, BifurcationParams, RingMazeParams,
};

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::MazeError;

/// Default cell edge length in millimetres.
pub const DEFAULT_CELL_SIZE_MM: f64 = 0.5;
/// Conductivity of 0.5 mol/L NaOH at room temperature, S/m. Molar
/// conductivity of NaOH at that concentration is close to
/// 200 S cm^2/mol, giving 0.1 S/cm.
pub const DEFAULT_SIGMA_ELECTROLYTE: f64 = 10.0;
pub const DEFAULT_SIGMA_WALL: f64 = 0.0;
/// Effective sheet conductivity assigned to a coated wall cell, S/m.
///
/// A thin gold film is many orders of magnitude more conductive than the
/// electrolyte; a 1000:1 contrast already makes the coated cell an
/// equipotential while keeping the linear system well conditioned.
pub const DEFAULT_SIGMA_COATING: f64 = 1.0e4;
pub const DEFAULT_VOLTAGE: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CellKind {
    Channel,
    Wall,
    /// Wall cell carrying a highly conductive surface layer.
    CoatedWall,
}

impl CellKind {
    pub fn is_channel(self) -> bool {
        matches!(self, CellKind::Channel)
    }

    pub fn is_solid(self) -> bool {
        !self.is_channel()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Grid coordinate `(x, y)`; `x` is the column, `y` the row with row 0 at the top.
pub type Cell = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Electrode {
    pub id: String,
    pub polarity: Polarity,
    /// Sorted in row-major order, no duplicates.
    pub cells: Vec<Cell>,
}

impl Electrode {
    pub fn new(
        id: impl Into<String>,
        polarity: Polarity,
        cells: impl IntoIterator<Item = Cell>,
    ) -> Self {
        let set: BTreeSet<(usize, usize)> = cells.into_iter().map(|(x, y)| (y, x)).collect();
        Electrode {
            id: id.into(),
            polarity,
            cells: set.into_iter().map(|(y, x)| (x, y)).collect(),
        }
    }
}

/// Physical parameters of a maze that are independent of its geometry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MazePhysics {
    pub cell_size_mm: f64,
    pub sigma_electrolyte: f64,
    pub sigma_wall: f64,
    pub sigma_coating: f64,
    pub applied_voltage: f64,
}

impl Default for MazePhysics {
    fn default() -> Self {
        MazePhysics {
            cell_size_mm: DEFAULT_CELL_SIZE_MM,
            sigma_electrolyte: DEFAULT_SIGMA_ELECTROLYTE,
            sigma_wall: DEFAULT_SIGMA_WALL,
            sigma_coating: DEFAULT_SIGMA_COATING,
            applied_voltage: DEFAULT_VOLTAGE,
        }
    }
}

/// A validated maze. Construct through [`MazeSpec::new`], [`parse_maze`] or
/// one of the generators; every instance satisfies the geometry and
/// parameter invariants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MazeSpec {
    nx: usize,
    ny: usize,
    cells: Vec<CellKind>,
    electrodes: Vec<Electrode>,
    physics: MazePhysics,
}

impl MazeSpec {
    pub fn new(
        nx: usize,
        ny: usize,
        cells: Vec<CellKind>,
        electrodes: Vec<Electrode>,
        physics: MazePhysics,
    ) -> Result<Self, MazeError> {
        if nx == 0 || ny == 0 {
            return Err(MazeError::EmptyGrid);
        }
        if cells.len() != nx * ny {
            return Err(MazeError::GridSize {
                expected: nx * ny,
                got: cells.len(),
            });
        }
        let p = &physics;
        if !(p.cell_size_mm.is_finite() && p.cell_size_mm > 0.0) {
            return Err(MazeError::Parameter("cell_size_mm must be positive".into()));
        }
        if !(p.applied_voltage.is_finite() && p.applied_voltage > 0.0) {
            return Err(MazeError::Parameter("voltage must be positive".into()));
        }
        if !(p.sigma_wall.is_finite() && p.sigma_wall >= 0.0) {
            return Err(MazeError::Parameter(
                "sigma_wall must be non-negative".into(),
            ));
        }
        if !(p.sigma_electrolyte.is_finite() && p.sigma_electrolyte > p.sigma_wall) {
            return Err(MazeError::Parameter(
                "sigma_electrolyte must exceed sigma_wall".into(),
            ));
        }
        if !p.sigma_coating.is_finite() {
            return Err(MazeError::Parameter("sigma_coating must be finite".into()));
        }
        if cells.contains(&CellKind::CoatedWall) && p.sigma_coating <= p.sigma_electrolyte {
            return Err(MazeError::Parameter(
                "sigma_coating must exceed sigma_electrolyte when coated walls exist".into(),
            ));
        }

        let mut owner: Vec<Option<usize>> = vec![None; nx * ny];
        for (k, e) in electrodes.iter().enumerate() {
            if e.cells.is_empty() {
                return Err(MazeError::EmptyElectrode(e.id.clone()));
            }
            for &(x, y) in &e.cells {
                if x >= nx || y >= ny {
                    return Err(MazeError::ElectrodeOutOfGrid {
                        id: e.id.clone(),
                        x,
                        y,
                    });
                }
                let i = y * nx + x;
                if !cells[i].is_channel() {
                    return Err(MazeError::ElectrodeOnWall {
                        id: e.id.clone(),
                        x,
                        y,
                    });
                }
                if let Some(other) = owner[i] {
                    return Err(MazeError::ElectrodeOverlap {
                        a: electrodes[other].id.clone(),
                        b: e.id.clone(),
                        x,
                        y,
                    });
                }
                owner[i] = Some(k);
            }
        }
        if !electrodes.iter().any(|e| e.polarity == Polarity::Positive) {
            return Err(MazeError::MissingElectrode(Polarity::Positive));
        }
        if !electrodes.iter().any(|e| e.polarity == Polarity::Negative) {
            return Err(MazeError::MissingElectrode(Polarity::Negative));
        }

        Ok(MazeSpec {
            nx,
            ny,
            cells,
            electrodes,
            physics,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_size_mm(&self) -> f64 {
        self.physics.cell_size_mm
    }

    pub fn physics(&self) -> &MazePhysics {
        &self.physics
    }

    pub fn applied_voltage(&self) -> f64 {
        self.physics.applied_voltage
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn electrodes(&self) -> &[Electrode] {
        &self.electrodes
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    #[inline]
    pub fn kind(&self, x: usize, y: usize) -> CellKind {
        self.cells[y * self.nx + x]
    }

    /// Kind at signed coordinates; everything outside the grid is wall.
    #[inline]
    pub fn kind_or_wall(&self, x: isize, y: isize) -> CellKind {
        if x < 0 || y < 0 || x as usize >= self.nx || y as usize >= self.ny {
            CellKind::Wall
        } else {
            self.kind(x as usize, y as usize)
        }
    }

    pub fn is_channel(&self, x: usize, y: usize) -> bool {
        self.kind(x, y).is_channel()
    }

    /// All cells of electrodes with the given polarity, row-major.
    pub fn electrode_cells(&self, polarity: Polarity) -> Vec<Cell> {
        let mut v: Vec<Cell> = self
            .electrodes
            .iter()
            .filter(|e| e.polarity == polarity)
            .flat_map(|e| e.cells.iter().copied())
            .collect();
        v.sort_by_key(|&(x, y)| (y, x));
        v
    }

    /// Per-cell polarity mask (`None` for non-electrode cells).
    pub fn polarity_map(&self) -> Vec<Option<Polarity>> {
        let mut m = vec![None; self.nx * self.ny];
        for e in &self.electrodes {
            for &(x, y) in &e.cells {
                m[y * self.nx + x] = Some(e.polarity);
            }
        }
        m
    }

    /// Centre of a cell in millimetres.
    pub fn cell_center_mm(&self, x: usize, y: usize) -> (f64, f64) {
        let h = self.cell_size_mm();
        ((x as f64 + 0.5) * h, (y as f64 + 0.5) * h)
    }

    /// Cell containing a point in millimetres, if it lies on the grid.
    pub fn cell_at_mm(&self, px: f64, py: f64) -> Option<Cell> {
        let h = self.cell_size_mm();
        if !(px >= 0.0 && py >= 0.0) {
            return None;
        }
        let (x, y) = ((px / h).floor() as usize, (py / h).floor() as usize);
        (x < self.nx && y < self.ny).then_some((x, y))
    }

    /// Copy with a different applied voltage.
    pub fn with_voltage(&self, volts: f64) -> Result<Self, MazeError> {
        let mut physics = self.physics;
        physics.applied_voltage = volts;
        MazeSpec::new(
            self.nx,
            self.ny,
            self.cells.clone(),
            self.electrodes.clone(),
            physics,
        )
    }

    /// Copy with different physical parameters.
    pub fn with_physics(&self, physics: MazePhysics) -> Result<Self, MazeError> {
        MazeSpec::new(
            self.nx,
            self.ny,
            self.cells.clone(),
            self.electrodes.clone(),
            physics,
        )
    }

    /// Same geometry with every wall cell at a convex wall corner turned into
    /// a coated wall cell.
    pub fn with_coated_corners(&self) -> Result<Self, MazeError> {
        let mut cells = self.cells.clone();
        for (x, y) in convex_corner_cells(self) {
            cells[y * self.nx + x] = CellKind::CoatedWall;
        }
        MazeSpec::new(
            self.nx,
            self.ny,
            cells,
            self.electrodes.clone(),
            self.physics,
        )
    }
}

/// Lattice vertices `(vx, vy)` (cell-corner coordinates, `0..=nx`, `0..=ny`)
/// where exactly one of the four surrounding cells is solid, i.e. the tip of
/// a wall protruding into the channel. Cells outside the grid count as solid.
pub fn convex_corner_vertices(maze: &MazeSpec) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for vy in 0..=maze.ny() {
        for vx in 0..=maze.nx() {
            let (x, y) = (vx as isize, vy as isize);
            let around = [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)];
            let solid = around
                .iter()
                .filter(|&&(a, b)| maze.kind_or_wall(a, b).is_solid())
                .count();
            if solid == 1 {
                out.push((vx, vy));
            }
        }
    }
    out
}

/// Wall cells owning a convex corner vertex, row-major, deduplicated.
pub fn convex_corner_cells(maze: &MazeSpec) -> Vec<Cell> {
    let mut set = BTreeSet::new();
    for (vx, vy) in convex_corner_vertices(maze) {
        let (x, y) = (vx as isize, vy as isize);
        for (a, b) in [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)] {
            if a >= 0
                && b >= 0
                && (a as usize) < maze.nx()
                && (b as usize) < maze.ny()
                && maze.kind(a as usize, b as usize).is_solid()
            {
                set.insert((b as usize, a as usize));
            }
        }
    }
    set.into_iter().map(|(y, x)| (x, y)).collect()
}

/// Connectivity of the channel cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectivityReport {
    /// Component id per cell, `None` for solid cells. Ids are assigned in
    /// row-major order of each component's first cell.
    pub component: Vec<Option<usize>>,
    pub component_count: usize,
    pub solvable: bool,
}

/// Labels 4-connected components of channel cells and reports whether some
/// positive and some negative electrode share a component.
pub fn validate_and_components(maze: &MazeSpec) -> ConnectivityReport {
    let (nx, ny) = (maze.nx(), maze.ny());
    let mut component = vec![None; nx * ny];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..nx * ny {
        if component[start].is_some() || !maze.cells()[start].is_channel() {
            continue;
        }
        component[start] = Some(count);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % nx, i / nx);
            for (a, b) in neighbors4(x, y, nx, ny) {
                let j = b * nx + a;
                if component[j].is_none() && maze.cells()[j].is_channel() {
                    component[j] = Some(count);
                    queue.push_back(j);
                }
            }
        }
        count += 1;
    }

    let comps_of = |p: Polarity| -> BTreeSet<usize> {
        maze.electrode_cells(p)
            .iter()
            .filter_map(|&(x, y)| component[y * nx + x])
            .collect()
    };
    let pos = comps_of(Polarity::Positive);
    let neg = comps_of(Polarity::Negative);
    let solvable = pos.intersection(&neg).next().is_some();

    ConnectivityReport {
        component,
        component_count: count,
        solvable,
    }
}

/// In-grid 4-neighbours in the fixed order E, N, W, S.
pub fn neighbors4(x: usize, y: usize, nx: usize, ny: usize) -> impl Iterator<Item = Cell> {
    let cand = [
        (x + 1 < nx).then(|| (x + 1, y)),
        (y > 0).then(|| (x, y.wrapping_sub(1))),
        (x > 0).then(|| (x.wrapping_sub(1), y)),
        (y + 1 < ny).then(|| (x, y + 1)),
    ];
    cand.into_iter().flatten()
}

/// Per-cell conductivity in S/m, row-major.
pub fn conductivity_grid(maze: &MazeSpec) -> Vec<f64> {
    let p = maze.physics();
    maze.cells()
        .iter()
        .map(|k| match k {
            CellKind::Channel => p.sigma_electrolyte,
            CellKind::Wall => p.sigma_wall,
            CellKind::CoatedWall => p.sigma_coating,
        })
        .collect()
}

/// Estimated corridor width in cells: the most frequent length of maximal
/// straight channel runs, counting rows and columns. Ties go to the shorter
/// run.
pub fn estimate_channel_width_cells(maze: &MazeSpec) -> usize {
    let mut hist = std::collections::BTreeMap::<usize, usize>::new();
    let (nx, ny) = (maze.nx(), maze.ny());
    for y in 0..ny {
        let mut run = 0;
        for x in 0..=nx {
            if x < nx && maze.is_channel(x, y) {
                run += 1;
            } else if run > 0 {
                *hist.entry(run).or_default() += 1;
                run = 0;
            }
        }
    }
    for x in 0..nx {
        let mut run = 0;
        for y in 0..=ny {
            if y < ny && maze.is_channel(x, y) {
                run += 1;
            } else if run > 0 {
                *hist.entry(run).or_default() += 1;
                run = 0;
            }
        }
    }
    hist.iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&len, _)| len)
        .unwrap_or(1)
}
