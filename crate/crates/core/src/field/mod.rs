//! Grid fields and the potential solve.
//!
//! Units: potential in V, current density in A/m^2, Joule power density in
//! W/m^3, divergence in A/m^3. Face fluxes and electrode currents are per
//! unit sheet depth (A/m). Row 0 is the top of the maze and `+y` points down.

mod derived;
mod solver;

pub use derived::{
    conservation, current_density, grad_speed_of_j, joule_heating, speed_of_j, ConservationReport,
};
pub use solver::{solve_potential, SolveReport, SolverSettings};

use serde::Serialize;

use crate::error::FieldError;
use crate::maze::{conductivity_grid, MazeSpec, Polarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScalarQuantity {
    Potential,
    JoulePower,
    SpeedOfJ,
    Divergence,
    Conductivity,
}

impl ScalarQuantity {
    pub fn unit(self) -> &'static str {
        match self {
            ScalarQuantity::Potential => "V",
            ScalarQuantity::JoulePower => "W/m^3",
            ScalarQuantity::SpeedOfJ => "A/m^2",
            ScalarQuantity::Divergence => "A/m^3",
            ScalarQuantity::Conductivity => "S/m",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VectorQuantity {
    CurrentDensity,
    GradSpeedOfJ,
}

impl VectorQuantity {
    pub fn unit(self) -> &'static str {
        match self {
            VectorQuantity::CurrentDensity => "A/m^2",
            VectorQuantity::GradSpeedOfJ => "A/m^3",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub cell_size_mm: f64,
    pub quantity: ScalarQuantity,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(
        nx: usize,
        ny: usize,
        cell_size_mm: f64,
        quantity: ScalarQuantity,
        values: Vec<f64>,
    ) -> Result<Self, FieldError> {
        if nx == 0 || ny == 0 {
            return Err(FieldError::Empty);
        }
        if values.len() != nx * ny {
            return Err(FieldError::DimensionMismatch {
                expected: (nx, ny),
                got: (values.len(), 1),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(ScalarField {
            nx,
            ny,
            cell_size_mm,
            quantity,
            values,
        })
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.nx + x]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }
}

/// Net flux per unit depth (A/m) across the east and south face of every
/// cell, positive when charge leaves the cell through that face. Faces on
/// the grid boundary carry zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceFluxes {
    pub east: Vec<f64>,
    pub south: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub nx: usize,
    pub ny: usize,
    pub cell_size_mm: f64,
    pub quantity: VectorQuantity,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Finite-volume face fluxes the cell vectors were reconstructed from,
    /// when available.
    pub faces: Option<FaceFluxes>,
}

impl VectorField {
    pub fn new(
        nx: usize,
        ny: usize,
        cell_size_mm: f64,
        quantity: VectorQuantity,
        x: Vec<f64>,
        y: Vec<f64>,
    ) -> Result<Self, FieldError> {
        if nx == 0 || ny == 0 {
            return Err(FieldError::Empty);
        }
        if x.len() != nx * ny || y.len() != nx * ny {
            return Err(FieldError::DimensionMismatch {
                expected: (nx, ny),
                got: (x.len(), y.len()),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(VectorField {
            nx,
            ny,
            cell_size_mm,
            quantity,
            x,
            y,
            faces: None,
        })
    }

    /// Uniform field, mainly for tests.
    pub fn uniform(
        nx: usize,
        ny: usize,
        cell_size_mm: f64,
        quantity: VectorQuantity,
        v: (f64, f64),
    ) -> Self {
        VectorField {
            nx,
            ny,
            cell_size_mm,
            quantity,
            x: vec![v.0; nx * ny],
            y: vec![v.1; nx * ny],
            faces: None,
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.nx + x;
        (self.x[i], self.y[i])
    }

    pub fn magnitude(&self, i: usize) -> f64 {
        self.x[i].hypot(self.y[i])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Bilinear interpolation between cell centres at a point in mm. Points
    /// beyond the outer cell centres are clamped to the edge.
    pub fn sample_bilinear(&self, px: f64, py: f64) -> (f64, f64) {
        let h = self.cell_size_mm;
        let fx = (px / h - 0.5).clamp(0.0, (self.nx - 1) as f64);
        let fy = (py / h - 0.5).clamp(0.0, (self.ny - 1) as f64);
        let x0 = (fx.floor() as usize).min(self.nx.saturating_sub(2));
        let y0 = (fy.floor() as usize).min(self.ny.saturating_sub(2));
        let x1 = (x0 + 1).min(self.nx - 1);
        let y1 = (y0 + 1).min(self.ny - 1);
        let tx = fx - x0 as f64;
        let ty = fy - y0 as f64;
        let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
        let comp = |v: &[f64]| {
            let top = lerp(v[y0 * self.nx + x0], v[y0 * self.nx + x1], tx);
            let bot = lerp(v[y1 * self.nx + x0], v[y1 * self.nx + x1], tx);
            lerp(top, bot, ty)
        };
        (comp(&self.x), comp(&self.y))
    }
}

/// Cells held at fixed potential: positive cells at `voltage`, negative at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectrodeSet {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    pub voltage: f64,
}

impl ElectrodeSet {
    pub fn from_maze(maze: &MazeSpec) -> Self {
        let idx = |p| {
            maze.electrode_cells(p)
                .iter()
                .map(|&(x, y)| maze.index(x, y))
                .collect()
        };
        ElectrodeSet {
            positive: idx(Polarity::Positive),
            negative: idx(Polarity::Negative),
            voltage: maze.applied_voltage(),
        }
    }

    pub fn polarity_of(&self, n: usize) -> Vec<Option<Polarity>> {
        let mut m = vec![None; n];
        for &i in &self.positive {
            m[i] = Some(Polarity::Positive);
        }
        for &i in &self.negative {
            m[i] = Some(Polarity::Negative);
        }
        m
    }
}

/// Per-cell conductivity with its grid geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Conductivity {
    pub nx: usize,
    pub ny: usize,
    pub cell_size_mm: f64,
    pub values: Vec<f64>,
}

impl Conductivity {
    pub fn from_maze(maze: &MazeSpec) -> Self {
        Conductivity {
            nx: maze.nx(),
            ny: maze.ny(),
            cell_size_mm: maze.cell_size_mm(),
            values: conductivity_grid(maze),
        }
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            cell_size_mm: self.cell_size_mm,
            quantity: ScalarQuantity::Conductivity,
            values: self.values.clone(),
        }
    }
}

/// Everything derived from one potential solve.
#[derive(Clone, Debug)]
pub struct FieldSet {
    pub sigma: Conductivity,
    pub electrodes: ElectrodeSet,
    pub potential: ScalarField,
    pub report: SolveReport,
    pub current: VectorField,
    pub joule: ScalarField,
    pub grad_speed: VectorField,
}

/// Solve the potential for a maze and derive the current-density, Joule and
/// grad-|J| fields.
pub fn solve_fields(maze: &MazeSpec, settings: &SolverSettings) -> Result<FieldSet, FieldError> {
    let sigma = Conductivity::from_maze(maze);
    let electrodes = ElectrodeSet::from_maze(maze);
    let (potential, report) = solve_potential(&sigma, &electrodes, settings)?;
    let current = current_density(&potential, &sigma)?;
    let joule = joule_heating(&current, &sigma)?;
    let grad_speed = grad_speed_of_j(&current, &sigma)?;
    Ok(FieldSet {
        sigma,
        electrodes,
        potential,
        report,
        current,
        joule,
        grad_speed,
    })
}
