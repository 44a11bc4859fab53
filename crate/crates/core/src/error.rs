use std::path::PathBuf;

use thiserror::Error;

use crate::maze::Polarity;

#[derive(Debug, Error, PartialEq)]
pub enum MazeError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing required parameter `{0}`")]
    MissingParameter(&'static str),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("maze grid is empty")]
    EmptyGrid,
    #[error("grid has {got} cells, expected {expected}")]
    GridSize { expected: usize, got: usize },
    #[error("electrode {0} has no cells")]
    EmptyElectrode(String),
    #[error("electrode {id} cell ({x}, {y}) lies outside the grid")]
    ElectrodeOutOfGrid { id: String, x: usize, y: usize },
    #[error("electrode {id} cell ({x}, {y}) is not a channel cell")]
    ElectrodeOnWall { id: String, x: usize, y: usize },
    #[error("electrodes {a} and {b} share cell ({x}, {y})")]
    ElectrodeOverlap {
        a: String,
        b: String,
        x: usize,
        y: usize,
    },
    #[error("no {} electrode", match .0 { Polarity::Positive => "positive", Polarity::Negative => "negative" })]
    MissingElectrode(Polarity),
    #[error("infeasible geometry: {0}")]
    Infeasible(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("conductivity must be finite and non-negative (cell {0})")]
    BadConductivity(usize),
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("positive and negative electrodes are not connected through conducting cells")]
    Disconnected,
    #[error("field is empty")]
    Empty,
    #[error("field contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("disk at ({x:.3}, {y:.3}) mm does not intersect the grid")]
    DiskOutsideGrid { x: f64, y: f64 },
    #[error("no channel cell can hold a droplet of radius {radius_mm} mm")]
    NoStartPosition { radius_mm: f64 },
    #[error("invalid dynamics parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("destination set is empty")]
    EmptyDestination,
    #[error("destination cell ({0}, {1}) is not a channel cell")]
    DestinationOnWall(usize, usize),
    #[error("source cell ({0}, {1}) cannot reach the destination")]
    Unreachable(usize, usize),
    #[error("streamline start ({x:.3}, {y:.3}) mm lies inside a wall or off the grid")]
    StartInWall { x: f64, y: f64 },
}

/// Errors from file readers, writers and the scenario harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Maze(#[from] MazeError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("maze is not solvable: no channel path joins the electrodes")]
    Unsolvable,
    #[error("solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}
