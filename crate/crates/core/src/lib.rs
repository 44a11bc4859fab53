//! Electrolyte maze simulator.
//!
//! The pipeline solves the electric potential in an electrolyte-filled maze,
//! derives current density and the fields built from it, drives a rigid
//! disk along the disk-integrated current, and checks the resulting path
//! against Lee wavefront labels.
//!
//! ```no_run
//! use dropmaze::{dynamics, field, maze, oracle};
//!
//! let m = maze::generate_ring_maze(&maze::RingMazeParams::new(3, 70.0, 4.0, 7)).unwrap();
//! let fields = field::solve_fields(&m, &field::SolverSettings::for_maze(&m)).unwrap();
//! let params = dynamics::DynamicsParams::default();
//! let traj = dynamics::simulate(&m, &fields, &params).unwrap();
//! let labels = oracle::lee_label(&m, &m.electrode_cells(maze::Polarity::Negative)).unwrap();
//! let path = oracle::extract_path(&labels, traj.start_cell, m.cell_size_mm()).unwrap();
//! let cmp = oracle::compare_trajectory(&traj, &path, &m);
//! println!("{:?} {}", traj.termination, cmp.corridor_sequence_equal);
//! ```

// float checks are written `!(x > 0.0)` on purpose so NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod field;
pub mod io;
pub mod maze;
pub mod numeric;
pub mod oracle;
pub mod scenario;

pub use error::{DynamicsError, FieldError, HarnessError, MazeError, OracleError};
