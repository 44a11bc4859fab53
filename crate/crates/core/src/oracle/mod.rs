//! Reference solutions the droplet is checked against: Lee wavefront
//! shortest paths, field-line tracing, corridor segmentation and path
//! comparison metrics.

mod compare;
mod corridor;
mod lee;
mod streamline;

pub use compare::{
    cells_of_points, compare_trajectory, compare_with_corridors, coverage, distance_to_polyline,
    path_overlap, ridge_path, ComparisonMetrics,
};
pub use corridor::{segment_corridors, CorridorKind, Corridors};
pub use lee::{extract_path, lee_label, LeeLabels, Path};
pub use streamline::{streamline, Streamline, StreamlineEnd};
