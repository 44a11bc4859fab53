use std::collections::VecDeque;

use serde::Serialize;

use crate::error::OracleError;
use crate::maze::{neighbors4, Cell, MazeSpec};

/// Wavefront distance (in cells) from every channel cell to the destination set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeeLabels {
    pub nx: usize,
    pub ny: usize,
    pub labels: Vec<Option<u32>>,
    pub destination: Vec<Cell>,
}

impl LeeLabels {
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<u32> {
        self.labels[y * self.nx + x]
    }
}

/// Breadth-first wavefront from `destination` over 4-connected channel cells.
pub fn lee_label(maze: &MazeSpec, destination: &[Cell]) -> Result<LeeLabels, OracleError> {
    if destination.is_empty() {
        return Err(OracleError::EmptyDestination);
    }
    let (nx, ny) = (maze.nx(), maze.ny());
    let mut labels = vec![None; nx * ny];
    let mut queue = VecDeque::new();
    for &(x, y) in destination {
        if x >= nx || y >= ny || !maze.is_channel(x, y) {
            return Err(OracleError::DestinationOnWall(x, y));
        }
        if labels[y * nx + x].is_none() {
            labels[y * nx + x] = Some(0);
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let next = labels[y * nx + x].unwrap() + 1;
        for (a, b) in neighbors4(x, y, nx, ny) {
            let j = b * nx + a;
            if labels[j].is_none() && maze.is_channel(a, b) {
                labels[j] = Some(next);
                queue.push_back((a, b));
            }
        }
    }
    Ok(LeeLabels {
        nx,
        ny,
        labels,
        destination: destination.to_vec(),
    })
}

/// Cell path with 4-adjacent consecutive cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub cell_size_mm: f64,
}

impl Path {
    /// Number of moves between cells.
    pub fn length_cells(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn length_mm(&self) -> f64 {
        self.length_cells() as f64 * self.cell_size_mm
    }

    pub fn centers_mm(&self) -> Vec<(f64, f64)> {
        let h = self.cell_size_mm;
        self.cells
            .iter()
            .map(|&(x, y)| ((x as f64 + 0.5) * h, (y as f64 + 0.5) * h))
            .collect()
    }
}

/// Descend the labels from `source` to a zero-labelled cell, taking the
/// first lower neighbour in the order E, N, W, S.
pub fn extract_path(
    labels: &LeeLabels,
    source: Cell,
    cell_size_mm: f64,
) -> Result<Path, OracleError> {
    let (sx, sy) = source;
    if sx >= labels.nx || sy >= labels.ny {
        return Err(OracleError::Unreachable(sx, sy));
    }
    let mut current = labels.get(sx, sy).ok_or(OracleError::Unreachable(sx, sy))?;
    let mut cells = vec![source];
    let (mut x, mut y) = source;
    while current > 0 {
        let (a, b) = neighbors4(x, y, labels.nx, labels.ny)
            .find(|&(a, b)| labels.get(a, b) == Some(current - 1))
            .expect("labelled cell always has a lower neighbour");
        cells.push((a, b));
        (x, y) = (a, b);
        current -= 1;
    }
    Ok(Path {
        cells,
        cell_size_mm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::parse_maze;

    #[test]
    fn corridor_labels_count_down() {
        let m = parse_maze("S...T").unwrap();
        let l = lee_label(&m, &[(4, 0)]).unwrap();
        let got: Vec<_> = (0..5).map(|x| l.get(x, 0)).collect();
        assert_eq!(got, vec![Some(4), Some(3), Some(2), Some(1), Some(0)]);
        let p = extract_path(&l, (0, 0), 1.0).unwrap();
        assert_eq!(p.cells.len(), 5);
        assert_eq!(p.length_cells(), 4);
    }

    #[test]
    fn sealed_cell_is_unlabelled() {
        let m = parse_maze("S.#.\n..#T\n").unwrap();
        let l = lee_label(&m, &[(3, 1)]).unwrap();
        assert_eq!(l.get(0, 0), None);
        assert_eq!(l.get(2, 0), None);
        assert_eq!(
            extract_path(&l, (0, 0), 1.0).unwrap_err(),
            OracleError::Unreachable(0, 0)
        );
    }

    #[test]
    fn destination_errors() {
        let m = parse_maze("S#T").unwrap();
        assert_eq!(
            lee_label(&m, &[]).unwrap_err(),
            OracleError::EmptyDestination
        );
        assert_eq!(
            lee_label(&m, &[(1, 0)]).unwrap_err(),
            OracleError::DestinationOnWall(1, 0)
        );
    }

    #[test]
    fn tie_break_prefers_east_then_north() {
        let m = parse_maze("...\n.S.\n..T\n").unwrap();
        let l = lee_label(&m, &[(2, 2)]).unwrap();
        let p = extract_path(&l, (0, 0), 1.0).unwrap();
        assert_eq!(p.cells, vec![(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]);
    }
}
