use serde::Serialize;

use crate::maze::{estimate_channel_width_cells, neighbors4, Cell, MazeSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CorridorKind {
    Horizontal,
    Vertical,
    /// Junctions, corners and open chambers.
    Junction,
}

/// Channel cells grouped into straight corridors and the junctions between them.
#[derive(Clone, Debug, PartialEq)]
pub struct Corridors {
    pub nx: usize,
    pub ny: usize,
    pub width_cells: usize,
    /// Segment id per cell, `None` for solid cells.
    pub segment: Vec<Option<usize>>,
    pub kinds: Vec<CorridorKind>,
}

fn run_lengths(maze: &MazeSpec) -> (Vec<usize>, Vec<usize>) {
    let (nx, ny) = (maze.nx(), maze.ny());
    let mut hrun = vec![0; nx * ny];
    let mut vrun = vec![0; nx * ny];
    for y in 0..ny {
        let mut x = 0;
        while x < nx {
            if !maze.is_channel(x, y) {
                x += 1;
                continue;
            }
            let s = x;
            while x < nx && maze.is_channel(x, y) {
                x += 1;
            }
            for i in s..x {
                hrun[y * nx + i] = x - s;
            }
        }
    }
    for x in 0..nx {
        let mut y = 0;
        while y < ny {
            if !maze.is_channel(x, y) {
                y += 1;
                continue;
            }
            let s = y;
            while y < ny && maze.is_channel(x, y) {
                y += 1;
            }
            for j in s..y {
                vrun[j * nx + x] = y - s;
            }
        }
    }
    (hrun, vrun)
}

/// Classify each channel cell by the lengths of the straight runs through
/// it: a short vertical run and a long horizontal one make a horizontal
/// corridor, and so on. Connected cells of one class form a segment.
pub fn segment_corridors(maze: &MazeSpec) -> Corridors {
    let (nx, ny) = (maze.nx(), maze.ny());
    let w = estimate_channel_width_cells(maze).max(1);
    let wmax = w + w.div_ceil(4);
    let (hrun, vrun) = run_lengths(maze);
    let class: Vec<Option<CorridorKind>> = (0..nx * ny)
        .map(|i| {
            if !maze.cells()[i].is_channel() {
                None
            } else if vrun[i] <= wmax && hrun[i] > wmax {
                Some(CorridorKind::Horizontal)
            } else if hrun[i] <= wmax && vrun[i] > wmax {
                Some(CorridorKind::Vertical)
            } else {
                Some(CorridorKind::Junction)
            }
        })
        .collect();

    let mut segment = vec![None; nx * ny];
    let mut kinds = Vec::new();
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        let Some(kind) = class[start] else { continue };
        if segment[start].is_some() {
            continue;
        }
        let id = kinds.len();
        kinds.push(kind);
        segment[start] = Some(id);
        stack.push((start % nx, start / nx));
        while let Some((x, y)) = stack.pop() {
            for (a, b) in neighbors4(x, y, nx, ny) {
                let j = b * nx + a;
                if segment[j].is_none() && class[j] == Some(kind) {
                    segment[j] = Some(id);
                    stack.push((a, b));
                }
            }
        }
    }
    Corridors {
        nx,
        ny,
        width_cells: w,
        segment,
        kinds,
    }
}

impl Corridors {
    #[inline]
    pub fn segment_of(&self, (x, y): Cell) -> Option<usize> {
        if x < self.nx && y < self.ny {
            self.segment[y * self.nx + x]
        } else {
            None
        }
    }

    /// Ordered list of segments visited by a cell sequence, with repeats
    /// collapsed and out-and-back excursions removed.
    pub fn sequence(&self, cells: impl IntoIterator<Item = Cell>) -> Vec<usize> {
        let mut seq: Vec<usize> = Vec::new();
        for c in cells {
            let Some(id) = self.segment_of(c) else {
                continue;
            };
            if seq.last() == Some(&id) {
                continue;
            }
            if seq.len() >= 2 && seq[seq.len() - 2] == id {
                seq.pop();
                continue;
            }
            seq.push(id);
        }
        seq
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::parse_maze;

    const ELL: &str = "\
##########
#S.......#
#S.......#
#######..#
#######..#
#######..#
#######TT#
##########
";

    #[test]
    fn ell_has_two_corridors_and_a_corner() {
        let m = parse_maze(ELL).unwrap();
        let c = segment_corridors(&m);
        assert_eq!(c.width_cells, 2);
        let h = c.segment_of((3, 1)).unwrap();
        let v = c.segment_of((7, 4)).unwrap();
        let corner = c.segment_of((8, 1)).unwrap();
        assert_eq!(c.kinds[h], CorridorKind::Horizontal);
        assert_eq!(c.kinds[v], CorridorKind::Vertical);
        assert_eq!(c.kinds[corner], CorridorKind::Junction);
        assert_eq!(c.segment_of((0, 0)), None);
        let path = [
            (2, 1),
            (3, 1),
            (4, 1),
            (5, 1),
            (6, 1),
            (7, 1),
            (7, 2),
            (7, 3),
            (7, 4),
            (7, 5),
        ];
        assert_eq!(c.sequence(path), vec![h, corner, v]);
    }

    #[test]
    fn excursions_are_removed() {
        let m = parse_maze(ELL).unwrap();
        let c = segment_corridors(&m);
        let h = c.segment_of((3, 1)).unwrap();
        let corner = c.segment_of((8, 1)).unwrap();
        let v = c.segment_of((7, 4)).unwrap();
        let wander = [(3, 1), (7, 1), (3, 1), (7, 1), (7, 4), (7, 1), (7, 4)];
        assert_eq!(c.sequence(wander), vec![h, corner, v]);
    }
}
