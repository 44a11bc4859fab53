use serde::Serialize;

use crate::error::OracleError;
use crate::field::VectorField;
use crate::maze::{MazeSpec, Polarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StreamlineEnd {
    ReachedTarget,
    /// The field, after removing components that point into walls, is zero.
    FieldVanished,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Streamline {
    pub points: Vec<(f64, f64)>,
    pub end: StreamlineEnd,
}

impl Streamline {
    pub fn length_mm(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .sum()
    }
}

/// Trace a field line of `field` from `start` (mm) with fixed step length,
/// sliding along walls it runs into.
pub fn streamline(
    field: &VectorField,
    maze: &MazeSpec,
    start: (f64, f64),
    step_mm: f64,
    max_steps: usize,
) -> Result<Streamline, OracleError> {
    let in_channel = |p: (f64, f64)| {
        maze.cell_at_mm(p.0, p.1)
            .filter(|&(x, y)| maze.is_channel(x, y))
    };
    let Some(_) = in_channel(start) else {
        return Err(OracleError::StartInWall {
            x: start.0,
            y: start.1,
        });
    };
    let polarity = maze.polarity_map();
    let peak = (0..field.nx * field.ny)
        .map(|i| field.magnitude(i))
        .fold(0.0, f64::max);
    let eps = 1e-9 * peak;
    let mut points = vec![start];
    let mut p = start;
    for _ in 0..max_steps {
        let (cx, cy) = in_channel(p).expect("streamline stays in channel cells");
        if polarity[maze.index(cx, cy)] == Some(Polarity::Negative) {
            return Ok(Streamline {
                points,
                end: StreamlineEnd::ReachedTarget,
            });
        }
        let (mut vx, mut vy) = field.sample_bilinear(p.0, p.1);
        let mut next = None;
        for _ in 0..3 {
            let m = vx.hypot(vy);
            if m <= eps {
                break;
            }
            let q = (p.0 + step_mm * vx / m, p.1 + step_mm * vy / m);
            if in_channel(q).is_some() {
                next = Some(q);
                break;
            }
            // Drop whichever component carries the step into a solid cell.
            let blocked_x = in_channel((q.0, p.1)).is_none();
            let blocked_y = in_channel((p.0, q.1)).is_none();
            match (blocked_x, blocked_y) {
                (true, true) => (vx, vy) = (0.0, 0.0),
                (true, false) => vx = 0.0,
                (false, true) => vy = 0.0,
                // Diagonal corner: keep the dominant direction.
                (false, false) if vx.abs() >= vy.abs() => vy = 0.0,
                (false, false) => vx = 0.0,
            }
        }
        match next {
            Some(q) => {
                p = q;
                points.push(p);
            }
            None => {
                return Ok(Streamline {
                    points,
                    end: StreamlineEnd::FieldVanished,
                })
            }
        }
    }
    Ok(Streamline {
        points,
        end: StreamlineEnd::MaxSteps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorQuantity;
    use crate::maze::parse_maze;

    #[test]
    fn uniform_field_reaches_target() {
        let m = parse_maze("S......T").unwrap();
        let f = VectorField::uniform(8, 1, 0.5, VectorQuantity::CurrentDensity, (1.0, 0.0));
        let s = streamline(&f, &m, (0.25, 0.25), 0.1, 1000).unwrap();
        assert_eq!(s.end, StreamlineEnd::ReachedTarget);
        assert!(s.points.last().unwrap().0 >= 3.5);
    }

    #[test]
    fn head_on_wall_vanishes() {
        let m = parse_maze("S..#T").unwrap();
        let f = VectorField::uniform(5, 1, 0.5, VectorQuantity::CurrentDensity, (1.0, 0.0));
        let s = streamline(&f, &m, (0.25, 0.25), 0.1, 1000).unwrap();
        assert_eq!(s.end, StreamlineEnd::FieldVanished);
    }

    #[test]
    fn slides_along_wall() {
        let m = parse_maze("S..#\n...#\n...T\n").unwrap();
        let f = VectorField::uniform(4, 3, 1.0, VectorQuantity::CurrentDensity, (1.0, 1.0));
        let s = streamline(&f, &m, (0.5, 0.5), 0.2, 1000).unwrap();
        assert_eq!(s.end, StreamlineEnd::ReachedTarget);
    }

    #[test]
    fn zero_field_and_bad_start() {
        let m = parse_maze("S.#T\n....\n").unwrap();
        let f = VectorField::uniform(4, 2, 1.0, VectorQuantity::CurrentDensity, (0.0, 0.0));
        assert_eq!(
            streamline(&f, &m, (0.5, 0.5), 0.1, 10).unwrap().end,
            StreamlineEnd::FieldVanished
        );
        assert!(matches!(
            streamline(&f, &m, (2.5, 0.5), 0.1, 10),
            Err(OracleError::StartInWall { .. })
        ));
        assert!(matches!(
            streamline(&f, &m, (-1.0, 0.5), 0.1, 10),
            Err(OracleError::StartInWall { .. })
        ));
    }
}
