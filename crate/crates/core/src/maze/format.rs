//! Text maze format.
//!
//! ```text
//! cell_size_mm = 0.5
//! sigma_electrolyte = 10
//! sigma_wall = 0
//! sigma_coating = 10000
//! voltage = 5
//!
//! #######
//! #S...T#
//! #######
//! ```
//!
//! The header is optional; when it is present all five keys are required.
//! Glyphs: `#` wall, `+` coated wall, `.` channel, `S` positive electrode,
//! `T` negative electrode. All `S` cells form electrode `E1`, all `T` cells
//! form `E2`.

use std::fmt::Write as _;

use super::{CellKind, Electrode, MazePhysics, MazeSpec, Polarity};
use crate::error::MazeError;

const KEYS: [&str; 5] = [
    "cell_size_mm",
    "sigma_electrolyte",
    "sigma_wall",
    "sigma_coating",
    "voltage",
];

fn syntax(line: usize, column: usize, message: impl Into<String>) -> MazeError {
    MazeError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_maze(text: &str) -> Result<MazeSpec, MazeError> {
    let lines: Vec<&str> = text
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    for (n, l) in lines.iter().enumerate() {
        if let Some(col) = l.chars().position(|c| c == '\t') {
            return Err(syntax(n + 1, col + 1, "tab characters are not allowed"));
        }
    }

    let mut cursor = 0;
    let mut physics = MazePhysics::default();
    let has_header = lines.first().is_some_and(|l| l.contains('='));
    if has_header {
        let mut values: [Option<f64>; 5] = [None; 5];
        while cursor < lines.len() && !lines[cursor].trim().is_empty() {
            let line = lines[cursor];
            let Some((key, value)) = line.split_once('=') else {
                return Err(syntax(
                    cursor + 1,
                    1,
                    "expected `key = value` or a blank line",
                ));
            };
            let key = key.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| syntax(cursor + 1, 1, format!("unknown key `{key}`")))?;
            if values[slot].is_some() {
                return Err(syntax(cursor + 1, 1, format!("duplicate key `{key}`")));
            }
            let value_col = line.find('=').unwrap_or(0) + 2;
            let v: f64 = value.trim().parse().map_err(|_| {
                syntax(
                    cursor + 1,
                    value_col,
                    format!("`{}` is not a number", value.trim()),
                )
            })?;
            if !v.is_finite() {
                return Err(syntax(cursor + 1, value_col, "value must be finite"));
            }
            values[slot] = Some(v);
            cursor += 1;
        }
        for (k, v) in KEYS.iter().zip(values.iter()) {
            if v.is_none() {
                return Err(MazeError::MissingParameter(k));
            }
        }
        physics = MazePhysics {
            cell_size_mm: values[0].unwrap(),
            sigma_electrolyte: values[1].unwrap(),
            sigma_wall: values[2].unwrap(),
            sigma_coating: values[3].unwrap(),
            applied_voltage: values[4].unwrap(),
        };
        if cursor >= lines.len() {
            return Err(syntax(
                cursor,
                1,
                "missing blank line and grid after header",
            ));
        }
        // exactly one separator line
        cursor += 1;
    }

    let mut end = lines.len();
    while end > cursor && lines[end - 1].is_empty() {
        end -= 1;
    }
    if end == cursor {
        return Err(MazeError::EmptyGrid);
    }

    let first_line = cursor + 1;
    let nx = lines[cursor].chars().count();
    let ny = end - cursor;
    let mut cells = Vec::with_capacity(nx * ny);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (row, line) in lines[cursor..end].iter().enumerate() {
        let len = line.chars().count();
        if len != nx {
            return Err(syntax(
                first_line + row,
                len.min(nx) + 1,
                format!("grid row has {len} glyphs, expected {nx}"),
            ));
        }
        for (col, ch) in line.chars().enumerate() {
            let kind = match ch {
                '#' => CellKind::Wall,
                '+' => CellKind::CoatedWall,
                '.' => CellKind::Channel,
                'S' => {
                    pos.push((col, row));
                    CellKind::Channel
                }
                'T' => {
                    neg.push((col, row));
                    CellKind::Channel
                }
                other => {
                    return Err(syntax(
                        first_line + row,
                        col + 1,
                        format!("unknown glyph `{other}`"),
                    ))
                }
            };
            cells.push(kind);
        }
    }
    if nx == 0 {
        return Err(MazeError::EmptyGrid);
    }
    if pos.is_empty() {
        return Err(MazeError::MissingElectrode(Polarity::Positive));
    }
    if neg.is_empty() {
        return Err(MazeError::MissingElectrode(Polarity::Negative));
    }
    let electrodes = vec![
        Electrode::new("E1", Polarity::Positive, pos),
        Electrode::new("E2", Polarity::Negative, neg),
    ];
    MazeSpec::new(nx, ny, cells, electrodes, physics)
}

/// Canonical text form. Electrodes are written by polarity only, so a spec
/// with several electrodes of one polarity comes back with them merged.
pub fn emit_maze(maze: &MazeSpec) -> String {
    let p = maze.physics();
    let mut out = String::new();
    let _ = writeln!(out, "cell_size_mm = {}", p.cell_size_mm);
    let _ = writeln!(out, "sigma_electrolyte = {}", p.sigma_electrolyte);
    let _ = writeln!(out, "sigma_wall = {}", p.sigma_wall);
    let _ = writeln!(out, "sigma_coating = {}", p.sigma_coating);
    let _ = writeln!(out, "voltage = {}", p.applied_voltage);
    out.push('\n');
    let polarity = maze.polarity_map();
    for y in 0..maze.ny() {
        for x in 0..maze.nx() {
            let i = maze.index(x, y);
            out.push(match (maze.cells()[i], polarity[i]) {
                (_, Some(Polarity::Positive)) => 'S',
                (_, Some(Polarity::Negative)) => 'T',
                (CellKind::Channel, None) => '.',
                (CellKind::Wall, None) => '#',
                (CellKind::CoatedWall, None) => '+',
            });
        }
        out.push('\n');
    }
    out
}
