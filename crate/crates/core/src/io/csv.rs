use std::io::Write;

use crate::dynamics::Trajectory;
use crate::error::HarnessError;
use crate::field::{ScalarField, ScalarQuantity, VectorField, VectorQuantity};
use crate::oracle::Path;

/// Value column names, with units, for each scalar quantity.
pub fn scalar_column(q: ScalarQuantity) -> &'static str {
    match q {
        ScalarQuantity::Potential => "phi_V",
        ScalarQuantity::JoulePower => "joule_W_m3",
        ScalarQuantity::SpeedOfJ => "j_speed_A_m2",
        ScalarQuantity::Divergence => "div_A_m3",
        ScalarQuantity::Conductivity => "sigma_S_m",
    }
}

pub fn vector_columns(q: VectorQuantity) -> [&'static str; 2] {
    match q {
        VectorQuantity::CurrentDensity => ["jx_A_m2", "jy_A_m2"],
        VectorQuantity::GradSpeedOfJ => ["gx_A_m3", "gy_A_m3"],
    }
}

const SCALARS: [ScalarQuantity; 5] = [
    ScalarQuantity::Potential,
    ScalarQuantity::JoulePower,
    ScalarQuantity::SpeedOfJ,
    ScalarQuantity::Divergence,
    ScalarQuantity::Conductivity,
];
const VECTORS: [VectorQuantity; 2] = [VectorQuantity::CurrentDensity, VectorQuantity::GradSpeedOfJ];

fn csv_err(e: csv::Error) -> HarnessError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    HarnessError::Csv {
        line,
        message: e.to_string(),
    }
}

fn write_rows<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::Csv {
        line: 0,
        message: e.to_string(),
    })
}

fn centre(i: usize, h: f64) -> String {
    format!("{}", (i as f64 + 0.5) * h)
}

/// One row per cell, row-major from the top: `x_mm,y_mm,<value>`.
pub fn write_scalar_csv<W: Write>(f: &ScalarField, out: W) -> Result<(), HarnessError> {
    let h = f.cell_size_mm;
    let rows = (0..f.nx * f.ny).map(|i| {
        vec![
            centre(i % f.nx, h),
            centre(i / f.nx, h),
            format!("{:e}", f.values[i]),
        ]
    });
    write_rows(out, &["x_mm", "y_mm", scalar_column(f.quantity)], rows)
}

/// One row per cell, row-major from the top: `x_mm,y_mm,<vx>,<vy>`.
pub fn write_vector_csv<W: Write>(f: &VectorField, out: W) -> Result<(), HarnessError> {
    let h = f.cell_size_mm;
    let [cx, cy] = vector_columns(f.quantity);
    let rows = (0..f.nx * f.ny).map(|i| {
        vec![
            centre(i % f.nx, h),
            centre(i / f.nx, h),
            format!("{:e}", f.x[i]),
            format!("{:e}", f.y[i]),
        ]
    });
    write_rows(out, &["x_mm", "y_mm", cx, cy], rows)
}

pub fn write_trajectory_csv<W: Write>(t: &Trajectory, out: W) -> Result<(), HarnessError> {
    let rows = t.samples.iter().map(|s| {
        vec![
            format!("{:e}", s.t),
            format!("{}", s.x),
            format!("{}", s.y),
            format!("{:e}", s.speed),
            format!("{:e}", s.force),
        ]
    });
    write_rows(
        out,
        &["t_s", "x_mm", "y_mm", "speed_mm_s", "force_mag"],
        rows,
    )
}

pub fn write_path_csv<W: Write>(p: &Path, out: W) -> Result<(), HarnessError> {
    let h = p.cell_size_mm;
    let rows = p.cells.iter().enumerate().map(|(k, &(x, y))| {
        vec![
            k.to_string(),
            x.to_string(),
            y.to_string(),
            centre(x, h),
            centre(y, h),
        ]
    });
    write_rows(out, &["step", "cell_x", "cell_y", "x_mm", "y_mm"], rows)
}

/// A field read back from CSV.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldTable {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldTable {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            FieldTable::Scalar(f) => (f.nx, f.ny),
            FieldTable::Vector(f) => (f.nx, f.ny),
        }
    }
}

/// Parse a field CSV written by [`write_scalar_csv`] or [`write_vector_csv`].
/// The grid size and cell size are recovered from the coordinates, which
/// must be the row-major cell centres of a regular grid.
pub fn read_field_csv(text: &str) -> Result<FieldTable, HarnessError> {
    let bad = |line: usize, message: String| HarnessError::Csv { line, message };
    let mut rd = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rd
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if header.len() < 2 || header[0] != "x_mm" || header[1] != "y_mm" {
        return Err(bad(1, "header must start with x_mm,y_mm".into()));
    }
    let names: Vec<&str> = header[2..].iter().map(String::as_str).collect();
    enum Kind {
        S(ScalarQuantity),
        V(VectorQuantity),
    }
    let kind = match names.as_slice() {
        [n] => SCALARS
            .iter()
            .find(|&&q| scalar_column(q) == *n)
            .map(|&q| Kind::S(q)),
        [a, b] => VECTORS
            .iter()
            .find(|&&q| vector_columns(q) == [*a, *b])
            .map(|&q| Kind::V(q)),
        _ => None,
    }
    .ok_or_else(|| bad(1, format!("unknown value columns {:?}", names)))?;

    let mut coords = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut nums = Vec::with_capacity(rec.len());
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| bad(line, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(bad(line, format!("non-finite value: {field:?}")));
            }
            nums.push(v);
        }
        coords.push((nums[0], nums[1], line));
        for (c, v) in cols.iter_mut().zip(&nums[2..]) {
            c.push(*v);
        }
    }
    if coords.is_empty() {
        return Err(bad(1, "no data rows".into()));
    }
    let y0 = coords[0].1;
    let nx = coords.iter().take_while(|c| c.1 == y0).count();
    if coords.len() % nx != 0 {
        return Err(bad(
            coords[coords.len() - 1].2,
            "rows do not form a complete grid".into(),
        ));
    }
    let ny = coords.len() / nx;
    // the first centre sits half a cell from the origin
    let h = 2.0 * coords[0].0;
    if !(h > 0.0 && h.is_finite()) {
        return Err(bad(coords[0].2, "cannot infer a positive cell size".into()));
    }
    let tol = 1e-9 * h;
    for (k, &(x, y, line)) in coords.iter().enumerate() {
        let (ex, ey) = ((k % nx) as f64 + 0.5, (k / nx) as f64 + 0.5);
        if (x - ex * h).abs() > tol * ex.max(1.0) || (y - ey * h).abs() > tol * ey.max(1.0) {
            return Err(bad(
                line,
                format!("coordinates ({x}, {y}) are not cell centre {k} of a {nx}-wide grid"),
            ));
        }
    }
    let mut cols = cols.into_iter();
    Ok(match kind {
        Kind::S(q) => FieldTable::Scalar(ScalarField::new(nx, ny, h, q, cols.next().unwrap())?),
        Kind::V(q) => {
            let (x, y) = (cols.next().unwrap(), cols.next().unwrap());
            FieldTable::Vector(VectorField::new(nx, ny, h, q, x, y)?)
        }
    })
}
