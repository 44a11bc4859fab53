use crate::error::{FieldError, HarnessError};
use crate::field::{ScalarField, VectorField};
use crate::maze::{Cell, CellKind, MazeSpec};

/// 8-bit grayscale image, row 0 at the top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Raster {
    fn filled(width: usize, height: usize, v: u8) -> Self {
        Raster {
            width,
            height,
            pixels: vec![v; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    fn put(&mut self, x: i64, y: i64, v: u8) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = v;
        }
    }

    /// Binary PGM (P5).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Decode a binary PGM with maxval 255.
    pub fn from_pgm(bytes: &[u8]) -> Result<Raster, HarnessError> {
        let bad = |m: &str| HarnessError::Format {
            path: "<pgm>".into(),
            message: m.into(),
        };
        let mut pos = 0;
        let mut token = || -> Option<&[u8]> {
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            (pos > start).then(|| &bytes[start..pos])
        };
        if token() != Some(b"P5".as_slice()) {
            return Err(bad("not a binary PGM"));
        }
        let mut num = |what: &str| -> Result<usize, HarnessError> {
            token()
                .and_then(|t| std::str::from_utf8(t).ok())
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad(&format!("bad {what}")))
        };
        let (w, h, maxval) = (num("width")?, num("height")?, num("maxval")?);
        if maxval != 255 {
            return Err(bad("maxval must be 255"));
        }
        // exactly one whitespace byte separates the header from the data
        let data = bytes
            .get(pos + 1..)
            .ok_or_else(|| bad("missing pixel data"))?;
        let n = w.checked_mul(h).ok_or_else(|| bad("image too large"))?;
        if data.len() != n {
            return Err(bad(&format!(
                "expected {n} pixel bytes, found {}",
                data.len()
            )));
        }
        Ok(Raster {
            width: w,
            height: h,
            pixels: data.to_vec(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RenderStyle {
    Gray,
    /// Magnitude raster with a sparse lattice of direction strokes.
    Strokes,
    /// Gray raster drawn over the maze, with walls, path and trace marked.
    Overlay,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    Linear,
    /// Log scale covering this many decades below the maximum.
    Log {
        decades: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub style: RenderStyle,
    pub normalization: Normalization,
    /// Pixels per cell side.
    pub scale: usize,
    /// Cells between stroke glyphs; 0 picks one from the grid size.
    pub stroke_spacing: usize,
}

impl RenderOptions {
    pub fn new(style: RenderStyle) -> Self {
        RenderOptions {
            style,
            normalization: Normalization::Linear,
            scale: 1,
            stroke_spacing: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Overlay<'a> {
    pub maze: Option<&'a MazeSpec>,
    /// Oracle path cells.
    pub path: &'a [Cell],
    /// Droplet positions in mm.
    pub trace: &'a [(f64, f64)],
}

#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Scalar(&'a ScalarField),
    Vector(&'a VectorField),
}

const WALL: u8 = 0;
const COATED: u8 = 24;
const PATH: u8 = 240;
const MARK: u8 = 255;

/// Map values to gray levels in `lo..=hi`; a constant field maps to the middle.
fn gray_levels(values: &[f64], norm: Normalization, lo: u8, hi: u8) -> Vec<u8> {
    let t: Vec<f64> = match norm {
        Normalization::Linear => values.to_vec(),
        Normalization::Log { decades } => {
            let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let floor = top * 10f64.powf(-decades.max(0.0));
            values
                .iter()
                .map(|&v| if top > 0.0 { v.max(floor).log10() } else { v })
                .collect()
        }
    };
    let (min, max) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let span = f64::from(hi - lo);
    t.iter()
        .map(|&v| {
            if max > min {
                lo + ((v - min) / (max - min) * span).round() as u8
            } else {
                lo + (span / 2.0).round() as u8
            }
        })
        .collect()
}

fn draw_line(img: &mut Raster, a: (f64, f64), b: (f64, f64), v: u8) {
    let n = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    for k in 0..=n {
        let s = k as f64 / n as f64;
        img.put(
            (a.0 + s * (b.0 - a.0)).floor() as i64,
            (a.1 + s * (b.1 - a.1)).floor() as i64,
            v,
        );
    }
}

/// Render a field to an 8-bit raster. Identical inputs give identical pixels.
pub fn render_field(
    field: FieldRef,
    opts: &RenderOptions,
    overlay: &Overlay,
) -> Result<Raster, FieldError> {
    let (nx, ny, h) = match field {
        FieldRef::Scalar(f) => (f.nx, f.ny, f.cell_size_mm),
        FieldRef::Vector(f) => (f.nx, f.ny, f.cell_size_mm),
    };
    if nx == 0 || ny == 0 {
        return Err(FieldError::Empty);
    }
    let values: Vec<f64> = match field {
        FieldRef::Scalar(f) => f.values.clone(),
        FieldRef::Vector(f) => (0..nx * ny).map(|i| f.magnitude(i)).collect(),
    };
    if values.len() != nx * ny {
        return Err(FieldError::DimensionMismatch {
            expected: (nx, ny),
            got: (values.len(), 1),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FieldError::NonFinite);
    }
    let maze = overlay.maze.filter(|_| opts.style == RenderStyle::Overlay);
    if let Some(m) = maze {
        if (m.nx(), m.ny()) != (nx, ny) {
            return Err(FieldError::DimensionMismatch {
                expected: (nx, ny),
                got: (m.nx(), m.ny()),
            });
        }
    }
    let vector = matches!(field, FieldRef::Vector(_));
    let strokes = vector && opts.style != RenderStyle::Gray;
    // leave headroom above the base raster for marks and strokes
    let (lo, hi) = match opts.style {
        RenderStyle::Gray => (0, 255),
        RenderStyle::Strokes => (0, 191),
        RenderStyle::Overlay => (48, 208),
    };
    let level = gray_levels(&values, opts.normalization, lo, hi);

    let k = opts.scale.max(1);
    let mut img = Raster::filled(nx * k, ny * k, 0);
    for y in 0..ny {
        for x in 0..nx {
            let v = match maze.map(|m| m.kind(x, y)) {
                Some(CellKind::Wall) => WALL,
                Some(CellKind::CoatedWall) => COATED,
                _ => level[y * nx + x],
            };
            for py in y * k..(y + 1) * k {
                img.pixels[py * nx * k + x * k..py * nx * k + (x + 1) * k].fill(v);
            }
        }
    }

    if let (true, FieldRef::Vector(f)) = (strokes, field) {
        let s = if opts.stroke_spacing > 0 {
            opts.stroke_spacing
        } else {
            (nx.min(ny) / 24).max(2)
        };
        let peak = values.iter().copied().fold(0.0, f64::max);
        let len_px = 0.9 * (s * k) as f64;
        for y in (s / 2..ny).step_by(s) {
            for x in (s / 2..nx).step_by(s) {
                let i = y * nx + x;
                if peak <= 0.0 || values[i] <= 0.0 || maze.is_some_and(|m| m.kind(x, y).is_solid())
                {
                    continue;
                }
                let l = len_px * values[i] / peak;
                if l < 1.0 {
                    continue;
                }
                let (ux, uy) = (f.x[i] / values[i], f.y[i] / values[i]);
                let c = ((x as f64 + 0.5) * k as f64, (y as f64 + 0.5) * k as f64);
                draw_line(
                    &mut img,
                    (c.0 - 0.5 * l * ux, c.1 - 0.5 * l * uy),
                    (c.0 + 0.5 * l * ux, c.1 + 0.5 * l * uy),
                    MARK,
                );
            }
        }
    }

    if opts.style == RenderStyle::Overlay {
        for &(x, y) in overlay.path {
            if x < nx && y < ny {
                let c = ((x as f64 + 0.5) * k as f64, (y as f64 + 0.5) * k as f64);
                img.put(c.0 as i64, c.1 as i64, PATH);
            }
        }
        let px = k as f64 / h;
        for w in overlay.trace.windows(2) {
            draw_line(
                &mut img,
                (w[0].0 * px, w[0].1 * px),
                (w[1].0 * px, w[1].1 * px),
                MARK,
            );
        }
        if let [p] = overlay.trace {
            img.put((p.0 * px) as i64, (p.1 * px) as i64, MARK);
        }
    }
    Ok(img)
}
