//! Fields derived from a solved potential.

use super::{
    Conductivity, ElectrodeSet, FaceFluxes, ScalarField, ScalarQuantity, VectorField,
    VectorQuantity,
};
use crate::error::FieldError;
use crate::numeric::harmonic_mean;

fn check_dims(expected: (usize, usize), got: (usize, usize)) -> Result<(), FieldError> {
    if expected != got {
        return Err(FieldError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Derivative along one axis from the values at `prev`, `here`, `next`,
/// using only neighbours marked valid: central if both are, one-sided if one
/// is, zero otherwise. Lengths in metres.
#[inline]
fn axis_derivative(prev: Option<f64>, here: f64, next: Option<f64>, h: f64) -> f64 {
    match (prev, next) {
        (Some(a), Some(b)) => (b - a) / (2.0 * h),
        (None, Some(b)) => (b - here) / h,
        (Some(a), None) => (here - a) / h,
        (None, None) => 0.0,
    }
}

/// `J = -sigma grad(phi)`. Cell vectors use central differences between
/// conducting neighbours and one-sided differences at conductor/insulator
/// interfaces; face fluxes are the finite-volume fluxes of the solve.
pub fn current_density(phi: &ScalarField, sigma: &Conductivity) -> Result<VectorField, FieldError> {
    check_dims((phi.nx, phi.ny), (sigma.nx, sigma.ny))?;
    let (nx, ny) = (phi.nx, phi.ny);
    let h = phi.cell_size_mm * 1e-3;
    let s = &sigma.values;
    let v = &phi.values;
    let mut jx = vec![0.0; nx * ny];
    let mut jy = vec![0.0; nx * ny];
    let mut east = vec![0.0; nx * ny];
    let mut south = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let i = y * nx + x;
            if x + 1 < nx {
                east[i] = harmonic_mean(s[i], s[i + 1]) * (v[i] - v[i + 1]);
            }
            if y + 1 < ny {
                south[i] = harmonic_mean(s[i], s[i + nx]) * (v[i] - v[i + nx]);
            }
            if s[i] <= 0.0 {
                continue;
            }
            let pick = |ok: bool, j: usize| (ok && s[j] > 0.0).then(|| v[j]);
            let w = pick(x > 0, i.wrapping_sub(1));
            let e = pick(x + 1 < nx, i + 1);
            let n = pick(y > 0, i.wrapping_sub(nx));
            let so = pick(y + 1 < ny, i + nx);
            jx[i] = -s[i] * axis_derivative(w, v[i], e, h);
            jy[i] = -s[i] * axis_derivative(n, v[i], so, h);
        }
    }
    let mut f = VectorField::new(
        nx,
        ny,
        phi.cell_size_mm,
        VectorQuantity::CurrentDensity,
        jx,
        jy,
    )?;
    f.faces = Some(FaceFluxes { east, south });
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct ConservationReport {
    pub divergence: ScalarField,
    pub current_in: f64,
    pub current_out: f64,
    /// Largest |div J| over conducting cells that are not electrode cells.
    pub max_abs_div_off_electrode: f64,
    /// Mean |J| over cells with non-zero current density.
    pub mean_abs_j: f64,
}

impl ConservationReport {
    pub fn imbalance(&self) -> f64 {
        (self.current_in - self.current_out).abs() / self.current_in.abs().max(f64::MIN_POSITIVE)
    }

    /// The divergence bound: `max |div J| <= 1e-3 * mean|J| / h`.
    pub fn divergence_ok(&self, cell_size_mm: f64) -> bool {
        self.max_abs_div_off_electrode <= 1e-3 * self.mean_abs_j / (cell_size_mm * 1e-3)
    }

    /// Both electrode balance within `rel_tol` and the divergence bound.
    pub fn passes(&self, cell_size_mm: f64, rel_tol: f64) -> bool {
        self.imbalance() <= rel_tol && self.divergence_ok(cell_size_mm)
    }
}

/// Discrete divergence and electrode current totals. Uses the face fluxes
/// when the field carries them, otherwise central differences of the cell
/// vectors.
pub fn conservation(
    j: &VectorField,
    electrodes: &ElectrodeSet,
) -> Result<ConservationReport, FieldError> {
    let (nx, ny) = (j.nx, j.ny);
    let n = nx * ny;
    let h = j.cell_size_mm * 1e-3;
    let polarity = electrodes.polarity_of(n);
    let mut div = vec![0.0; n];
    let mut fin = Vec::new();
    let mut fout = Vec::new();
    match &j.faces {
        Some(f) => {
            for i in 0..n {
                let (x, y) = (i % nx, i / nx);
                let west = if x > 0 { f.east[i - 1] } else { 0.0 };
                let north = if y > 0 { f.south[i - nx] } else { 0.0 };
                let out = (f.east[i] - west) + (f.south[i] - north);
                div[i] = out / (h * h);
            }
            // face totals between electrode cells and their surroundings
            let mut face = |a: usize, b: usize, flux_ab: f64| {
                use crate::maze::Polarity::*;
                match (polarity[a], polarity[b]) {
                    (Some(Positive), pb) if pb != Some(Positive) => fin.push(flux_ab),
                    (pa, Some(Positive)) if pa != Some(Positive) => fin.push(-flux_ab),
                    _ => {}
                }
                match (polarity[a], polarity[b]) {
                    (Some(Negative), pb) if pb != Some(Negative) => fout.push(-flux_ab),
                    (pa, Some(Negative)) if pa != Some(Negative) => fout.push(flux_ab),
                    _ => {}
                }
            };
            for i in 0..n {
                let (x, y) = (i % nx, i / nx);
                if x + 1 < nx {
                    face(i, i + 1, f.east[i]);
                }
                if y + 1 < ny {
                    face(i, i + nx, f.south[i]);
                }
            }
        }
        None => {
            for i in 0..n {
                let (x, y) = (i % nx, i / nx);
                let dx = axis_derivative(
                    (x > 0).then(|| j.x[i - 1]),
                    j.x[i],
                    (x + 1 < nx).then(|| j.x[i + 1]),
                    h,
                );
                let dy = axis_derivative(
                    (y > 0).then(|| j.y[i - nx]),
                    j.y[i],
                    (y + 1 < ny).then(|| j.y[i + nx]),
                    h,
                );
                div[i] = dx + dy;
            }
            // flux through electrode boundary faces from averaged normal components
            let mut face = |a: usize, b: usize, normal: f64| {
                use crate::maze::Polarity::*;
                let flux = normal * h;
                match (polarity[a], polarity[b]) {
                    (Some(Positive), pb) if pb != Some(Positive) => fin.push(flux),
                    (pa, Some(Positive)) if pa != Some(Positive) => fin.push(-flux),
                    _ => {}
                }
                match (polarity[a], polarity[b]) {
                    (Some(Negative), pb) if pb != Some(Negative) => fout.push(-flux),
                    (pa, Some(Negative)) if pa != Some(Negative) => fout.push(flux),
                    _ => {}
                }
            };
            for i in 0..n {
                let (x, y) = (i % nx, i / nx);
                if x + 1 < nx {
                    face(i, i + 1, 0.5 * (j.x[i] + j.x[i + 1]));
                }
                if y + 1 < ny {
                    face(i, i + nx, 0.5 * (j.y[i] + j.y[i + nx]));
                }
            }
        }
    }

    let mags: Vec<f64> = (0..n)
        .map(|i| j.magnitude(i))
        .filter(|&m| m > 0.0)
        .collect();
    let mean_abs_j = if mags.is_empty() {
        0.0
    } else {
        mags.iter().sum::<f64>() / mags.len() as f64
    };
    let active = |i: usize| {
        j.magnitude(i) > 0.0
            || j.faces
                .as_ref()
                .is_some_and(|f| f.east[i] != 0.0 || f.south[i] != 0.0)
            || div[i] != 0.0
    };
    let max_abs_div_off_electrode = (0..n)
        .filter(|&i| polarity[i].is_none() && active(i))
        .map(|i| div[i].abs())
        .fold(0.0, f64::max);

    Ok(ConservationReport {
        divergence: ScalarField::new(nx, ny, j.cell_size_mm, ScalarQuantity::Divergence, div)?,
        current_in: crate::numeric::exact_sum(fin),
        current_out: crate::numeric::exact_sum(fout),
        max_abs_div_off_electrode,
        mean_abs_j,
    })
}

/// Joule power density `|J|^2 / sigma` on conducting cells.
pub fn joule_heating(j: &VectorField, sigma: &Conductivity) -> Result<ScalarField, FieldError> {
    check_dims((sigma.nx, sigma.ny), (j.nx, j.ny))?;
    let values = (0..j.nx * j.ny)
        .map(|i| {
            let s = sigma.values[i];
            if s > 0.0 {
                (j.x[i] * j.x[i] + j.y[i] * j.y[i]) / s
            } else {
                0.0
            }
        })
        .collect();
    ScalarField::new(
        j.nx,
        j.ny,
        j.cell_size_mm,
        ScalarQuantity::JoulePower,
        values,
    )
}

/// `|J|` per cell.
pub fn speed_of_j(j: &VectorField) -> ScalarField {
    ScalarField {
        nx: j.nx,
        ny: j.ny,
        cell_size_mm: j.cell_size_mm,
        quantity: ScalarQuantity::SpeedOfJ,
        values: (0..j.nx * j.ny).map(|i| j.magnitude(i)).collect(),
    }
}

/// `grad |J|`, differencing only between cells of the same material (central
/// where both neighbours match, one-sided otherwise), zero on insulators.
pub fn grad_speed_of_j(j: &VectorField, sigma: &Conductivity) -> Result<VectorField, FieldError> {
    check_dims((sigma.nx, sigma.ny), (j.nx, j.ny))?;
    let (nx, ny) = (j.nx, j.ny);
    let h = j.cell_size_mm * 1e-3;
    let speed = speed_of_j(j).values;
    let s = &sigma.values;
    let mut gx = vec![0.0; nx * ny];
    let mut gy = vec![0.0; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            let i = y * nx + x;
            if s[i] <= 0.0 {
                continue;
            }
            // only neighbours of the same material: the current inside a
            // coated wall says nothing about the electrolyte next to it
            let pick = |ok: bool, k: usize| (ok && s[k] == s[i]).then(|| speed[k]);
            gx[i] = axis_derivative(
                pick(x > 0, i.wrapping_sub(1)),
                speed[i],
                pick(x + 1 < nx, i + 1),
                h,
            );
            gy[i] = axis_derivative(
                pick(y > 0, i.wrapping_sub(nx)),
                speed[i],
                pick(y + 1 < ny, i + nx),
                h,
            );
        }
    }
    VectorField::new(nx, ny, j.cell_size_mm, VectorQuantity::GradSpeedOfJ, gx, gy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{solve_potential, SolverSettings};

    fn strip_fields(
        nx: usize,
        ny: usize,
        sigma: f64,
        volts: f64,
    ) -> (Conductivity, ElectrodeSet, ScalarField, VectorField) {
        let c = Conductivity {
            nx,
            ny,
            cell_size_mm: 0.5,
            values: vec![sigma; nx * ny],
        };
        let e = ElectrodeSet {
            positive: (0..ny).map(|y| y * nx).collect(),
            negative: (0..ny).map(|y| y * nx + nx - 1).collect(),
            voltage: volts,
        };
        let (phi, _) = solve_potential(&c, &e, &SolverSettings::for_grid(nx, ny)).unwrap();
        let j = current_density(&phi, &c).unwrap();
        (c, e, phi, j)
    }

    #[test]
    fn uniform_strip_current() {
        let (_, _, _, j) = strip_fields(20, 3, 10.0, 1.0);
        // L = distance between the pinned end-cell centres
        let expect = 10.0 * 1.0 / (19.0 * 0.5e-3);
        for i in 0..60 {
            assert!((j.x[i] - expect).abs() < 1e-6 * expect, "{i}: {}", j.x[i]);
            assert!(j.y[i].abs() < 1e-6 * expect);
        }
    }

    #[test]
    fn constant_potential_has_no_current() {
        let c = Conductivity {
            nx: 4,
            ny: 4,
            cell_size_mm: 1.0,
            values: vec![3.0; 16],
        };
        let phi = ScalarField::new(4, 4, 1.0, ScalarQuantity::Potential, vec![2.5; 16]).unwrap();
        let j = current_density(&phi, &c).unwrap();
        assert!(j.x.iter().chain(&j.y).all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let c = Conductivity {
            nx: 4,
            ny: 4,
            cell_size_mm: 1.0,
            values: vec![3.0; 16],
        };
        let phi = ScalarField::new(4, 3, 1.0, ScalarQuantity::Potential, vec![0.0; 12]).unwrap();
        assert!(matches!(
            current_density(&phi, &c),
            Err(FieldError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn strip_conservation_and_joule() {
        let (c, e, _, j) = strip_fields(20, 3, 10.0, 1.0);
        let r = conservation(&j, &e).unwrap();
        assert!(r.imbalance() < 1e-8);
        assert!(r.divergence_ok(0.5));
        let p = joule_heating(&j, &c).unwrap();
        let expect = 10.0 * (1.0f64 / (19.0 * 0.5e-3)).powi(2);
        assert!(p.values.iter().all(|&v| (v - expect).abs() < 1e-6 * expect));
    }

    #[test]
    fn uniform_current_has_zero_gradient() {
        let c = Conductivity {
            nx: 5,
            ny: 5,
            cell_size_mm: 1.0,
            values: vec![1.0; 25],
        };
        let j = VectorField::uniform(5, 5, 1.0, VectorQuantity::CurrentDensity, (3.0, -4.0));
        let g = grad_speed_of_j(&j, &c).unwrap();
        assert!(g.x.iter().chain(&g.y).all(|&v| v == 0.0));
    }

    #[test]
    fn walls_carry_nothing() {
        let mut values = vec![10.0; 15];
        values[7] = 0.0;
        let c = Conductivity {
            nx: 5,
            ny: 3,
            cell_size_mm: 1.0,
            values,
        };
        let e = ElectrodeSet {
            positive: vec![0, 5, 10],
            negative: vec![4, 9, 14],
            voltage: 2.0,
        };
        let (phi, _) = solve_potential(&c, &e, &SolverSettings::for_grid(5, 3)).unwrap();
        let j = current_density(&phi, &c).unwrap();
        assert_eq!(j.at(2, 1), (0.0, 0.0));
        let f = j.faces.as_ref().unwrap();
        assert_eq!(f.east[6], 0.0);
        assert_eq!(f.east[7], 0.0);
        assert_eq!(f.south[2], 0.0);
    }
}
