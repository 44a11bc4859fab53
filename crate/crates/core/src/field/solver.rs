//! Finite-volume potential solve with Jacobi-preconditioned conjugate
//! gradients.
//!
//! Each conducting, non-electrode cell is an unknown. Face conductances are
//! harmonic means of the adjacent cell conductivities, so a zero-conductivity
//! wall carries no flux. The stencil is evaluated as
//! `(east + west) + (north + south)`; IEEE addition is commutative, so mirror-image cells compute
//! bit-identical values and mirror-symmetric problems stay exactly symmetric.

use std::collections::VecDeque;

use serde::Serialize;

use super::{Conductivity, ElectrodeSet, ScalarField, ScalarQuantity};
use crate::error::FieldError;
use crate::maze::Polarity;
use crate::numeric::harmonic_mean;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Relative residual `|b - A x| / |b|` to reach.
    pub tol: f64,
    pub max_iter: usize,
}

impl SolverSettings {
    pub const DEFAULT_TOL: f64 = 1e-9;

    pub fn for_grid(nx: usize, ny: usize) -> Self {
        SolverSettings {
            tol: Self::DEFAULT_TOL,
            max_iter: 50 * nx.max(ny),
        }
    }

    pub fn for_maze(maze: &crate::maze::MazeSpec) -> Self {
        Self::for_grid(maze.nx(), maze.ny())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// True relative residual of the returned potential.
    pub final_residual: f64,
    pub tolerance: f64,
    /// Current leaving the positive electrode cells, A per metre of depth.
    pub current_in: f64,
    /// Current entering the negative electrode cells, A per metre of depth.
    pub current_out: f64,
    pub converged: bool,
}

impl SolveReport {
    pub fn current_imbalance(&self) -> f64 {
        (self.current_in - self.current_out).abs() / self.current_in.abs().max(f64::MIN_POSITIVE)
    }
}

const NONE: usize = usize::MAX;

/// Compressed 5-point system over the unknown cells.
struct System {
    cell_of: Vec<usize>,
    /// Neighbour unknown index per direction E, W, N, S (`NONE` if fixed or absent).
    nbr: Vec<[usize; 4]>,
    cond: Vec<[f64; 4]>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
}

impl System {
    fn apply(&self, p: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let n = &self.nbr[i];
            let c = &self.cond[i];
            let v = |k: usize| if n[k] == NONE { 0.0 } else { c[k] * p[n[k]] };
            *o = self.diag[i] * p[i] - ((v(0) + v(1)) + (v(2) + v(3)));
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Direction offsets E, W, N, S.
fn neighbor(i: usize, k: usize, nx: usize, ny: usize) -> Option<usize> {
    let (x, y) = (i % nx, i / nx);
    match k {
        0 => (x + 1 < nx).then(|| i + 1),
        1 => (x > 0).then(|| i - 1),
        2 => (y > 0).then(|| i - nx),
        _ => (y + 1 < ny).then(|| i + nx),
    }
}

/// Solve the potential. Positive electrode cells are held at the applied
/// voltage, negative ones at zero. Conducting cells not connected to any
/// electrode are left out of the system and reported as zero.
pub fn solve_potential(
    sigma: &Conductivity,
    electrodes: &ElectrodeSet,
    settings: &SolverSettings,
) -> Result<(ScalarField, SolveReport), FieldError> {
    let (nx, ny) = (sigma.nx, sigma.ny);
    let n = nx * ny;
    if n == 0 {
        return Err(FieldError::Empty);
    }
    if sigma.values.len() != n {
        return Err(FieldError::DimensionMismatch {
            expected: (nx, ny),
            got: (sigma.values.len(), 1),
        });
    }
    if let Some(i) = sigma
        .values
        .iter()
        .position(|s| !(s.is_finite() && *s >= 0.0))
    {
        return Err(FieldError::BadConductivity(i));
    }
    if !(settings.tol > 0.0) {
        return Err(FieldError::BadTolerance);
    }
    let polarity = electrodes.polarity_of(n);
    let fixed = |i: usize| match polarity[i] {
        Some(Polarity::Positive) => Some(electrodes.voltage),
        Some(Polarity::Negative) => Some(0.0),
        None => None,
    };

    // conducting components; keep the ones touching an electrode
    let conducting = |i: usize| sigma.values[i] > 0.0;
    let mut comp = vec![NONE; n];
    let mut touches_pos = Vec::new();
    let mut touches_neg = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if comp[s] != NONE || !conducting(s) {
            continue;
        }
        let id = touches_pos.len();
        touches_pos.push(false);
        touches_neg.push(false);
        comp[s] = id;
        queue.push_back(s);
        while let Some(i) = queue.pop_front() {
            match polarity[i] {
                Some(Polarity::Positive) => touches_pos[id] = true,
                Some(Polarity::Negative) => touches_neg[id] = true,
                None => {}
            }
            for k in 0..4 {
                if let Some(j) = neighbor(i, k, nx, ny) {
                    if comp[j] == NONE && conducting(j) {
                        comp[j] = id;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    if !touches_pos.iter().zip(&touches_neg).any(|(p, q)| *p && *q) {
        return Err(FieldError::Disconnected);
    }
    let active = |i: usize| comp[i] != NONE && (touches_pos[comp[i]] || touches_neg[comp[i]]);

    let mut unknown_of = vec![NONE; n];
    let mut cell_of = Vec::new();
    for i in 0..n {
        if active(i) && polarity[i].is_none() {
            unknown_of[i] = cell_of.len();
            cell_of.push(i);
        }
    }
    let m = cell_of.len();
    let mut sys = System {
        cell_of,
        nbr: vec![[NONE; 4]; m],
        cond: vec![[0.0; 4]; m],
        diag: vec![0.0; m],
        rhs: vec![0.0; m],
    };
    for u in 0..m {
        let i = sys.cell_of[u];
        let mut c = [0.0; 4];
        let mut b = [0.0; 4];
        for k in 0..4 {
            if let Some(j) = neighbor(i, k, nx, ny) {
                let cij = harmonic_mean(sigma.values[i], sigma.values[j]);
                c[k] = cij;
                if let Some(v) = fixed(j) {
                    b[k] = cij * v;
                } else if unknown_of[j] != NONE {
                    sys.nbr[u][k] = unknown_of[j];
                }
            }
        }
        sys.cond[u] = c;
        sys.diag[u] = (c[0] + c[1]) + (c[2] + c[3]);
        sys.rhs[u] = (b[0] + b[1]) + (b[2] + b[3]);
    }

    let (x, iterations) = pcg(&sys, settings);

    // true residual
    let mut ax = vec![0.0; m];
    sys.apply(&x, &mut ax);
    let rnorm = sys
        .rhs
        .iter()
        .zip(&ax)
        .map(|(b, a)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    let bnorm = dot(&sys.rhs, &sys.rhs).sqrt();
    let final_residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };

    let mut phi = vec![0.0; n];
    for i in 0..n {
        if let Some(v) = fixed(i) {
            phi[i] = v;
        }
    }
    for (u, &i) in sys.cell_of.iter().enumerate() {
        phi[i] = x[u];
    }

    let (current_in, current_out) = electrode_currents(sigma, &polarity, &phi);
    let potential = ScalarField::new(nx, ny, sigma.cell_size_mm, ScalarQuantity::Potential, phi)?;
    let report = SolveReport {
        iterations,
        final_residual,
        tolerance: settings.tol,
        current_in,
        current_out,
        converged: final_residual <= settings.tol,
    };
    Ok((potential, report))
}

fn pcg(sys: &System, settings: &SolverSettings) -> (Vec<f64>, usize) {
    let m = sys.rhs.len();
    let mut x = vec![0.0; m];
    if m == 0 {
        return (x, 0);
    }
    let bnorm = dot(&sys.rhs, &sys.rhs).sqrt();
    if bnorm == 0.0 {
        return (x, 0);
    }
    let target = settings.tol * bnorm;
    let inv_diag: Vec<f64> = sys
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let mut it = 0;
    while it < settings.max_iter {
        sys.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        if dot(&r, &r).sqrt() <= target {
            break;
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, it)
}

/// Net current out of positive cells and into negative cells through faces
/// shared with cells of another polarity class.
pub(crate) fn electrode_currents(
    sigma: &Conductivity,
    polarity: &[Option<Polarity>],
    phi: &[f64],
) -> (f64, f64) {
    let (nx, ny) = (sigma.nx, sigma.ny);
    let mut fin = Vec::new();
    let mut fout = Vec::new();
    for i in 0..nx * ny {
        let Some(p) = polarity[i] else { continue };
        for k in 0..4 {
            let Some(j) = neighbor(i, k, nx, ny) else {
                continue;
            };
            if polarity[j] == Some(p) {
                continue;
            }
            let c = harmonic_mean(sigma.values[i], sigma.values[j]);
            match p {
                Polarity::Positive => fin.push(c * (phi[i] - phi[j])),
                Polarity::Negative => fout.push(c * (phi[j] - phi[i])),
            }
        }
    }
    (
        crate::numeric::exact_sum(fin),
        crate::numeric::exact_sum(fout),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strip(nx: usize, ny: usize) -> (Conductivity, ElectrodeSet) {
        let sigma = Conductivity {
            nx,
            ny,
            cell_size_mm: 1.0,
            values: vec![2.0; nx * ny],
        };
        let e = ElectrodeSet {
            positive: (0..ny).map(|y| y * nx).collect(),
            negative: (0..ny).map(|y| y * nx + nx - 1).collect(),
            voltage: 1.0,
        };
        (sigma, e)
    }

    #[test]
    fn linear_strip() {
        let (sigma, e) = strip(20, 3);
        let (phi, rep) = solve_potential(&sigma, &e, &SolverSettings::for_grid(20, 3)).unwrap();
        assert!(rep.converged);
        for y in 0..3 {
            for x in 0..20 {
                let exact = 1.0 - x as f64 / 19.0;
                assert!((phi.at(x, y) - exact).abs() < 1e-9, "{x},{y}");
            }
        }
        // per unit depth: sigma * V / L * height = 2 * 1/19mm * 3mm
        let expect = 2.0 * 3.0 / 19.0;
        assert!((rep.current_in - expect).abs() < 1e-9 * expect);
        assert!(rep.current_imbalance() < 1e-9);
    }

    #[test]
    fn disconnected_electrodes_are_detected() {
        let (mut sigma, e) = strip(5, 1);
        sigma.values[2] = 0.0;
        let err = solve_potential(&sigma, &e, &SolverSettings::for_grid(5, 1)).unwrap_err();
        assert_eq!(err, FieldError::Disconnected);
    }

    #[test]
    fn floating_islands_are_zero() {
        let sigma = Conductivity {
            nx: 5,
            ny: 1,
            cell_size_mm: 1.0,
            values: vec![1.0, 1.0, 0.0, 1.0, 1.0],
        };
        let e = ElectrodeSet {
            positive: vec![0],
            negative: vec![1],
            voltage: 3.0,
        };
        let (phi, rep) = solve_potential(&sigma, &e, &SolverSettings::for_grid(5, 1)).unwrap();
        assert_eq!(phi.values, vec![3.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(rep.converged);
    }

    #[test]
    fn rejects_bad_input() {
        let (mut sigma, e) = strip(4, 1);
        let s = SolverSettings {
            tol: 0.0,
            max_iter: 10,
        };
        assert_eq!(
            solve_potential(&sigma, &e, &s).unwrap_err(),
            FieldError::BadTolerance
        );
        sigma.values[1] = -1.0;
        assert_eq!(
            solve_potential(&sigma, &e, &SolverSettings::for_grid(4, 1)).unwrap_err(),
            FieldError::BadConductivity(1)
        );
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let (sigma, e) = strip(30, 4);
        let (_, rep) = solve_potential(
            &sigma,
            &e,
            &SolverSettings {
                tol: 1e-12,
                max_iter: 1,
            },
        )
        .unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
        assert!(rep.final_residual > 1e-12);
    }
}
