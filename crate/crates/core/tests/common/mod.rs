//! Independent reference implementations used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use dropmaze::maze::{parse_maze, validate_and_components, CellKind, MazeSpec, Polarity};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        assert!(d != 0.0, "singular system");
        for row in col + 1..n {
            let f = a[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

fn sigma_of(maze: &MazeSpec, i: usize) -> f64 {
    let p = maze.physics();
    match maze.cells()[i] {
        CellKind::Channel => p.sigma_electrolyte,
        CellKind::Wall => p.sigma_wall,
        CellKind::CoatedWall => p.sigma_coating,
    }
}

fn grid_neighbors(i: usize, nx: usize, ny: usize) -> Vec<usize> {
    let (x, y) = (i % nx, i / nx);
    let mut v = Vec::new();
    if x > 0 {
        v.push(i - 1);
    }
    if x + 1 < nx {
        v.push(i + 1);
    }
    if y > 0 {
        v.push(i - nx);
    }
    if y + 1 < ny {
        v.push(i + nx);
    }
    v
}

/// Potential from a dense finite-volume system: every conducting cell
/// reachable from an electrode through conducting cells is an unknown unless
/// it is an electrode cell; face conductance is `2ab/(a+b)`.
pub fn dense_potential(maze: &MazeSpec) -> Vec<f64> {
    let (nx, ny) = (maze.nx(), maze.ny());
    let n = nx * ny;
    let mut fixed = vec![None; n];
    for (x, y) in maze.electrode_cells(Polarity::Positive) {
        fixed[y * nx + x] = Some(maze.applied_voltage());
    }
    for (x, y) in maze.electrode_cells(Polarity::Negative) {
        fixed[y * nx + x] = Some(0.0);
    }
    // flood from the electrodes through conducting cells
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| fixed[i].is_some()).collect();
    for &i in &stack {
        reached[i] = true;
    }
    while let Some(i) = stack.pop() {
        for j in grid_neighbors(i, nx, ny) {
            if !reached[j] && sigma_of(maze, j) > 0.0 {
                reached[j] = true;
                stack.push(j);
            }
        }
    }
    let unknowns: Vec<usize> = (0..n)
        .filter(|&i| reached[i] && fixed[i].is_none())
        .collect();
    let mut index = vec![usize::MAX; n];
    for (u, &i) in unknowns.iter().enumerate() {
        index[i] = u;
    }
    let m = unknowns.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for (u, &i) in unknowns.iter().enumerate() {
        for j in grid_neighbors(i, nx, ny) {
            let (si, sj) = (sigma_of(maze, i), sigma_of(maze, j));
            if si <= 0.0 || sj <= 0.0 {
                continue;
            }
            let g = 2.0 * si * sj / (si + sj);
            a[u][u] += g;
            match fixed[j] {
                Some(v) => b[u] += g * v,
                None => a[u][index[j]] -= g,
            }
        }
    }
    let x = dense_solve(a, b);
    let mut phi: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    for (u, &i) in unknowns.iter().enumerate() {
        phi[i] = x[u];
    }
    phi
}

/// Shortest 4-connected channel distance to the nearest target cell, by
/// repeated relaxation until nothing changes.
pub fn relaxed_distances(maze: &MazeSpec, targets: &[(usize, usize)]) -> Vec<Option<u32>> {
    let (nx, ny) = (maze.nx(), maze.ny());
    let mut d: Vec<Option<u32>> = vec![None; nx * ny];
    for &(x, y) in targets {
        d[y * nx + x] = Some(0);
    }
    loop {
        let mut changed = false;
        for i in 0..nx * ny {
            if !maze.cells()[i].is_channel() {
                continue;
            }
            let best = grid_neighbors(i, nx, ny)
                .into_iter()
                .filter_map(|j| d[j])
                .min();
            if let Some(b) = best {
                if d[i].is_none_or(|v| v > b + 1) {
                    d[i] = Some(b + 1);
                    changed = true;
                }
            }
        }
        if !changed {
            return d;
        }
    }
}

/// Random solvable maze text of the given size with walls, coated walls
/// and one or more cells of each electrode.
pub fn random_maze_text(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> String {
    loop {
        let mut g: Vec<u8> = (0..nx * ny)
            .map(|_| match rng.gen_range(0.0..1.0) {
                p if p < 0.25 => b'#',
                p if p < 0.30 => b'+',
                _ => b'.',
            })
            .collect();
        for glyph in *b"ST" {
            for _ in 0..rng.gen_range(1..=3) {
                let i = rng.gen_range(0..nx * ny);
                if g[i] == b'.' {
                    g[i] = glyph;
                }
            }
        }
        let text: String = g
            .chunks(nx)
            .map(|r| String::from_utf8(r.to_vec()).unwrap() + "\n")
            .collect();
        if let Ok(m) = parse_maze(&text) {
            if validate_and_components(&m).solvable {
                return text;
            }
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nodal analysis of a resistor network. `edges` are `(a, b, resistance)`;
/// `fixed` holds node voltages. Returns the current from `a` to `b` in each
/// edge.
pub fn resistor_network(
    nodes: usize,
    edges: &[(usize, usize, f64)],
    fixed: &[(usize, f64)],
) -> Vec<f64> {
    let mut v = vec![None; nodes];
    for &(n, val) in fixed {
        v[n] = Some(val);
    }
    let free: Vec<usize> = (0..nodes).filter(|&n| v[n].is_none()).collect();
    let mut idx = vec![usize::MAX; nodes];
    for (k, &n) in free.iter().enumerate() {
        idx[n] = k;
    }
    let m = free.len();
    let mut a = vec![vec![0.0; m]; m];
    let mut b = vec![0.0; m];
    for &(p, q, r) in edges {
        let g = 1.0 / r;
        for (s, t) in [(p, q), (q, p)] {
            if v[s].is_some() {
                continue;
            }
            let u = idx[s];
            a[u][u] += g;
            match v[t] {
                Some(val) => b[u] += g * val,
                None => a[u][idx[t]] -= g,
            }
        }
    }
    let x = dense_solve(a, b);
    let volt = |n: usize| v[n].unwrap_or_else(|| x[idx[n]]);
    edges
        .iter()
        .map(|&(p, q, r)| (volt(p) - volt(q)) / r)
        .collect()
}
