//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use flatvar::{Chain, Complex, Group};
use rand::Rng;

/// Vertex index of grid node `(i, j)` in a grid with `nx` cells per row.
pub fn node(nx: usize, i: usize, j: usize) -> usize {
    j * (nx + 1) + i
}

/// `nx` by `ny` cells of side `h` starting at the origin, each cut along a
/// diagonal. `flip(i, j)` picks the anti-diagonal for cell `(i, j)`.
pub fn grid_with(nx: usize, ny: usize, h: f64, flip: impl Fn(usize, usize) -> bool) -> Arc<Complex> {
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(vec![i as f64 * h, j as f64 * h]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (node(nx, i, j), node(nx, i + 1, j), node(nx, i + 1, j + 1), node(nx, i, j + 1));
            if flip(i, j) {
                tris.push(vec![a, b, d]);
                tris.push(vec![b, c, d]);
            } else {
                tris.push(vec![a, b, c]);
                tris.push(vec![a, c, d]);
            }
        }
    }
    Arc::new(Complex::new(2, points, &tris).expect("grid is a valid complex"))
}

pub fn grid(nx: usize, ny: usize, h: f64) -> Arc<Complex> {
    grid_with(nx, ny, h, |_, _| false)
}

/// A grid whose interior nodes are moved by up to `jitter * h` and whose
/// diagonals are chosen at random.
pub fn random_grid(nx: usize, ny: usize, h: f64, jitter: f64, rng: &mut impl Rng) -> Arc<Complex> {
    let flips: Vec<bool> = (0..nx * ny).map(|_| rng.gen()).collect();
    let base = grid_with(nx, ny, h, |i, j| flips[j * nx + i]);
    let mut points = base.points().to_vec();
    for j in 1..ny {
        for i in 1..nx {
            for c in &mut points[node(nx, i, j)] {
                *c += rng.gen_range(-jitter..jitter) * h;
            }
        }
    }
    Arc::new(Complex::new(2, points, base.simplices(2)).expect("jitter keeps the grid embedded"))
}

/// Random chain of dimension `dim` with integer values in `-spread..=spread`
/// on each simplex with probability `density`.
pub fn random_chain(
    k: &Arc<Complex>,
    dim: usize,
    group: Group,
    density: f64,
    spread: i64,
    rng: &mut impl Rng,
) -> Chain {
    let mut terms = Vec::new();
    for i in 0..k.count(dim) {
        if rng.gen_bool(density) {
            terms.push((i, group.from_int(rng.gen_range(-spread..=spread))));
        }
    }
    Chain::from_coeffs(k, dim, group, terms).expect("indices are in range")
}

/// The boundary of the unit square `[0,1]^2` split along its diagonal.
pub fn unit_square() -> Arc<Complex> {
    grid(1, 1, 1.0)
}

pub fn square_boundary(k: &Arc<Complex>, group: Group) -> Chain {
    let g = group.one();
    Chain::from_simplices(k, group, &[(vec![0, 1], g), (vec![1, 3], g), (vec![3, 2], g), (vec![2, 0], g)])
        .expect("square edges exist")
}
