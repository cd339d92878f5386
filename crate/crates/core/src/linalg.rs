//! Small dense helpers shared by the geometry modules.

use nalgebra::DMatrix;

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// `sqrt(det(G))` for the Gram matrix of the given vectors, i.e. the
/// d-volume of the parallelotope they span.
pub(crate) fn gram_volume(vectors: &[Vec<f64>]) -> f64 {
    let d = vectors.len();
    if d == 0 {
        return 1.0;
    }
    let gram = DMatrix::from_fn(d, d, |i, j| dot(&vectors[i], &vectors[j]));
    gram.determinant().max(0.0).sqrt()
}

/// d-volume of the simplex with the given vertex coordinates.
pub(crate) fn simplex_volume(points: &[&[f64]]) -> f64 {
    let d = points.len() - 1;
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    gram_volume(&edges) / factorial(d)
}

pub(crate) fn diameter(points: &[&[f64]]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(dist(points[i], points[j]));
        }
    }
    best
}

pub(crate) fn barycenter(points: &[&[f64]]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p.iter()) {
            *ci += pi;
        }
    }
    let k = points.len() as f64;
    c.iter_mut().for_each(|v| *v /= k);
    c
}

/// Barycentric coordinates of `x` relative to the simplex, together with the
/// distance from `x` to the simplex's affine span.
pub(crate) fn barycentric(points: &[&[f64]], x: &[f64]) -> (Vec<f64>, f64) {
    let d = points.len() - 1;
    if d == 0 {
        return (vec![1.0], dist(points[0], x));
    }
    let n = x.len();
    let e = DMatrix::from_fn(n, d, |i, j| points[j + 1][i] - points[0][i]);
    let rhs = nalgebra::DVector::from_fn(n, |i, _| x[i] - points[0][i]);
    let gram = e.transpose() * &e;
    let sol = gram.lu().solve(&(e.transpose() * &rhs)).unwrap_or_else(|| nalgebra::DVector::zeros(d));
    let residual = (&e * &sol - &rhs).norm();
    let mut lambda = Vec::with_capacity(d + 1);
    lambda.push(1.0 - sol.iter().sum::<f64>());
    lambda.extend(sol.iter().copied());
    (lambda, residual)
}

/// Modified Gram-Schmidt. Returns `None` when a pivot falls below `tol`
/// (the vectors are rank deficient).
pub(crate) fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    let scale = vectors.iter().map(|v| dot(v, v).sqrt()).fold(0.0, f64::max).max(1.0);
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
        }
        let norm = dot(&w, &w).sqrt();
        if norm <= tol * scale {
            return None;
        }
        w.iter_mut().for_each(|wi| *wi /= norm);
        basis.push(w);
    }
    Some(basis)
}

/// Parity of the permutation that sorts `v` (which must have distinct
/// entries): `+1` for even, `-1` for odd.
pub(crate) fn sort_sign(v: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}
