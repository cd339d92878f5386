//! Embedded simplicial complexes and Whitney's standard subdivision.
//!
//! Vertices carry a fixed total order given by their index. Every simplex is
//! stored with its vertices in increasing index order, which is also its
//! reference orientation, and the simplices of each dimension are kept in
//! lexicographic order of their vertex lists so indices are canonical.
//!
//! The standard subdivision of `p0...pd` uses the midpoints
//! `p_ij = (p_i + p_j) / 2` (`i <= j`, `p_ii = p_i`) partially ordered by
//! interval inclusion, `p_ij <= p_kl` iff `k <= i` and `j <= l`; its
//! d-simplices are the maximal increasing chains. In the subdivided complex
//! the old vertices keep their indices and midpoints are appended sorted by
//! `(j - i, i)`. That order restricts to the chain order on every child, so
//! each child's vertices are again listed along its chain and iterated
//! subdivision only produces finitely many shapes (the fullness floor holds).

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::linalg;
use crate::{Error, Result};

/// Absolute tolerance for containment tests, in ambient units.
pub const GEOMETRY_TOL: f64 = 1e-9;

/// Vertex list with an orientation sign.
type OrientedCell = (Vec<usize>, i8);

/// Simplices whose fullness falls below this are treated as degenerate.
const DEGENERACY_TOL: f64 = 1e-12;

/// A simplex of a complex together with its cached measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub volume: f64,
    pub diam: f64,
}

impl Simplex {
    /// `volume / diam^dim`.
    pub fn fullness(&self) -> Result<f64> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("fullness is undefined for vertices".into()));
        }
        if self.diam <= 0.0 || self.volume <= 0.0 {
            return Err(Error::DegenerateSimplex { dim: self.dim, vertices: self.vertices.clone() });
        }
        Ok(self.volume / self.diam.powi(self.dim as i32))
    }
}

/// Fullness of the simplex spanned by `points`.
pub fn fullness_of(points: &[&[f64]]) -> Result<f64> {
    let dim = points.len().saturating_sub(1);
    Simplex {
        dim,
        vertices: (0..points.len()).collect(),
        volume: linalg::simplex_volume(points),
        diam: linalg::diameter(points),
    }
    .fullness()
}

/// A finite simplicial complex embedded in `R^n`.
pub struct Complex {
    n: usize,
    points: Vec<Vec<f64>>,
    cells: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    volumes: Vec<Vec<f64>>,
    diams: Vec<Vec<f64>>,
    boundary: Vec<Vec<Vec<(usize, i8)>>>,
    refined: OnceLock<Arc<Subdivision>>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<usize> = self.cells.iter().map(Vec::len).collect();
        f.debug_struct("Complex").field("n", &self.n).field("cells", &counts).finish()
    }
}

/// One level of standard subdivision: the refined complex plus, for every
/// simplex of the parent, its same-dimensional children with the orientation
/// sign of each child relative to the parent.
#[derive(Debug)]
pub struct Subdivision {
    pub complex: Arc<Complex>,
    children: Vec<Vec<Vec<(usize, i8)>>>,
}

impl Subdivision {
    pub fn children(&self, dim: usize, index: usize) -> &[(usize, i8)] {
        &self.children[dim][index]
    }
}

impl Complex {
    /// Builds the complex generated by `simplices` (closed under faces).
    ///
    /// Every vertex becomes a 0-cell even if no simplex uses it. Simplices
    /// with repeated vertices or zero volume are rejected.
    pub fn new(n: usize, points: Vec<Vec<f64>>, simplices: &[Vec<usize>]) -> Result<Complex> {
        for (i, p) in points.iter().enumerate() {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput(format!("vertex {i} has non-finite coordinates")));
            }
        }
        let mut tops = Vec::with_capacity(simplices.len());
        for s in simplices {
            let mut v = s.clone();
            v.sort_unstable();
            if v.is_empty() || v.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("simplex {s:?} has repeated or no vertices")));
            }
            if v.len() > n + 1 {
                return Err(Error::InvalidInput(format!("simplex {s:?} cannot embed in R^{n}")));
            }
            if let Some(&bad) = v.iter().find(|&&i| i >= points.len()) {
                return Err(Error::InvalidInput(format!("vertex index {bad} out of range")));
            }
            tops.push(v);
        }
        Complex::assemble(n, points, tops, true)
    }

    pub(crate) fn assemble(n: usize, points: Vec<Vec<f64>>, tops: Vec<Vec<usize>>, check: bool) -> Result<Complex> {
        let top_dim = tops.iter().map(|s| s.len() - 1).max().unwrap_or(0);
        let mut sets: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); top_dim + 1];
        for s in &tops {
            let k = s.len();
            // every nonempty subset of a sorted list is sorted
            for mask in 1u32..(1u32 << k) {
                let face: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| s[b]).collect();
                sets[face.len() - 1].insert(face);
            }
        }
        sets[0].extend((0..points.len()).map(|i| vec![i]));
        let cells: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let lookup = cells.iter().map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect()).collect();
        let mut volumes = Vec::with_capacity(cells.len());
        let mut diams = Vec::with_capacity(cells.len());
        for (d, list) in cells.iter().enumerate() {
            let mut vols = Vec::with_capacity(list.len());
            let mut ds = Vec::with_capacity(list.len());
            for s in list {
                let pts: Vec<&[f64]> = s.iter().map(|&i| points[i].as_slice()).collect();
                let vol = linalg::simplex_volume(&pts);
                let diam = linalg::diameter(&pts);
                if check && d > 0 && (diam <= 0.0 || vol / diam.powi(d as i32) <= DEGENERACY_TOL) {
                    return Err(Error::DegenerateSimplex { dim: d, vertices: s.clone() });
                }
                vols.push(vol);
                ds.push(diam);
            }
            volumes.push(vols);
            diams.push(ds);
        }
        let mut complex =
            Complex { n, points, cells, lookup, volumes, diams, boundary: Vec::new(), refined: OnceLock::new() };
        complex.boundary = (0..complex.cells.len())
            .map(|d| {
                if d == 0 {
                    return vec![Vec::new(); complex.cells[0].len()];
                }
                complex.cells[d]
                    .iter()
                    .map(|s| {
                        (0..s.len())
                            .map(|skip| {
                                let face: Vec<usize> =
                                    s.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &v)| v).collect();
                                let sign = if skip % 2 == 0 { 1 } else { -1 };
                                (complex.lookup[d - 1][&face], sign)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(complex)
    }

    /// Ambient dimension.
    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn top_dim(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, v: usize) -> &[f64] {
        &self.points[v]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    pub fn simplices(&self, dim: usize) -> &[Vec<usize>] {
        self.cells.get(dim).map_or(&[], |c| c.as_slice())
    }

    pub fn vertices_of(&self, dim: usize, index: usize) -> &[usize] {
        &self.cells[dim][index]
    }

    pub fn simplex(&self, dim: usize, index: usize) -> Simplex {
        Simplex {
            dim,
            vertices: self.cells[dim][index].clone(),
            volume: self.volumes[dim][index],
            diam: self.diams[dim][index],
        }
    }

    /// Index of the simplex with the given vertex set, if present.
    pub fn find(&self, vertices: &[usize]) -> Option<(usize, i8)> {
        let d = vertices.len().checked_sub(1)?;
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let idx = *self.lookup.get(d)?.get(&sorted)?;
        Some((idx, linalg::sort_sign(vertices)))
    }

    pub fn volume(&self, dim: usize, index: usize) -> f64 {
        self.volumes[dim][index]
    }

    pub fn diam(&self, dim: usize, index: usize) -> f64 {
        self.diams[dim][index]
    }

    pub fn coords_of(&self, dim: usize, index: usize) -> Vec<&[f64]> {
        self.cells[dim][index].iter().map(|&v| self.points[v].as_slice()).collect()
    }

    pub fn barycenter(&self, dim: usize, index: usize) -> Vec<f64> {
        linalg::barycenter(&self.coords_of(dim, index))
    }

    /// Signed faces of a simplex: `(face index, (-1)^i)` for the face that
    /// omits the i-th vertex.
    pub fn boundary_faces(&self, dim: usize, index: usize) -> &[(usize, i8)] {
        &self.boundary[dim][index]
    }

    /// Dense signed incidence matrix of `d`-simplices in `(d-1)`-faces,
    /// rows indexed by faces.
    pub fn boundary_matrix(&self, dim: usize) -> Vec<Vec<i64>> {
        let rows = if dim == 0 { 0 } else { self.count(dim - 1) };
        let mut m = vec![vec![0i64; self.count(dim)]; rows];
        if dim > 0 {
            for (j, faces) in self.boundary[dim].iter().enumerate() {
                for &(f, s) in faces {
                    m[f][j] += s as i64;
                }
            }
        }
        m
    }

    /// For every `(d-1)`-simplex, the `d`-simplices having it as a face.
    pub fn cofaces(&self, dim: usize) -> Vec<Vec<(usize, i8)>> {
        let mut out = vec![Vec::new(); self.count(dim.saturating_sub(1))];
        if dim == 0 {
            return out;
        }
        for (j, faces) in self.boundary[dim].iter().enumerate() {
            for &(f, s) in faces {
                out[f].push((j, s));
            }
        }
        out
    }

    /// Largest diameter over all simplices.
    pub fn mesh(&self) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyComplex);
        }
        Ok(self.diams.iter().flatten().copied().fold(0.0, f64::max))
    }

    /// Smallest fullness over the simplices of positive dimension.
    pub fn min_fullness(&self) -> Option<f64> {
        (1..self.cells.len())
            .flat_map(|d| (0..self.cells[d].len()).map(move |i| self.volumes[d][i] / self.diams[d][i].powi(d as i32)))
            .reduce(f64::min)
    }

    /// The standard subdivision, computed once and cached.
    pub fn subdivision(&self) -> &Arc<Subdivision> {
        self.refined.get_or_init(|| Arc::new(self.subdivide()))
    }

    /// The `levels`-fold iterated standard subdivision.
    pub fn refine(self: &Arc<Self>, levels: usize) -> Arc<Complex> {
        let mut k = Arc::clone(self);
        for _ in 0..levels {
            k = Arc::clone(&k.subdivision().complex);
        }
        k
    }

    fn subdivide(&self) -> Subdivision {
        let v0 = self.points.len();
        let mut points = self.points.clone();
        let mut edges: Vec<(usize, &Vec<usize>)> = self.simplices(1).iter().enumerate().collect();
        edges.sort_by_key(|(_, e)| (e[1] - e[0], e[0]));
        let mut midpoint = vec![0usize; edges.len()];
        for (rank, (idx, e)) in edges.iter().enumerate() {
            midpoint[*idx] = v0 + rank;
            points.push(self.points[e[0]].iter().zip(&self.points[e[1]]).map(|(a, b)| 0.5 * (a + b)).collect());
        }
        let templates: Vec<Template> = (0..self.cells.len()).map(Template::new).collect();
        let global = |s: &[usize], (i, j): (usize, usize)| -> usize {
            if i == j {
                s[i]
            } else {
                midpoint[self.lookup[1][&vec![s[i], s[j]]]]
            }
        };
        let mut raw_children: Vec<Vec<Vec<OrientedCell>>> = Vec::with_capacity(self.cells.len());
        let mut tops = Vec::new();
        for (d, list) in self.cells.iter().enumerate() {
            let mut per = Vec::with_capacity(list.len());
            for s in list {
                let kids: Vec<OrientedCell> = templates[d]
                    .children
                    .iter()
                    .map(|(keys, sign)| (keys.iter().map(|&k| global(s, k)).collect(), *sign))
                    .collect();
                tops.extend(kids.iter().map(|(v, _)| v.clone()));
                per.push(kids);
            }
            raw_children.push(per);
        }
        let complex = Complex::assemble(self.n, points, tops, false).expect("subdivision of a valid complex is valid");
        let children = raw_children
            .into_iter()
            .enumerate()
            .map(|(d, per)| {
                per.into_iter()
                    .map(|kids| {
                        kids.into_iter()
                            .map(|(v, sign)| {
                                debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
                                (complex.lookup[d][&v], sign)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Subdivision { complex: Arc::new(complex), children }
    }

    /// Checks that no top-dimensional simplex has its barycenter in the
    /// relative interior of another top-dimensional simplex.
    pub fn check_disjoint_interiors(&self) -> Result<()> {
        let d = self.top_dim();
        let count = self.count(d);
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..count)
            .map(|i| {
                let pts = self.coords_of(d, i);
                let lo = (0..self.n).map(|k| pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..self.n).map(|k| pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
                (lo, hi)
            })
            .collect();
        for a in 0..count {
            let c = self.barycenter(d, a);
            for (b, (lo, hi)) in boxes.iter().enumerate() {
                if a == b {
                    continue;
                }
                if (0..self.n).any(|k| c[k] < lo[k] - GEOMETRY_TOL || c[k] > hi[k] + GEOMETRY_TOL) {
                    continue;
                }
                if point_in_open_simplex(&self.coords_of(d, b), &c) {
                    return Err(Error::InvalidInput(format!(
                        "top simplices {:?} and {:?} overlap",
                        self.cells[d][a], self.cells[d][b]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Closure of the given `dim`-simplices as a standalone complex.
    ///
    /// Vertices are renumbered monotonically, so the vertex order (and hence
    /// every orientation) is preserved. Returns the complex and, for each
    /// requested simplex, its index in the new complex.
    pub fn subcomplex(&self, dim: usize, indices: &[usize]) -> (Complex, Vec<usize>) {
        let used: BTreeSet<usize> = indices.iter().flat_map(|&i| self.cells[dim][i].iter().copied()).collect();
        let renumber: HashMap<usize, usize> = used.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let points = used.iter().map(|&v| self.points[v].clone()).collect();
        let tops: Vec<Vec<usize>> =
            indices.iter().map(|&i| self.cells[dim][i].iter().map(|v| renumber[v]).collect()).collect();
        let sub = Complex::assemble(self.n, points, tops.clone(), false).expect("subcomplex of a valid complex");
        let map = tops.iter().map(|t| sub.lookup[dim][t]).collect();
        (sub, map)
    }
}

/// Smallest fullness over every simplex of positive dimension in the
/// subdivisions `S_1 K, ..., S_{m_max} K`.
pub fn fullness_floor(complex: &Arc<Complex>, m_max: usize) -> Result<f64> {
    if m_max == 0 {
        return Err(Error::InvalidInput("fullness floor needs at least one level".into()));
    }
    if complex.top_dim() == 0 {
        return Err(Error::InvalidInput("complex has no simplices of positive dimension".into()));
    }
    let mut floor = f64::INFINITY;
    let mut k = Arc::clone(complex);
    for _ in 0..m_max {
        k = Arc::clone(&k.subdivision().complex);
        floor = floor.min(k.min_fullness().expect("positive dimension"));
    }
    Ok(floor)
}

/// Spatial hash used to identify vertices of different complexes that sit at
/// the same point (within [`GEOMETRY_TOL`]).
pub(crate) struct VertexLocator<'a> {
    points: &'a [Vec<f64>],
    grid: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> VertexLocator<'a> {
    const CELL: f64 = 1e-6;

    pub fn new(points: &'a [Vec<f64>]) -> Self {
        let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            grid.entry(Self::key(p)).or_default().push(i);
        }
        VertexLocator { points, grid }
    }

    fn key(p: &[f64]) -> Vec<i64> {
        p.iter().map(|c| (c / Self::CELL).floor() as i64).collect()
    }

    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.scan(x, |d, i, (bd, bi)| d < bd || (d == bd && i < bi))
    }

    /// Lowest-numbered point within tolerance of `x`.
    pub fn locate_lowest(&self, x: &[f64]) -> Option<usize> {
        self.scan(x, |_, i, (_, bi)| i < bi)
    }

    fn scan(&self, x: &[f64], better: impl Fn(f64, usize, (f64, usize)) -> bool) -> Option<usize> {
        let base = Self::key(x);
        let n = base.len();
        let mut best: Option<(f64, usize)> = None;
        for code in 0..3usize.pow(n as u32) {
            let mut key = base.clone();
            let mut c = code;
            for k in key.iter_mut() {
                *k += (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(list) = self.grid.get(&key) {
                for &i in list {
                    let d = linalg::dist(&self.points[i], x);
                    if d <= GEOMETRY_TOL && best.is_none_or(|b| better(d, i, b)) {
                        best = Some((d, i));
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }
}

/// True when `x` lies in the relative interior of the simplex (barycentric
/// coordinates all above tolerance and `x` in its affine span).
pub(crate) fn point_in_open_simplex(points: &[&[f64]], x: &[f64]) -> bool {
    let (lambda, residual) = linalg::barycentric(points, x);
    residual <= GEOMETRY_TOL && lambda.iter().all(|&l| l > GEOMETRY_TOL)
}

/// Children of the standard subdivision of a reference d-simplex, each as
/// vertex keys `(i, j)` in stored order plus the orientation sign relative to
/// the parent.
#[derive(Clone, Debug)]
pub(crate) struct Template {
    pub children: Vec<(Vec<(usize, usize)>, i8)>,
}

impl Template {
    pub fn new(d: usize) -> Template {
        let keys: Vec<(usize, usize)> = (0..=d).flat_map(|i| (i..=d).map(move |j| (i, j))).collect();
        // p_ij < p_kl strictly: [i, j] is a proper subinterval of [k, l]
        let below = |a: (usize, usize), b: (usize, usize)| a != b && b.0 <= a.0 && a.1 <= b.1;
        let mut chains: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut stack: Vec<Vec<(usize, usize)>> = keys.iter().map(|&k| vec![k]).collect();
        while let Some(chain) = stack.pop() {
            if chain.len() == d + 1 {
                chains.push(chain);
                continue;
            }
            let last = *chain.last().unwrap();
            for &k in &keys {
                if below(last, k) {
                    let mut next = chain.clone();
                    next.push(k);
                    stack.push(next);
                }
            }
        }
        // stored order is the chain order: by interval length, then start
        let rank = |k: (usize, usize)| (k.1 - k.0, k.0);
        let mut children: Vec<(Vec<(usize, usize)>, i8)> = chains
            .into_iter()
            .map(|mut chain| {
                chain.sort_by_key(|&k| rank(k));
                let sign = Template::orientation(d, &chain);
                (chain, sign)
            })
            .collect();
        children.sort();
        Template { children }
    }

    /// Sign of the child relative to the parent, from barycentric coordinates
    /// (`p_ij` has weight 1/2 on `e_i` and `e_j`).
    fn orientation(d: usize, chain: &[(usize, usize)]) -> i8 {
        if d == 0 {
            return 1;
        }
        let bary = |(i, j): (usize, usize)| -> Vec<f64> {
            let mut v = vec![0.0; d + 1];
            v[i] += 0.5;
            v[j] += 0.5;
            v
        };
        let base = bary(chain[0]);
        let m = nalgebra::DMatrix::from_fn(d, d, |r, c| bary(chain[r + 1])[c + 1] - base[c + 1]);
        if m.determinant() > 0.0 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_triangle() -> Arc<Complex> {
        Arc::new(Complex::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![0, 1, 2]]).unwrap())
    }

    fn equilateral() -> Arc<Complex> {
        Arc::new(
            Complex::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]], &[vec![0, 1, 2]])
                .unwrap(),
        )
    }

    #[test]
    fn mesh_examples() {
        let seg = Complex::new(1, vec![vec![0.0], vec![1.0]], &[vec![0, 1]]).unwrap();
        assert_eq!(seg.mesh().unwrap(), 1.0);
        let square = Complex::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            &[vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        assert!((square.mesh().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let l = 3.0;
        let seg = Arc::new(Complex::new(1, vec![vec![0.0], vec![l]], &[vec![0, 1]]).unwrap());
        // enumerate the subdivided segments and take the largest diameter
        let sub = seg.refine(1);
        let oracle = (0..sub.count(1)).map(|i| sub.diam(1, i)).fold(0.0, f64::max);
        assert_eq!(sub.mesh().unwrap(), oracle);
        assert_eq!(oracle, l / 2.0);
        let empty = Complex::new(2, vec![], &[]).unwrap();
        assert!(matches!(empty.mesh(), Err(Error::EmptyComplex)));
    }

    #[test]
    fn fullness_examples() {
        let seg = Complex::new(1, vec![vec![0.0], vec![2.5]], &[vec![0, 1]]).unwrap();
        assert!((seg.simplex(1, 0).fullness().unwrap() - 1.0).abs() < 1e-15);
        // area of the equilateral triangle of side 1 is sqrt(3)/4
        let eq = equilateral();
        assert!((eq.simplex(2, 0).fullness().unwrap() - 3f64.sqrt() / 4.0).abs() < 1e-12);
        // Gram determinant of legs (1,0),(0,1) is 1, area 1/2, diam sqrt 2
        let rt = unit_triangle();
        assert!((rt.simplex(2, 0).fullness().unwrap() - 0.25).abs() < 1e-12);
        assert!(rt.simplex(0, 0).fullness().is_err());
    }

    #[test]
    fn degenerate_rejected() {
        let r = Complex::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]], &[vec![0, 1, 2]]);
        assert!(matches!(r, Err(Error::DegenerateSimplex { dim: 2, .. })));
        let r = Complex::new(2, vec![vec![0.0, 0.0], vec![0.0, 0.0]], &[vec![0, 1]]);
        assert!(r.is_err());
        let r = Complex::new(2, vec![vec![0.0, 0.0]], &[vec![0, 0]]);
        assert!(r.is_err());
    }

    #[test]
    fn segment_subdivision_by_hand() {
        let seg = Arc::new(Complex::new(1, vec![vec![0.0], vec![1.0]], &[vec![0, 1]]).unwrap());
        let sub = seg.subdivision();
        let k = &sub.complex;
        assert_eq!(k.num_vertices(), 3);
        assert_eq!(k.point(2), &[0.5]);
        assert_eq!(k.simplices(1), &[vec![0, 2], vec![1, 2]]);
        // p0 m keeps the orientation, p1 m reverses it (stored order is 1 < 2)
        let kids = sub.children(1, 0);
        assert_eq!(kids, &[(0, 1), (1, -1)]);
    }

    #[test]
    fn triangle_subdivision_has_four_children() {
        // maximal increasing chains: start at some p_ii and grow the
        // interval one step left or right, 2^d of them
        let t = Template::new(2);
        assert_eq!(t.children.len(), 4);
        assert_eq!(Template::new(3).children.len(), 8);
        let tri = unit_triangle();
        let sub = tri.subdivision();
        assert_eq!(sub.complex.count(2), 4);
        let total: f64 = sub.children(2, 0).iter().map(|&(c, _)| sub.complex.volume(2, c)).sum();
        assert!((total - 0.5).abs() < 1e-15);
        sub.complex.check_disjoint_interiors().unwrap();
    }

    #[test]
    fn boundary_squared_vanishes() {
        let tet = Arc::new(
            Complex::new(
                3,
                vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
                &[vec![0, 1, 2, 3]],
            )
            .unwrap(),
        );
        for k in [Arc::clone(&tet), tet.refine(1), tet.refine(2)] {
            for d in 2..=3 {
                let a = k.boundary_matrix(d - 1);
                let b = k.boundary_matrix(d);
                for row in &a {
                    for j in 0..b[0].len() {
                        let s: i64 = (0..b.len()).map(|m| row[m] * b[m][j]).sum();
                        assert_eq!(s, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn mesh_halves_on_triangle() {
        // the first level keeps an interior median; from then on every level
        // is similar to the previous one at half scale
        let tri = equilateral();
        let meshes: Vec<f64> = (0..=6).map(|m| tri.refine(m).mesh().unwrap()).collect();
        assert!(meshes[1] < meshes[0]);
        for m in 1..6 {
            assert!((meshes[m + 1] - meshes[m] / 2.0).abs() < 1e-12, "level {m}: {meshes:?}");
        }
    }

    #[test]
    fn fullness_floor_examples() {
        let seg = Arc::new(Complex::new(1, vec![vec![0.0], vec![1.0]], &[vec![0, 1]]).unwrap());
        assert_eq!(fullness_floor(&seg, 5).unwrap(), 1.0);
        // enumerate every level separately: the floor is reached at m = 1
        // and repeats at every later level
        let eq = equilateral();
        let per_level: Vec<f64> = (1..=6).map(|m| eq.refine(m).min_fullness().unwrap()).collect();
        let floor3 = fullness_floor(&eq, 3).unwrap();
        assert!(floor3 > 0.0);
        for &f in &per_level {
            assert!(f >= floor3 - 1e-12 && (f - floor3).abs() < 1e-12);
        }
        // right triangle: the child (1,0), (1/2,1/2), (0,1/2) has area 1/8 and
        // diameter^2 5/4, fullness exactly 1/10
        let rt = unit_triangle();
        let floor = fullness_floor(&rt, 4).unwrap();
        assert!((floor - 0.1).abs() < 1e-12);
        assert!(fullness_floor(&rt, 0).is_err());
    }

    #[test]
    fn volume_additivity_and_tiling() {
        let tri = unit_triangle();
        let mut k = Arc::clone(&tri);
        for _ in 0..4 {
            let sub = Arc::clone(k.subdivision());
            for p in 0..k.count(2) {
                let parent = k.coords_of(2, p);
                let kids = sub.children(2, p);
                let total: f64 = kids.iter().map(|&(c, _)| sub.complex.volume(2, c)).sum();
                assert!((total - k.volume(2, p)).abs() <= 1e-12 * k.volume(2, p));
                for &(c, _) in kids {
                    assert!(point_in_open_simplex(&parent, &sub.complex.barycenter(2, c)));
                }
            }
            k = Arc::clone(&sub.complex);
        }
    }

    #[test]
    fn subdivision_respects_orientation() {
        // signed volume of each child, measured with its sign, is positive
        let tri = unit_triangle();
        let sub = tri.subdivision();
        for &(c, s) in sub.children(2, 0) {
            let p = sub.complex.coords_of(2, c);
            let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
            assert_eq!(det.signum() as i8, s);
        }
    }

    #[test]
    fn midpoints_ordered_by_gap() {
        let tri = unit_triangle();
        let k = &tri.subdivision().complex;
        // edges (0,1), (1,2) have gap 1 and come before (0,2)
        assert_eq!(k.point(3), &[0.5, 0.0]);
        assert_eq!(k.point(4), &[0.5, 0.5]);
        assert_eq!(k.point(5), &[0.0, 0.5]);
    }

    #[test]
    fn find_reports_permutation_sign() {
        let tri = unit_triangle();
        assert_eq!(tri.find(&[0, 1, 2]), Some((0, 1)));
        assert_eq!(tri.find(&[1, 0, 2]), Some((0, -1)));
        assert_eq!(tri.find(&[2, 1]), Some((2, -1)));
        assert_eq!(tri.find(&[0, 3]), None);
    }

    #[test]
    fn overlapping_tops_detected() {
        let k = Complex::new(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.2, 0.2]],
            &[vec![0, 1, 2], vec![0, 1, 3]],
        )
        .unwrap();
        assert!(k.check_disjoint_interiors().is_err());
    }
}
