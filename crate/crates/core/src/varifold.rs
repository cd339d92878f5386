//! Grassmannian planes and atomic varifolds.
//!
//! A varifold here is a finite sum of weighted atoms `(x, T, w)` on
//! `R^n x G(n, d)`. The varifold of a chain puts one atom at the barycenter
//! of each simplex of its (refined) support, carrying the simplex's plane and
//! its mass. Weak convergence is measured against a finite [`TestDictionary`]
//! of compactly supported bumps in `x` times polynomial functions of the
//! plane's projector.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::chain::{Chain, ChainMeasure, IntervalRegion};
use crate::linalg;
use crate::lipmap::LipMap;
use crate::{Error, Result};

/// Pivot tolerance for orthonormalising plane bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A d-dimensional linear subspace of `R^n`, kept as an orthonormal basis
/// and its orthogonal projector.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    n: usize,
    basis: Vec<Vec<f64>>,
    projector: DMatrix<f64>,
}

impl Plane {
    /// Span of `vectors` (which must be linearly independent) in `R^n`.
    pub fn span(n: usize, vectors: &[Vec<f64>]) -> Result<Plane> {
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        let basis = linalg::orthonormalize(vectors, ORTHONORMAL_TOL)
            .ok_or_else(|| Error::InvalidInput("plane spanning vectors are rank deficient".into()))?;
        Ok(Plane::from_orthonormal(n, basis))
    }

    fn from_orthonormal(n: usize, basis: Vec<Vec<f64>>) -> Plane {
        let mut projector = DMatrix::zeros(n, n);
        for b in &basis {
            for i in 0..n {
                for j in 0..n {
                    projector[(i, j)] += b[i] * b[j];
                }
            }
        }
        Plane { n, basis, projector }
    }

    /// The line through the origin at angle `theta` in the first two
    /// coordinates of `R^n`.
    pub fn line_at_angle(n: usize, theta: f64) -> Plane {
        let mut v = vec![0.0; n];
        v[0] = theta.cos();
        v[1] = theta.sin();
        Plane::from_orthonormal(n, vec![v])
    }

    /// Plane spanned by `d` coordinate axes.
    pub fn coordinate(n: usize, axes: &[usize]) -> Plane {
        let basis = axes
            .iter()
            .map(|&a| {
                let mut v = vec![0.0; n];
                v[a] = 1.0;
                v
            })
            .collect();
        Plane::from_orthonormal(n, basis)
    }

    /// Direction space of the simplex with the given vertices.
    pub fn of_simplex(points: &[&[f64]]) -> Result<Plane> {
        let n = points[0].len();
        let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| linalg::sub(p, points[0])).collect();
        Plane::span(n, &edges)
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Orthogonal projection `T_natural` onto the plane.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.projector[(i, j)] * v[j]).sum()).collect()
    }
}

/// Operator norm of the difference of the two projectors.
pub fn grassmann_dist(a: &Plane, b: &Plane) -> Result<f64> {
    if a.n != b.n || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let diff = &a.projector - &b.projector;
    let eig = SymmetricEigen::new(diff);
    let top = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok(top.min(1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub plane: Plane,
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Varifold {
    n: usize,
    d: usize,
    atoms: Vec<Atom>,
}

impl Varifold {
    pub fn empty(n: usize, d: usize) -> Varifold {
        Varifold { n, d, atoms: Vec::new() }
    }

    /// Atoms with nonpositive weight are rejected.
    pub fn new(n: usize, d: usize, atoms: Vec<Atom>) -> Result<Varifold> {
        for a in &atoms {
            if !(a.w > 0.0 && a.w.is_finite()) {
                return Err(Error::InvalidInput(format!("atom weight {} must be positive", a.w)));
            }
            if a.x.len() != n || a.plane.n != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.x.len() });
            }
            if a.plane.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: a.plane.dim() });
            }
        }
        Ok(Varifold { n, d, atoms })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }

    /// The weight measure `||V||`, i.e. the push-forward to `R^n`.
    pub fn weight_measure(&self) -> ChainMeasure {
        ChainMeasure { n: self.n, atoms: self.atoms.iter().map(|a| (a.x.clone(), a.w)).collect() }
    }

    /// `sum w phi(x, T)` in atom order.
    pub fn integrate(&self, phi: impl Fn(&[f64], &Plane) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.w * phi(&a.x, &a.plane)).sum()
    }

    /// Varifold of a chain: an atom per simplex of the support refined `k`
    /// times, at its barycenter, with its plane and weight `|g| vol`.
    pub fn of_chain(chain: &Chain, k: usize) -> Result<Varifold> {
        let n = chain.complex().ambient_dim();
        let d = chain.dim();
        if chain.is_zero() {
            return Ok(Varifold::empty(n, d));
        }
        let fine = chain.on_support_complex().refine(k);
        let complex = fine.complex();
        let mut atoms = Vec::with_capacity(fine.len());
        for (i, g) in fine.terms() {
            let pts = complex.coords_of(d, i);
            let plane = if d == 0 { Plane::from_orthonormal(n, vec![]) } else { Plane::of_simplex(&pts)? };
            atoms.push(Atom { x: linalg::barycenter(&pts), plane, w: g.norm() * complex.volume(d, i) });
        }
        Varifold::new(n, d, atoms)
    }

    /// Image under `f`: `(x, T, w) -> (f(x), Df(x) T, w J)` where `J` is the
    /// Jacobian of `Df(x)` restricted to `T`. Atoms with `J = 0` are dropped.
    pub fn pushforward(&self, f: &LipMap) -> Result<Varifold> {
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            let df = f.differential(&a.x)?;
            let images: Vec<Vec<f64>> = a.plane.basis.iter().map(|b| mat_vec(&df, b)).collect();
            let jac = linalg::gram_volume(&images);
            if jac <= 0.0 {
                continue;
            }
            let Some(basis) = linalg::orthonormalize(&images, ORTHONORMAL_TOL) else { continue };
            atoms.push(Atom { x: f.eval(&a.x), plane: Plane::from_orthonormal(self.n, basis), w: a.w * jac });
        }
        Ok(Varifold { n: self.n, d: self.d, atoms })
    }

    /// Blow-ups `(x - a) / r` with weights divided by `r^d`, each cut down
    /// to the open unit ball.
    pub fn tangent_blowups(&self, a: &[f64], radii: &[f64]) -> Result<Vec<Varifold>> {
        if radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("radii must be positive and strictly decreasing".into()));
        }
        Ok(radii
            .iter()
            .map(|&r| {
                let scale = r.powi(self.d as i32);
                let atoms = self
                    .atoms
                    .iter()
                    .filter_map(|atom| {
                        let y: Vec<f64> = atom.x.iter().zip(a).map(|(x, c)| (x - c) / r).collect();
                        (linalg::dot(&y, &y) < 1.0).then(|| Atom { x: y, plane: atom.plane.clone(), w: atom.w / scale })
                    })
                    .collect();
                Varifold { n: self.n, d: self.d, atoms }
            })
            .collect())
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// `max |V(phi) - W(phi)| / (1 + sup|phi|)` over the dictionary.
pub fn var_weak_distance(v: &Varifold, w: &Varifold, dict: &TestDictionary) -> Result<f64> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let a = dict.integrals(v);
    let b = dict.integrals(w);
    Ok(dict.functions().zip(a.iter().zip(&b)).map(|(f, (x, y))| (x - y).abs() / (1.0 + f.sup_norm)).fold(0.0, f64::max))
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    // pi^(d/2) / Gamma(d/2 + 1) via the two-step recurrence
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// Finite-radius density estimates `mu(B(a, r)) / (omega_d r^d)`.
pub fn density_estimates(mu: &ChainMeasure, a: &[f64], d: usize, radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| {
            let inside: f64 = mu.atoms.iter().filter(|(x, _)| linalg::dist(x, a) < r).map(|(_, w)| w).sum();
            inside / (unit_ball_volume(d) * r.powi(d as i32))
        })
        .collect()
}

/// For each radius: the mass of the orthogonal projection onto `x + T` of
/// the chain restricted to the ball `B(x, r)`, over the restricted mass.
///
/// Balls are approximated from inside by a union of boxes; restriction uses
/// depth [`crate::chain::DEFAULT_RESTRICT_DEPTH`].
pub fn projection_mass_ratio(chain: &Chain, x: &[f64], plane: &Plane, radii: &[f64]) -> Result<Vec<Result<f64>>> {
    let n = chain.complex().ambient_dim();
    if x.len() != n || plane.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    if plane.dim() != chain.dim() {
        return Err(Error::DimensionMismatch { expected: chain.dim(), found: plane.dim() });
    }
    let projection = LipMap::affine_projection(x, plane);
    Ok(radii
        .iter()
        .map(|&r| {
            let region = inscribed_ball(x, r, BALL_STRIPS)?;
            let restricted = chain.restrict(&region, crate::chain::DEFAULT_RESTRICT_DEPTH)?;
            let m = restricted.mass();
            if m <= 0.0 {
                return Err(Error::ZeroRestrictedMass { radius: r });
            }
            let image = projection.pushforward_chain(&restricted, 0)?;
            Ok(image.chain.mass() / m)
        })
        .collect())
}

const BALL_STRIPS: usize = 32;

/// Union of `2 * strips` boxes inscribed in the ball `B(center, r)`: slabs
/// along the first axis, each with a cube cross-section inside the ball.
/// Neighbouring slabs overlap by half a width so that no hyperplane
/// `x0 = const` inside the ball falls between two open boxes.
pub fn inscribed_ball(center: &[f64], r: f64, strips: usize) -> Result<IntervalRegion> {
    let n = center.len();
    if n == 1 {
        return IntervalRegion::single(vec![(center[0] - r, center[0] + r)]);
    }
    if strips == 0 || !(r > 0.0) {
        return Err(Error::InvalidInput("ball needs a positive radius and at least one strip".into()));
    }
    let width = r / strips as f64;
    let mut boxes = Vec::new();
    for k in 0..2 * strips {
        let lo = (-r + (k as f64 - 0.5) * width).max(-r);
        let hi = (-r + (k as f64 + 1.5) * width).min(r);
        let far = lo.abs().max(hi.abs());
        let h = (r * r - far * far).max(0.0).sqrt() / ((n - 1) as f64).sqrt();
        if h <= 0.0 {
            continue;
        }
        let mut b = vec![(center[0] + lo, center[0] + hi)];
        b.extend((1..n).map(|i| (center[i] - h, center[i] + h)));
        boxes.push(b);
    }
    IntervalRegion::new(boxes)
}

/// The factor a test function applies to the plane.
#[derive(Clone, Debug, PartialEq)]
pub enum PlaneFactor {
    One,
    /// Entry `(i, j)` of the projector.
    ProjectorEntry(usize, usize),
    /// Half the squared Frobenius distance between projectors.
    DistanceTo(Plane),
}

impl PlaneFactor {
    fn eval(&self, t: &Plane) -> f64 {
        match self {
            PlaneFactor::One => 1.0,
            PlaneFactor::ProjectorEntry(i, j) => t.projector[(*i, *j)],
            PlaneFactor::DistanceTo(r) => 0.5 * (&t.projector - &r.projector).norm_squared(),
        }
    }

    fn sup(&self, d: usize) -> f64 {
        match self {
            PlaneFactor::One | PlaneFactor::ProjectorEntry(..) => 1.0,
            PlaneFactor::DistanceTo(_) => d as f64,
        }
    }
}

/// One dictionary element `bump(x) * factor(T)`.
#[derive(Clone, Debug)]
pub struct TestFunction<'a> {
    pub center: &'a [f64],
    pub radius: f64,
    pub factor: &'a PlaneFactor,
    pub sup_norm: f64,
    /// Lipschitz constant in `x` (for a fixed plane).
    pub lipschitz: f64,
}

impl TestFunction<'_> {
    pub fn eval(&self, x: &[f64], t: &Plane) -> f64 {
        bump(x, self.center, self.radius) * self.factor.eval(t)
    }

    /// Value ignoring the plane factor; meaningful for position-only functions.
    pub fn eval_x(&self, x: &[f64]) -> f64 {
        bump(x, self.center, self.radius)
    }
}

/// `(1 - |x - c|^2 / rho^2)^2` inside the ball, zero outside. `C^1`, sup 1,
/// Lipschitz `8 / (3 sqrt(3) rho)`.
fn bump(x: &[f64], c: &[f64], rho: f64) -> f64 {
    let s: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / (rho * rho);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - s) * (1.0 - s)
    }
}

/// A finite family of test functions on `R^n x G(n, d)`: every bump center
/// paired with every plane factor.
#[derive(Clone, Debug)]
pub struct TestDictionary {
    n: usize,
    d: usize,
    centers: Vec<Vec<f64>>,
    radius: f64,
    factors: Vec<PlaneFactor>,
}

impl TestDictionary {
    /// The default dictionary: a 5 x 5 grid of bumps of radius 1.6 at unit
    /// spacing around the origin (in the first two coordinates).
    pub fn default_for(n: usize, d: usize) -> TestDictionary {
        Self::grid(n, d, 5, 1.0, 1.6).expect("default dictionary parameters are valid")
    }

    /// Looks up a dictionary by id; only `"default"` is defined.
    pub fn by_id(id: &str, n: usize, d: usize) -> Result<TestDictionary> {
        match id {
            "default" => Ok(Self::default_for(n, d)),
            _ => Err(Error::InvalidInput(format!("unknown dictionary {id:?}"))),
        }
    }

    /// Bumps centred on a `per_axis`-wide grid (in the first two coordinates)
    /// with the given spacing and radius, times the factors 1, every projector
    /// entry `(i <= j)`, and distance to each reference plane.
    pub fn grid(n: usize, d: usize, per_axis: usize, spacing: f64, radius: f64) -> Result<TestDictionary> {
        if n == 0 || d > n || !(radius > 0.0) {
            return Err(Error::InvalidInput("bad dictionary parameters".into()));
        }
        let offset = (per_axis as f64 - 1.0) / 2.0;
        let axes = n.min(2);
        let mut centers = Vec::new();
        for code in 0..per_axis.pow(axes as u32) {
            let mut c = vec![0.0; n];
            let mut k = code;
            for coord in c.iter_mut().take(axes) {
                *coord = ((k % per_axis) as f64 - offset) * spacing;
                k /= per_axis;
            }
            centers.push(c);
        }
        let mut factors = vec![PlaneFactor::One];
        for i in 0..n {
            for j in i..n {
                factors.push(PlaneFactor::ProjectorEntry(i, j));
            }
        }
        factors.extend(reference_planes(n, d).into_iter().map(PlaneFactor::DistanceTo));
        Ok(TestDictionary { n, d, centers, radius, factors })
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Radius of a ball about the origin containing every function's support.
    pub fn support_radius(&self) -> f64 {
        self.centers.iter().map(|c| linalg::dot(c, c).sqrt()).fold(0.0, f64::max) + self.radius
    }

    pub fn describe(&self) -> String {
        format!(
            "{} bumps (radius {}) x {} plane factors, support radius {:.4}",
            self.centers.len(),
            self.radius,
            self.factors.len(),
            self.support_radius()
        )
    }

    /// All functions, center-major.
    pub fn functions(&self) -> impl Iterator<Item = TestFunction<'_>> {
        let lip = 8.0 / (3.0 * 3f64.sqrt() * self.radius);
        self.centers.iter().flat_map(move |c| {
            self.factors.iter().map(move |f| TestFunction {
                center: c,
                radius: self.radius,
                factor: f,
                sup_norm: f.sup(self.d),
                lipschitz: lip * f.sup(self.d),
            })
        })
    }

    /// The functions that do not depend on the plane.
    pub fn position_functions(&self) -> Vec<TestFunction<'_>> {
        self.functions().filter(|f| matches!(f.factor, PlaneFactor::One)).collect()
    }

    /// `V(phi)` for every function, in [`Self::functions`] order.
    pub fn integrals(&self, v: &Varifold) -> Vec<f64> {
        let nf = self.factors.len();
        let mut out = vec![0.0; self.len()];
        for atom in &v.atoms {
            let mut factor_vals: Option<Vec<f64>> = None;
            for (ci, c) in self.centers.iter().enumerate() {
                let b = bump(&atom.x, c, self.radius);
                if b == 0.0 {
                    continue;
                }
                let vals =
                    factor_vals.get_or_insert_with(|| self.factors.iter().map(|f| f.eval(&atom.plane)).collect());
                for (fi, fv) in vals.iter().enumerate() {
                    out[ci * nf + fi] += atom.w * b * fv;
                }
            }
        }
        out
    }
}

/// Coordinate d-planes, plus the diagonal lines `e_i +- e_j` when `d = 1`.
fn reference_planes(n: usize, d: usize) -> Vec<Plane> {
    if d == 0 || d == n {
        return Vec::new();
    }
    let mut planes = Vec::new();
    let mut axes: Vec<usize> = (0..d).collect();
    loop {
        planes.push(Plane::coordinate(n, &axes));
        // next combination
        let mut i = d;
        while i > 0 && axes[i - 1] == n - d + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        axes[i - 1] += 1;
        for j in i..d {
            axes[j] = axes[j - 1] + 1;
        }
    }
    if d == 1 {
        let s = 0.5f64.sqrt();
        for i in 0..n {
            for j in i + 1..n {
                for sign in [1.0, -1.0] {
                    let mut v = vec![0.0; n];
                    v[i] = s;
                    v[j] = sign * s;
                    planes.push(Plane::from_orthonormal(n, vec![v]));
                }
            }
        }
    }
    planes
}
