//! Lipschitz maps `R^n -> R^n`, their approximate Jacobians, simplexwise
//! affine approximations and the induced pushforward of chains.
//!
//! The level-k pushforward subdivides the chain's support `k` times, sends
//! every vertex through the map and spans straight simplices on the images,
//! which is the chain image under the simplexwise affine approximation on
//! `S_k K`. Image simplices that collapse are dropped; image simplices with
//! the same vertex set are merged (and may cancel). Overlaps between image
//! simplices that are not vertex-identical are not resolved, so the reported
//! mass is an upper bound for the mass of the limit chain.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::chain::Chain;
use crate::coeff::GroupElement;
use crate::linalg;
use crate::simplicial::{point_in_open_simplex, Complex, VertexLocator, GEOMETRY_TOL};
use crate::varifold::Plane;
use crate::{Error, Result};

/// Step for central finite differences.
pub const FD_STEP: f64 = 1e-6;

type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
enum MapKind {
    Identity,
    Scale(f64),
    Rotation(f64),
    Affine {
        matrix: DMatrix<f64>,
        offset: Vec<f64>,
    },
    /// `(x0, x1) -> ((R + x1) cos(x0 / R), (R + x1) sin(x0 / R))`
    PolarWrap(f64),
    /// `x0 -> |x0|`
    Fold,
    /// `x + sum c x^e e_k` over terms `(k, c, e)`
    Polynomial(Vec<(usize, f64, Vec<u32>)>),
    Custom(Arc<MapFn>),
}

/// A Lipschitz map of `R^n` into itself.
#[derive(Clone)]
pub struct LipMap {
    name: String,
    n: usize,
    kind: MapKind,
    lip_bound: Option<f64>,
    domain: Option<Vec<(f64, f64)>>,
}

impl fmt::Debug for LipMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipMap")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("lip_bound", &self.lip_bound)
            .finish()
    }
}

impl LipMap {
    pub fn identity(n: usize) -> Self {
        Self::build("identity", n, MapKind::Identity, Some(1.0), None)
    }

    pub fn scale(n: usize, c: f64) -> Self {
        Self::build(&format!("scale:{c}"), n, MapKind::Scale(c), Some(c.abs()), None)
    }

    /// Rotation by `theta` in the first two coordinates.
    pub fn rotation(n: usize, theta: f64) -> Self {
        Self::build(&format!("rotation:{theta}"), n, MapKind::Rotation(theta), Some(1.0), None)
    }

    /// Wraps the horizontal axis around the circle of radius `r`. The declared
    /// bound 1.5 holds on the strip `|x1| <= r / 2`.
    pub fn polar_wrap(n: usize, r: f64) -> Self {
        let mut domain = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
        domain[1] = (-r / 2.0, r / 2.0);
        Self::build(&format!("polar_wrap:{r}"), n, MapKind::PolarWrap(r), Some(1.5), Some(domain))
    }

    /// Reflects the half-space `x0 < 0` onto `x0 > 0`.
    pub fn fold(n: usize) -> Self {
        Self::build("fold", n, MapKind::Fold, Some(1.0), None)
    }

    /// `x + sum c x^e e_k`; the declared bound holds on the cube `[-1, 1]^n`.
    pub fn polynomial(n: usize, terms: Vec<(usize, f64, Vec<u32>)>) -> Result<Self> {
        for (k, _, e) in &terms {
            if *k >= n || e.len() != n {
                return Err(Error::InvalidInput("polynomial term does not fit the ambient dimension".into()));
            }
        }
        // |d/dx_j (c x^e)| <= |c| e_j on the unit cube; bound ||Df|| by 1 + ||E||_F
        let mut entry = vec![vec![0.0; n]; n];
        for (k, c, e) in &terms {
            for j in 0..n {
                entry[*k][j] += c.abs() * e[j] as f64;
            }
        }
        let frob = entry.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let name = terms
            .iter()
            .map(|(k, c, e)| format!("{k}:{c}:{}", e.iter().map(u32::to_string).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join("+");
        Ok(Self::build(
            &format!("poly:{name}"),
            n,
            MapKind::Polynomial(terms),
            Some(1.0 + frob),
            Some(vec![(-1.0, 1.0); n]),
        ))
    }

    /// `x -> A x + b`, with the operator norm of `A` as Lipschitz bound.
    pub fn affine(matrix: DMatrix<f64>, offset: Vec<f64>) -> Result<Self> {
        let n = offset.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: matrix.nrows() });
        }
        let lip = matrix.clone().svd(false, false).singular_values.max();
        Ok(Self::build("affine", n, MapKind::Affine { matrix, offset }, Some(lip), None))
    }

    /// `y -> x + T(y - x)`, the orthogonal projection onto the affine plane
    /// through `x` parallel to `plane`.
    pub fn affine_projection(x: &[f64], plane: &Plane) -> Self {
        let p = plane.projector().clone();
        let px = plane.project(x);
        let offset: Vec<f64> = x.iter().zip(&px).map(|(a, b)| a - b).collect();
        let mut map = Self::affine(p, offset).expect("square projector");
        map.name = "projection".into();
        map.lip_bound = Some(1.0);
        map
    }

    /// A map given by a closure; differentials use central differences.
    pub fn from_fn(
        name: &str,
        n: usize,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        lip_bound: Option<f64>,
    ) -> Self {
        Self::build(name, n, MapKind::Custom(Arc::new(f)), lip_bound, None)
    }

    fn build(name: &str, n: usize, kind: MapKind, lip_bound: Option<f64>, domain: Option<Vec<(f64, f64)>>) -> Self {
        LipMap { name: name.to_string(), n, kind, lip_bound, domain }
    }

    /// Builtin maps by spec string: `identity`, `scale:c`, `rotation:theta`,
    /// `polar_wrap[:r]`, `fold`, and `poly:k:c:e0,e1,...[+...]`.
    pub fn from_spec(spec: &str, n: usize) -> Result<Self> {
        let (head, arg) = spec.split_once(':').map_or((spec, None), |(h, a)| (h, Some(a)));
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidInput(format!("map {head} needs a parameter")))?
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad parameter in {spec:?}")))
        };
        if n < 2 && matches!(head, "rotation" | "polar_wrap") {
            return Err(Error::InvalidInput(format!("{head} needs at least two dimensions")));
        }
        match head {
            "identity" => Ok(Self::identity(n)),
            "scale" => Ok(Self::scale(n, num(arg)?)),
            "rotation" => Ok(Self::rotation(n, num(arg)?)),
            "polar_wrap" => Ok(Self::polar_wrap(n, arg.map_or(Ok(1.0), |a| num(Some(a)))?)),
            "fold" => Ok(Self::fold(n)),
            "poly" => {
                let body = arg.ok_or_else(|| Error::InvalidInput("poly needs terms".into()))?;
                let terms = body
                    .split('+')
                    .map(|t| {
                        let parts: Vec<&str> = t.split(':').collect();
                        if parts.len() != 3 {
                            return Err(Error::InvalidInput(format!("bad polynomial term {t:?}")));
                        }
                        let k = parts[0].trim().parse().map_err(|_| Error::InvalidInput(format!("bad term {t:?}")))?;
                        let c = parts[1].trim().parse().map_err(|_| Error::InvalidInput(format!("bad term {t:?}")))?;
                        let e = parts[2]
                            .split(',')
                            .map(|x| x.trim().parse().map_err(|_| Error::InvalidInput(format!("bad term {t:?}"))))
                            .collect::<Result<Vec<u32>>>()?;
                        Ok((k, c, e))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::polynomial(n, terms)
            }
            _ => Err(Error::InvalidInput(format!("unknown map {spec:?}"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn lip_bound(&self) -> Option<f64> {
        self.lip_bound
    }

    /// Box on which the declared Lipschitz bound is valid (`None`: everywhere).
    pub fn domain(&self) -> Option<&[(f64, f64)]> {
        self.domain.as_deref()
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, MapKind::Identity | MapKind::Scale(_) | MapKind::Rotation(_) | MapKind::Affine { .. })
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        match &self.kind {
            MapKind::Identity => {}
            MapKind::Scale(c) => y.iter_mut().for_each(|v| *v *= c),
            MapKind::Rotation(t) => {
                let (s, c) = t.sin_cos();
                y[0] = c * x[0] - s * x[1];
                y[1] = s * x[0] + c * x[1];
            }
            MapKind::Affine { matrix, offset } => {
                for i in 0..self.n {
                    y[i] = offset[i] + (0..self.n).map(|j| matrix[(i, j)] * x[j]).sum::<f64>();
                }
            }
            MapKind::PolarWrap(r) => {
                let (s, c) = (x[0] / r).sin_cos();
                y[0] = (r + x[1]) * c;
                y[1] = (r + x[1]) * s;
            }
            MapKind::Fold => y[0] = x[0].abs(),
            MapKind::Polynomial(terms) => {
                for (k, c, e) in terms {
                    y[*k] += c * monomial(x, e);
                }
            }
            MapKind::Custom(f) => y = f(x),
        }
        y
    }

    /// Differential at `x`. Exact for builtin maps; the fold uses the
    /// right-sided derivative on its crease.
    pub fn differential(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if x.len() != self.n || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoDifferential(x.to_vec()));
        }
        let n = self.n;
        let mut m = DMatrix::identity(n, n);
        match &self.kind {
            MapKind::Identity => {}
            MapKind::Scale(c) => m *= *c,
            MapKind::Rotation(t) => {
                let (s, c) = t.sin_cos();
                m[(0, 0)] = c;
                m[(0, 1)] = -s;
                m[(1, 0)] = s;
                m[(1, 1)] = c;
            }
            MapKind::Affine { matrix, .. } => m = matrix.clone(),
            MapKind::PolarWrap(r) => {
                let (s, c) = (x[0] / r).sin_cos();
                let k = (r + x[1]) / r;
                m[(0, 0)] = -k * s;
                m[(1, 0)] = k * c;
                m[(0, 1)] = c;
                m[(1, 1)] = s;
            }
            MapKind::Fold => {
                if x[0] < 0.0 {
                    m[(0, 0)] = -1.0;
                }
            }
            MapKind::Polynomial(terms) => {
                for (k, c, e) in terms {
                    for j in 0..n {
                        if e[j] == 0 {
                            continue;
                        }
                        let mut de = e.clone();
                        de[j] -= 1;
                        m[(*k, j)] += c * e[j] as f64 * monomial(x, &de);
                    }
                }
            }
            MapKind::Custom(f) => {
                for j in 0..n {
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    xp[j] += FD_STEP;
                    xm[j] -= FD_STEP;
                    let (fp, fm) = (f(&xp), f(&xm));
                    if fp.len() != n || fm.len() != n {
                        return Err(Error::NoDifferential(x.to_vec()));
                    }
                    for i in 0..n {
                        m[(i, j)] = (fp[i] - fm[i]) / (2.0 * FD_STEP);
                    }
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NoDifferential(x.to_vec()));
                }
            }
        }
        Ok(m)
    }

    /// Largest ratio `|f(x) - f(y)| / |x - y|` over random pairs drawn from
    /// the box.
    pub fn sampled_lipschitz(&self, domain: &[(f64, f64)], pairs: usize, rng: &mut impl Rng) -> f64 {
        let mut best = 0.0f64;
        for _ in 0..pairs {
            let x: Vec<f64> = domain.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
            let y: Vec<f64> = domain.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
            let dxy = linalg::dist(&x, &y);
            if dxy > 0.0 {
                best = best.max(linalg::dist(&self.eval(&x), &self.eval(&y)) / dxy);
            }
        }
        best
    }

    /// Level-`k` pushforward of a chain.
    pub fn pushforward_chain(&self, chain: &Chain, k: usize) -> Result<Pushforward> {
        pushforward_chain(self, chain, k)
    }
}

fn monomial(x: &[f64], e: &[u32]) -> f64 {
    x.iter().zip(e).map(|(v, &p)| v.powi(p as i32)).product()
}

/// `ap J_d f(x)` on the plane spanned by the orthonormal `basis`: the product
/// of the singular values of `Df(x) B`.
pub fn approx_jacobian(f: &LipMap, x: &[f64], basis: &[Vec<f64>]) -> Result<f64> {
    let df = f.differential(x)?;
    let images: Vec<Vec<f64>> =
        basis.iter().map(|b| (0..f.n).map(|i| (0..f.n).map(|j| df[(i, j)] * b[j]).sum()).collect()).collect();
    Ok(linalg::gram_volume(&images))
}

/// The simplexwise affine interpolant of a map on `S_k K`.
#[derive(Clone, Debug)]
pub struct AffineApprox {
    pub complex: Arc<Complex>,
    pub images: Vec<Vec<f64>>,
}

impl AffineApprox {
    pub fn new(f: &LipMap, complex: &Arc<Complex>, k: usize) -> AffineApprox {
        let complex = complex.refine(k);
        let images = complex.points().iter().map(|p| f.eval(p)).collect();
        AffineApprox { complex, images }
    }

    /// `sum u_i(x) f(p_i)` over the top simplex containing `x`.
    pub fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.complex.top_dim();
        for s in 0..self.complex.count(d) {
            let pts = self.complex.coords_of(d, s);
            let (lambda, residual) = linalg::barycentric(&pts, x);
            if residual <= GEOMETRY_TOL && lambda.iter().all(|&l| l >= -GEOMETRY_TOL) {
                let verts = self.complex.vertices_of(d, s);
                let mut y = vec![0.0; self.images[0].len()];
                for (l, &v) in lambda.iter().zip(verts) {
                    y.iter_mut().zip(&self.images[v]).for_each(|(yi, fi)| *yi += l * fi);
                }
                return Some(y);
            }
        }
        None
    }

    /// Jacobian of the interpolant on one d-simplex: image volume over volume.
    pub fn simplex_jacobian(&self, dim: usize, idx: usize) -> f64 {
        let verts = self.complex.vertices_of(dim, idx);
        let pts: Vec<&[f64]> = verts.iter().map(|&v| self.images[v].as_slice()).collect();
        linalg::simplex_volume(&pts) / self.complex.volume(dim, idx)
    }

    /// The whole refined complex carried through the interpolant, with the
    /// given chains (on the unrefined complex) pushed along. Fails if any
    /// image simplex degenerates, i.e. the interpolant is not injective on
    /// some cell.
    pub fn push_with_ambient(&self, chains: &[&Chain], k: usize) -> Result<Vec<Chain>> {
        let tops: Vec<Vec<usize>> =
            (0..=self.complex.top_dim()).flat_map(|d| self.complex.simplices(d).to_vec()).collect();
        let image = Arc::new(Complex::new(self.complex.ambient_dim(), self.images.clone(), &tops)?);
        chains
            .iter()
            .map(|c| {
                let fine = c.refine(k);
                if !Arc::ptr_eq(fine.complex(), &self.complex) {
                    return Err(Error::IncompatibleComplexes("chain is not on the approximated complex".into()));
                }
                // identical vertex numbering, so simplex indices carry over
                Chain::from_coeffs(&image, fine.dim(), fine.group(), fine.terms())
            })
            .collect()
    }
}

/// `int_K |ap J_d fbar - ap J_d f| dH^d` with `d = top_dim(K)`, sampling `f`'s
/// Jacobian at each barycenter of `S_k K`.
pub fn jacobian_l1_error(f: &LipMap, complex: &Arc<Complex>, k: usize) -> Result<f64> {
    let approx = AffineApprox::new(f, complex, k);
    let fine = &approx.complex;
    let d = fine.top_dim();
    let mut total = 0.0;
    for s in 0..fine.count(d) {
        let pts = fine.coords_of(d, s);
        let plane = Plane::of_simplex(&pts)?;
        let exact = approx_jacobian(f, &linalg::barycenter(&pts), plane.basis())?;
        total += (approx.simplex_jacobian(d, s) - exact).abs() * fine.volume(d, s);
    }
    Ok(total)
}

/// Result of a level-k pushforward.
#[derive(Clone, Debug)]
pub struct Pushforward {
    pub chain: Chain,
    /// Number of image simplices dropped because they collapsed.
    pub dropped: usize,
    pub warning: Option<String>,
}

fn pushforward_chain(f: &LipMap, chain: &Chain, k: usize) -> Result<Pushforward> {
    let n = chain.complex().ambient_dim();
    if f.ambient_dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.ambient_dim() });
    }
    let d = chain.dim();
    let fine = chain.on_support_complex().refine(k);
    let source = fine.complex();
    // merge vertices whose images coincide so that identical image simplices
    // combine
    let raw: Vec<Vec<f64>> = source.points().iter().map(|p| f.eval(p)).collect();
    let mut merged: Vec<Vec<f64>> = Vec::new();
    let mut index = vec![0usize; raw.len()];
    let locator = VertexLocator::new(&raw);
    for (i, p) in raw.iter().enumerate() {
        let first = locator.locate_lowest(p).unwrap_or(i);
        if first < i {
            index[i] = index[first];
        } else {
            index[i] = merged.len();
            merged.push(p.clone());
        }
    }
    let mut terms: Vec<(Vec<usize>, GroupElement)> = Vec::new();
    let mut dropped = 0;
    for (i, g) in fine.terms() {
        let verts: Vec<usize> = source.vertices_of(d, i).iter().map(|&v| index[v]).collect();
        let mut sorted = verts.clone();
        sorted.sort_unstable();
        let repeated = sorted.windows(2).any(|w| w[0] == w[1]);
        let degenerate = repeated || {
            let pts: Vec<&[f64]> = verts.iter().map(|&v| merged[v].as_slice()).collect();
            d > 0 && crate::simplicial::fullness_of(&pts).map_or(true, |kappa| kappa <= 1e-12)
        };
        if degenerate {
            dropped += 1;
            continue;
        }
        terms.push((verts, g));
    }
    let tops: Vec<Vec<usize>> = terms
        .iter()
        .map(|(v, _)| {
            let mut s = v.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let image = Arc::new(Complex::assemble(n, merged, tops, false)?);
    let mut out = Chain::zero(&image, d, chain.group());
    if !terms.is_empty() {
        out = out.add(&Chain::from_simplices(&image, chain.group(), &terms)?)?;
    }
    let warning = (out.is_zero() && !chain.is_zero() && dropped > 0)
        .then(|| format!("all {dropped} image simplices degenerate; pushforward is zero"));
    Ok(Pushforward { chain: out, dropped, warning })
}

/// Estimate of `M(f# P) = lim M(f_k# P)` from levels `k - 1` and `k`. The
/// chord interpolant's mass error decays like `4^-k` for smooth maps, so one
/// Richardson step removes the leading term.
pub fn pushforward_mass_limit(f: &LipMap, chain: &Chain, k: usize) -> Result<f64> {
    let fine = f.pushforward_chain(chain, k)?.chain.mass();
    if k == 0 {
        return Ok(fine);
    }
    let coarse = f.pushforward_chain(chain, k - 1)?.chain.mass();
    Ok(fine + (fine - coarse) / 3.0)
}

/// `M(S - f# P)` at level `k`, on a common refinement of the two chains.
pub fn rectifiable_approx_error(s: &Chain, f: &LipMap, p: &Chain, k: usize) -> Result<f64> {
    if s.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: p.dim() });
    }
    let image = f.pushforward_chain(p, k)?.chain;
    let (a, b) = crate::chain::common_refinement(s, &image)?;
    Ok(a.sub(&b)?.mass())
}

/// `int ap J_d f(x, Tan) dmu_P(x)` by Gauss quadrature on each simplex of the
/// support refined `depth` times.
pub fn jacobian_mass_bound(f: &LipMap, chain: &Chain, depth: usize) -> Result<f64> {
    let d = chain.dim();
    if chain.is_zero() {
        return Ok(0.0);
    }
    let fine = chain.on_support_complex().refine(depth);
    let complex = fine.complex();
    let rule = quadrature_rule(d);
    let mut total = 0.0;
    for (i, g) in fine.terms() {
        let pts = complex.coords_of(d, i);
        let basis: Vec<Vec<f64>> = if d == 0 { vec![] } else { Plane::of_simplex(&pts)?.basis().to_vec() };
        let mut integral = 0.0;
        for (bary, weight) in &rule {
            let x: Vec<f64> =
                (0..complex.ambient_dim()).map(|c| bary.iter().zip(&pts).map(|(b, p)| b * p[c]).sum()).collect();
            integral += weight * approx_jacobian(f, &x, &basis)?;
        }
        total += g.norm() * complex.volume(d, i) * integral;
    }
    Ok(total)
}

/// Barycentric quadrature points and weights (summing to 1) on a d-simplex.
fn quadrature_rule(d: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        0 => vec![(vec![1.0], 1.0)],
        1 => {
            // 5-point Gauss-Legendre on [0, 1]
            let nodes = [
                (0.0, 128.0 / 225.0),
                (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.906_179_845_938_664, 0.236_926_885_056_189_1),
                (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            ];
            nodes
                .iter()
                .map(|&(t, w)| {
                    let s = 0.5 * (1.0 + t);
                    (vec![1.0 - s, s], 0.5 * w)
                })
                .collect()
        }
        2 => {
            // 7-point degree-5 rule
            let a1 = 0.059_715_871_789_769_8;
            let b1 = 0.470_142_064_105_115_1;
            let a2 = 0.797_426_985_353_087_3;
            let b2 = 0.101_286_507_323_456_3;
            let w1 = 0.132_394_152_788_506_2;
            let w2 = 0.125_939_180_544_827_2;
            vec![
                (vec![1.0 / 3.0; 3], 0.225),
                (vec![a1, b1, b1], w1),
                (vec![b1, a1, b1], w1),
                (vec![b1, b1, a1], w1),
                (vec![a2, b2, b2], w2),
                (vec![b2, a2, b2], w2),
                (vec![b2, b2, a2], w2),
            ]
        }
        _ => vec![(vec![1.0 / (d + 1) as f64; d + 1], 1.0)],
    }
}

/// True when `x` is in the open interior of some top simplex of `complex`.
pub fn interior_point(complex: &Complex, x: &[f64]) -> bool {
    let d = complex.top_dim();
    (0..complex.count(d)).any(|s| point_in_open_simplex(&complex.coords_of(d, s), x))
}
