//! Polyhedral chains over a complex.
//!
//! A chain assigns a coefficient to each d-simplex of its complex, relative
//! to the simplex's stored orientation. Because the cells of a complex have
//! disjoint interiors, the mass of a chain is the plain sum
//! `sum |g_i| vol(D_i)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeff::{Group, GroupElement};
use crate::linalg;
use crate::simplicial::{Complex, VertexLocator};
use crate::varifold::TestDictionary;
use crate::{Error, Result};

/// Default number of subdivision levels used to resolve straddling simplices.
pub const DEFAULT_RESTRICT_DEPTH: usize = 6;

/// Refinement levels tried on each side when searching for a common complex.
pub const COMMON_REFINEMENT_BUDGET: usize = 8;

/// Upper bound on top simplices of any complex built during a refinement search.
const MAX_REFINED_CELLS: usize = 4_000_000;

#[derive(Clone, Debug)]
pub struct Chain {
    complex: Arc<Complex>,
    dim: usize,
    group: Group,
    coeffs: BTreeMap<usize, GroupElement>,
}

impl Chain {
    pub fn zero(complex: &Arc<Complex>, dim: usize, group: Group) -> Chain {
        Chain { complex: Arc::clone(complex), dim, group, coeffs: BTreeMap::new() }
    }

    /// Builds a chain from `(simplex index, coefficient)` pairs; repeated
    /// indices are summed and zeros dropped.
    pub fn from_coeffs(
        complex: &Arc<Complex>,
        dim: usize,
        group: Group,
        coeffs: impl IntoIterator<Item = (usize, GroupElement)>,
    ) -> Result<Chain> {
        if dim > complex.top_dim() {
            return Err(Error::DimensionMismatch { expected: complex.top_dim(), found: dim });
        }
        let mut chain = Chain::zero(complex, dim, group);
        for (idx, g) in coeffs {
            if idx >= complex.count(dim) {
                return Err(Error::InvalidInput(format!("{dim}-simplex index {idx} out of range")));
            }
            chain.accumulate(idx, g)?;
        }
        Ok(chain)
    }

    /// Builds a chain from oriented vertex lists; a list given in odd
    /// permutation of the stored order contributes with the opposite sign.
    pub fn from_simplices(complex: &Arc<Complex>, group: Group, terms: &[(Vec<usize>, GroupElement)]) -> Result<Chain> {
        let dim = terms.first().map_or(0, |(v, _)| v.len().saturating_sub(1));
        let mut chain = Chain::zero(complex, dim, group);
        for (verts, g) in terms {
            if verts.len() != dim + 1 {
                return Err(Error::DimensionMismatch { expected: dim + 1, found: verts.len() });
            }
            let (idx, sign) =
                complex.find(verts).ok_or_else(|| Error::InvalidInput(format!("simplex {verts:?} not in complex")))?;
            chain.accumulate(idx, g.signed(sign))?;
        }
        Ok(chain)
    }

    /// Sum of all d-simplices with coefficient `g` in their stored orientation.
    pub fn constant(complex: &Arc<Complex>, dim: usize, g: GroupElement) -> Chain {
        let coeffs = (0..complex.count(dim)).map(|i| (i, g)).filter(|(_, g)| !g.is_zero()).collect();
        Chain { complex: Arc::clone(complex), dim, group: g.group(), coeffs }
    }

    fn accumulate(&mut self, idx: usize, g: GroupElement) -> Result<()> {
        if g.group() != self.group {
            return Err(Error::GroupMismatch(self.group, g.group()));
        }
        let next = match self.coeffs.get(&idx) {
            Some(old) => old.add(&g)?,
            None => g,
        };
        if next.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, next);
        }
        Ok(())
    }

    pub fn complex(&self) -> &Arc<Complex> {
        &self.complex
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, idx: usize) -> GroupElement {
        self.coeffs.get(&idx).copied().unwrap_or_else(|| self.group.zero())
    }

    /// Nonzero coefficients in simplex-index order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, GroupElement)> + '_ {
        self.coeffs.iter().map(|(&i, &g)| (i, g))
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_compatible(&self, other: &Chain) -> Result<()> {
        if !Arc::ptr_eq(&self.complex, &other.complex) {
            return Err(Error::IncompatibleComplexes(
                "chains must share a complex; use common_refinement first".into(),
            ));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.group != other.group {
            return Err(Error::GroupMismatch(self.group, other.group));
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (i, g) in other.terms() {
            out.accumulate(i, g)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Chain {
        Chain {
            complex: Arc::clone(&self.complex),
            dim: self.dim,
            group: self.group,
            coeffs: self.coeffs.iter().map(|(&i, g)| (i, g.neg())).collect(),
        }
    }

    /// `sum |g_i| vol(D_i)`.
    pub fn mass(&self) -> f64 {
        self.terms().map(|(i, g)| g.norm() * self.complex.volume(self.dim, i)).sum()
    }

    pub fn boundary(&self) -> Result<Chain> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("boundary of a 0-chain is undefined".into()));
        }
        let mut out = Chain::zero(&self.complex, self.dim - 1, self.group);
        for (i, g) in self.terms() {
            for &(f, s) in self.complex.boundary_faces(self.dim, i) {
                out.accumulate(f, g.signed(s))?;
            }
        }
        Ok(out)
    }

    /// Indices of the simplices carrying a nonzero coefficient; their union
    /// is the support.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    /// The same chain expressed on the `levels`-fold standard subdivision.
    pub fn refine(&self, levels: usize) -> Chain {
        let mut chain = self.clone();
        for _ in 0..levels {
            let sub = Arc::clone(chain.complex.subdivision());
            let mut coeffs = BTreeMap::new();
            for (i, g) in chain.terms() {
                for &(c, s) in sub.children(chain.dim, i) {
                    coeffs.insert(c, g.signed(s));
                }
            }
            chain = Chain { complex: Arc::clone(&sub.complex), dim: chain.dim, group: chain.group, coeffs };
        }
        chain
    }

    /// The chain on the complex generated by its own support, dropping
    /// every unused simplex of the ambient complex.
    pub fn on_support_complex(&self) -> Chain {
        let support = self.support();
        if support.is_empty() {
            let empty = Arc::new(Complex::assemble(self.complex.ambient_dim(), vec![], vec![], false).unwrap());
            return Chain::zero(&empty, 0, self.group);
        }
        let (sub, map) = self.complex.subcomplex(self.dim, &support);
        let sub = Arc::new(sub);
        let coeffs = support.iter().zip(map).map(|(&old, new)| (new, self.coeffs[&old])).collect();
        Chain { complex: sub, dim: self.dim, group: self.group, coeffs }
    }

    /// Re-expresses the chain on `target`, matching vertices by position.
    /// Fails unless every supported simplex appears in `target`.
    pub fn transfer_to(&self, target: &Arc<Complex>) -> Result<Chain> {
        if Arc::ptr_eq(&self.complex, target) {
            return Ok(self.clone());
        }
        if target.ambient_dim() != self.complex.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.complex.ambient_dim(), found: target.ambient_dim() });
        }
        let locator = VertexLocator::new(target.points());
        let mut out = Chain::zero(target, self.dim, self.group);
        if self.is_zero() {
            return Ok(out);
        }
        if self.dim > target.top_dim() {
            return Err(Error::IncompatibleComplexes(format!("target has no {}-simplices", self.dim)));
        }
        for (i, g) in self.terms() {
            let mapped: Option<Vec<usize>> =
                self.complex.vertices_of(self.dim, i).iter().map(|&v| locator.locate(self.complex.point(v))).collect();
            let found = mapped.and_then(|verts| target.find(&verts));
            let (idx, sign) = found.ok_or_else(|| {
                Error::IncompatibleComplexes(format!(
                    "simplex {:?} has no counterpart in the target complex",
                    self.complex.vertices_of(self.dim, i)
                ))
            })?;
            out.accumulate(idx, g.signed(sign))?;
        }
        Ok(out)
    }

    /// Portion of the chain inside an interval region.
    ///
    /// Works on the complex of the chain's support refined `depth` times.
    /// A simplex whose vertices all lie inside one box is kept whole; one
    /// disjoint from every box is dropped; any other is subdivided and
    /// re-examined, and at the final level kept exactly when its barycenter
    /// lies in the region.
    pub fn restrict(&self, region: &IntervalRegion, depth: usize) -> Result<Chain> {
        if region.dim() != self.complex.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.complex.ambient_dim(), found: region.dim() });
        }
        let base = self.on_support_complex();
        let mut levels = vec![Arc::clone(&base.complex)];
        for _ in 0..depth {
            let next = Arc::clone(&levels.last().unwrap().subdivision().complex);
            levels.push(next);
        }
        let mut out = Chain::zero(&levels[depth], base.dim, base.group);
        for (i, g) in base.terms() {
            restrict_rec(&levels, base.dim, 0, i, g, region, &mut out)?;
        }
        Ok(out)
    }

    /// Atomic approximation of the mass measure `mu_P(A) = M(P restricted to A)`:
    /// one atom at the barycenter of each simplex of the support refined
    /// `depth` times, weighted by `|g| vol`.
    pub fn induced_measure(&self, depth: usize) -> ChainMeasure {
        let n = self.complex.ambient_dim();
        if self.is_zero() {
            return ChainMeasure { n, atoms: Vec::new() };
        }
        let fine = self.on_support_complex().refine(depth);
        let atoms = fine
            .terms()
            .map(|(i, g)| (fine.complex.barycenter(fine.dim, i), g.norm() * fine.complex.volume(fine.dim, i)))
            .collect();
        ChainMeasure { n, atoms }
    }
}

fn restrict_rec(
    levels: &[Arc<Complex>],
    dim: usize,
    level: usize,
    idx: usize,
    g: GroupElement,
    region: &IntervalRegion,
    out: &mut Chain,
) -> Result<()> {
    let complex = &levels[level];
    let pts = complex.coords_of(dim, idx);
    let keep_whole = region.contains_all(&pts);
    let drop = !keep_whole && region.disjoint_from(&pts);
    let last = level + 1 == levels.len();
    if drop {
        return Ok(());
    }
    if keep_whole || last {
        if !keep_whole && !region.contains(&linalg::barycenter(&pts)) {
            return Ok(());
        }
        // push the whole simplex down to the finest level
        let mut frontier = vec![(idx, g)];
        for complex in &levels[level..levels.len() - 1] {
            let sub = complex.subdivision();
            frontier = frontier
                .into_iter()
                .flat_map(|(i, g)| sub.children(dim, i).iter().map(move |&(c, s)| (c, g.signed(s))))
                .collect();
        }
        for (i, g) in frontier {
            out.accumulate(i, g)?;
        }
        return Ok(());
    }
    let sub = levels[level].subdivision();
    for &(c, s) in sub.children(dim, idx) {
        restrict_rec(levels, dim, level + 1, c, g.signed(s), region, out)?;
    }
    Ok(())
}

/// Expresses both chains on one complex.
///
/// Chains on the same complex are returned unchanged. Otherwise each side is
/// refined by up to [`COMMON_REFINEMENT_BUDGET`] levels until every simplex of
/// one chain appears, by vertex position, in the other's refined complex. The
/// returned chains share that complex.
pub fn common_refinement(p: &Chain, q: &Chain) -> Result<(Chain, Chain)> {
    if Arc::ptr_eq(&p.complex, &q.complex) {
        return Ok((p.clone(), q.clone()));
    }
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch { expected: p.dim, found: q.dim });
    }
    let budget = COMMON_REFINEMENT_BUDGET;
    let affordable = |k: &Arc<Complex>, levels: usize| {
        let growth = 2usize.saturating_pow((k.top_dim() * levels) as u32);
        k.count(k.top_dim()).saturating_mul(growth) <= MAX_REFINED_CELLS
    };
    for total in 0..=2 * budget {
        for a in total.saturating_sub(budget)..=total.min(budget) {
            let b = total - a;
            if affordable(&p.complex, a) {
                let pa = p.refine(a);
                if q.on_support_complex().refine(b).transfer_to(&pa.complex).is_ok() || q.is_zero() {
                    let qb = q.refine(b).transfer_to(&pa.complex)?;
                    return Ok((pa, qb));
                }
            }
            if affordable(&q.complex, b) {
                let qb = q.refine(b);
                if p.on_support_complex().refine(a).transfer_to(&qb.complex).is_ok() || p.is_zero() {
                    let pa = p.refine(a).transfer_to(&qb.complex)?;
                    return Ok((pa, qb));
                }
            }
        }
    }
    Err(Error::IncompatibleComplexes(format!("no common refinement within {budget} subdivision levels")))
}

/// A finite union of open axis-aligned boxes. Bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalRegion {
    boxes: Vec<Vec<(f64, f64)>>,
}

impl IntervalRegion {
    pub fn new(boxes: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        let n = boxes.first().map(Vec::len).unwrap_or(0);
        for b in &boxes {
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
            if b.iter().any(|&(lo, hi)| lo.is_nan() || hi.is_nan() || lo >= hi) {
                return Err(Error::InvalidInput(format!("empty interval box {b:?}")));
            }
        }
        if boxes.is_empty() {
            return Err(Error::InvalidInput("interval region needs at least one box".into()));
        }
        Ok(IntervalRegion { boxes })
    }

    pub fn single(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(vec![bounds])
    }

    /// All of `R^n`.
    pub fn whole(n: usize) -> Self {
        IntervalRegion { boxes: vec![vec![(f64::NEG_INFINITY, f64::INFINITY); n]] }
    }

    /// Parses `"lo,hi;lo,hi"` (one pair per axis), with `|` separating boxes.
    pub fn parse(spec: &str) -> Result<Self> {
        let parse_f = |s: &str| -> Result<f64> {
            let t = s.trim().replace('\u{2212}', "-");
            match t.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" | "+inf" => Ok(f64::INFINITY),
                _ => t.parse().map_err(|_| Error::InvalidInput(format!("bad bound {s:?}"))),
            }
        };
        let boxes = spec
            .split('|')
            .map(|b| {
                b.split(';')
                    .map(|axis| {
                        let (lo, hi) = axis
                            .split_once(',')
                            .ok_or_else(|| Error::InvalidInput(format!("bad interval {axis:?}")))?;
                        Ok((parse_f(lo)?, parse_f(hi)?))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(boxes)
    }

    pub fn dim(&self) -> usize {
        self.boxes[0].len()
    }

    pub fn boxes(&self) -> &[Vec<(f64, f64)>] {
        &self.boxes
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| in_box(b, x))
    }

    fn contains_all(&self, pts: &[&[f64]]) -> bool {
        self.boxes.iter().any(|b| pts.iter().all(|p| in_box(b, p)))
    }

    fn disjoint_from(&self, pts: &[&[f64]]) -> bool {
        self.boxes.iter().all(|b| {
            b.iter().enumerate().any(|(k, &(lo, hi))| pts.iter().all(|p| p[k] <= lo) || pts.iter().all(|p| p[k] >= hi))
        })
    }
}

fn in_box(b: &[(f64, f64)], x: &[f64]) -> bool {
    b.iter().zip(x).all(|(&(lo, hi), &c)| c > lo && c < hi)
}

/// Finite atomic measure on `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainMeasure {
    pub n: usize,
    pub atoms: Vec<(Vec<f64>, f64)>,
}

impl ChainMeasure {
    pub fn point_mass(x: Vec<f64>, weight: f64) -> Self {
        ChainMeasure { n: x.len(), atoms: vec![(x, weight)] }
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// Mass of the atoms lying in the region.
    pub fn measure_of(&self, region: &IntervalRegion) -> f64 {
        self.atoms.iter().filter(|(x, _)| region.contains(x)).map(|(_, w)| w).sum()
    }
}

/// `max |int phi dmu - int phi dnu|` over the position-only functions of the
/// dictionary.
pub fn measure_weak_distance(mu: &ChainMeasure, nu: &ChainMeasure, dict: &TestDictionary) -> Result<f64> {
    let fns = dict.position_functions();
    if fns.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    Ok(fns.iter().map(|f| (mu.integrate(|x| f.eval_x(x)) - nu.integrate(|x| f.eval_x(x))).abs()).fold(0.0, f64::max))
}
