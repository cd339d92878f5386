//! The simplicial flat norm and boundary-constrained mass minimisation.
//!
//! Both problems share one shape: given a right-hand side `p` on the rows,
//! find column values `r` (and, for the flat norm, row slacks `q`) with
//! `q + B r = p` minimising `sum w_i |q_i| + sum v_j |r_j|`. Here `B` is a
//! boundary matrix, and weights are simplex volumes.
//!
//! Solvers:
//!
//! - real and integer coefficients: a linear program with every variable
//!   split into positive and negative parts. Integer solutions are checked
//!   for integrality; a fractional optimum is rounded to a feasible point and
//!   flagged as not optimal.
//! - finite groups: exhaustive enumeration when the search space has at most
//!   [`BRUTE_FORCE_LIMIT`] points.
//! - `Z/2` beyond that: a linear relaxation over the local parity polytopes
//!   of the rows. Its objective is a lower bound; an integral optimum is
//!   exact, a fractional one is rounded at 1/2 and flagged as not optimal.

use std::sync::Arc;

use microlp::{ComparisonOp, OptimizationDirection, Variable};
use serde::{Deserialize, Serialize};

use crate::chain::{common_refinement, Chain};
use crate::coeff::{Group, GroupElement};
use crate::simplicial::Complex;
use crate::{Error, Result};

/// Largest search space enumerated exactly (2^24 points).
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 24;

/// Accepted violation of `P = Q + dR`.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Distance from an integer below which an LP value counts as integral.
const INTEGRALITY_TOL: f64 = 1e-7;

/// Rows of the parity relaxation with more variables than this are refused
/// (each row costs `2^(k-1)` inequalities).
const MAX_PARITY_ROW: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Enumeration for finite groups when small enough, else a linear program.
    #[default]
    Auto,
    LinearProgram,
    BruteForce,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    BruteForce,
    LinearProgram,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlatOptions {
    pub method: SolveMethod,
    /// Whether an oversized `Z/2` instance may fall back to the relaxation.
    pub allow_relaxation: bool,
}

impl Default for FlatOptions {
    fn default() -> Self {
        FlatOptions { method: SolveMethod::Auto, allow_relaxation: true }
    }
}

impl FlatOptions {
    pub fn with_method(method: SolveMethod) -> Self {
        FlatOptions { method, ..Self::default() }
    }
}

/// How a solution was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: Method,
    /// True when the returned value is provably minimal.
    pub optimal: bool,
    /// Enumerated assignments, or simplex pivots.
    pub iterations: u64,
    /// Largest violation of the constraint `P = Q + dR`.
    pub residual: f64,
    /// A proven lower bound on the optimum (equal to the value when optimal).
    pub lower_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `P = Q + dR` with `value = M(Q) + M(R)`.
#[derive(Clone, Debug)]
pub struct FlatDecomposition {
    pub q: Chain,
    pub r: Chain,
    pub value: f64,
}

impl FlatDecomposition {
    /// Largest coefficient norm of `P - Q - dR`.
    pub fn residual(&self, p: &Chain) -> Result<f64> {
        let diff = p.sub(&self.q)?.sub(&self.r.boundary()?)?;
        Ok(diff.terms().map(|(_, g)| g.norm()).fold(0.0, f64::max))
    }
}

/// Flat norm with default options.
pub fn flat_norm(p: &Chain) -> Result<(f64, FlatDecomposition, SolverReport)> {
    flat_norm_with(p, &FlatOptions::default())
}

/// `min M(Q) + M(R)` over `P = Q + dR` within the chain's complex.
pub fn flat_norm_with(p: &Chain, opts: &FlatOptions) -> Result<(f64, FlatDecomposition, SolverReport)> {
    let complex = p.complex();
    let d = p.dim();
    let group = p.group();
    if p.is_zero() {
        let decomposition = FlatDecomposition { q: p.clone(), r: Chain::zero(complex, d + 1, group), value: 0.0 };
        return Ok((0.0, decomposition, trivial_report(opts, group)));
    }
    if complex.top_dim() <= d {
        let m = p.mass();
        let decomposition = FlatDecomposition { q: p.clone(), r: Chain::zero(complex, d + 1, group), value: m };
        let mut report = trivial_report(opts, group);
        report.lower_bound = m;
        report.note = Some(format!("complex has no {}-simplices", d + 1));
        return Ok((m, decomposition, report));
    }
    let problem = Problem {
        group,
        rhs: (0..complex.count(d)).map(|i| p.coeff(i)).collect(),
        slack: Some((0..complex.count(d)).map(|i| complex.volume(d, i)).collect()),
        cols: columns(complex, d + 1),
    };
    let solution = problem.solve(opts)?;
    let r = Chain::from_coeffs(complex, d + 1, group, solution.cols.into_iter().enumerate())?;
    let q = Chain::from_coeffs(complex, d, group, solution.slack.into_iter().enumerate())?;
    let value = q.mass() + r.mass();
    let decomposition = FlatDecomposition { q, r, value };
    let mut report = solution.report;
    report.residual = decomposition.residual(p)?;
    if report.residual > RESIDUAL_TOL {
        return Err(Error::Solver(format!("decomposition residual {:.3e} exceeds tolerance", report.residual)));
    }
    if report.optimal {
        report.lower_bound = report.lower_bound.min(value);
    }
    Ok((value, decomposition, report))
}

/// `fn(P - Q)` over a common refinement of the two chains.
pub fn flat_distance(p: &Chain, q: &Chain) -> Result<f64> {
    flat_distance_with(p, q, &FlatOptions::default()).map(|(v, _, _)| v)
}

pub fn flat_distance_with(p: &Chain, q: &Chain, opts: &FlatOptions) -> Result<(f64, FlatDecomposition, SolverReport)> {
    let (a, b) = common_refinement(p, q)?;
    flat_norm_with(&a.sub(&b)?, opts)
}

/// Mass minimisation with default options.
pub fn mass_minimize(t: &Chain, complex: &Arc<Complex>) -> Result<(Chain, SolverReport)> {
    mass_minimize_with(t, complex, &FlatOptions::default())
}

/// A least-mass chain `S` in `complex` with `dS = T`.
pub fn mass_minimize_with(t: &Chain, complex: &Arc<Complex>, opts: &FlatOptions) -> Result<(Chain, SolverReport)> {
    let t = t.transfer_to(complex)?;
    let group = t.group();
    let d = t.dim() + 1;
    if t.is_zero() {
        return Ok((Chain::zero(complex, d, group), trivial_report(opts, group)));
    }
    if complex.top_dim() < d {
        return Err(Error::Infeasible(format!("complex has no {d}-simplices to fill a nonzero boundary")));
    }
    // a boundary must itself be a cycle
    if d >= 2 && !t.boundary()?.is_zero() {
        return Err(Error::Infeasible("the prescribed boundary is not a cycle".into()));
    }
    let problem = Problem {
        group,
        rhs: (0..complex.count(d - 1)).map(|i| t.coeff(i)).collect(),
        slack: None,
        cols: columns(complex, d),
    };
    let solution = problem.solve(opts)?;
    let s = Chain::from_coeffs(complex, d, group, solution.cols.into_iter().enumerate())?;
    let mut report = solution.report;
    let diff = t.sub(&s.boundary()?)?;
    report.residual = diff.terms().map(|(_, g)| g.norm()).fold(0.0, f64::max);
    if report.residual > RESIDUAL_TOL {
        return Err(Error::Solver(format!("boundary residual {:.3e} exceeds tolerance", report.residual)));
    }
    Ok((s, report))
}

fn trivial_report(opts: &FlatOptions, group: Group) -> SolverReport {
    let method = match (opts.method, group) {
        (SolveMethod::BruteForce, _) | (SolveMethod::Auto, Group::CyclicMod(_)) => Method::BruteForce,
        _ => Method::LinearProgram,
    };
    SolverReport { method, optimal: true, iterations: 0, residual: 0.0, lower_bound: 0.0, note: None }
}

fn columns(complex: &Complex, dim: usize) -> Vec<Column> {
    (0..complex.count(dim))
        .map(|j| Column { weight: complex.volume(dim, j), entries: complex.boundary_faces(dim, j).to_vec() })
        .collect()
}

struct Column {
    weight: f64,
    entries: Vec<(usize, i8)>,
}

/// `min sum slack_i |q_i| + sum w_j |r_j|` subject to `q + B r = rhs`; with
/// no slack weights, `q` is forced to zero.
struct Problem {
    group: Group,
    rhs: Vec<GroupElement>,
    slack: Option<Vec<f64>>,
    cols: Vec<Column>,
}

struct Solution {
    cols: Vec<GroupElement>,
    slack: Vec<GroupElement>,
    report: SolverReport,
}

impl Problem {
    fn solve(&self, opts: &FlatOptions) -> Result<Solution> {
        match self.group {
            Group::Reals | Group::Integers => match opts.method {
                SolveMethod::BruteForce => {
                    Err(Error::InvalidInput("exhaustive search needs a finite coefficient group".into()))
                }
                _ => self.solve_lp(),
            },
            Group::CyclicMod(p) => {
                let space = (p as f64).powi(self.cols.len() as i32);
                let small = space <= BRUTE_FORCE_LIMIT as f64;
                match opts.method {
                    SolveMethod::BruteForce | SolveMethod::Auto if small => self.solve_brute(p),
                    SolveMethod::BruteForce => Err(Error::OversizedInstance(format!(
                        "{} columns over Z/{p} exceed the enumeration limit",
                        self.cols.len()
                    ))),
                    _ if p == 2 && (opts.method == SolveMethod::LinearProgram || opts.allow_relaxation) => {
                        self.solve_parity_lp()
                    }
                    _ => Err(Error::OversizedInstance(format!(
                        "{} columns over Z/{p} exceed the enumeration limit and no relaxation is available",
                        self.cols.len()
                    ))),
                }
            }
        }
    }

    fn slack_from(&self, cols: &[GroupElement]) -> Result<Vec<GroupElement>> {
        let mut q = self.rhs.clone();
        for (col, r) in self.cols.iter().zip(cols) {
            if r.is_zero() {
                continue;
            }
            for &(row, s) in &col.entries {
                q[row] = q[row].sub(&r.signed(s))?;
            }
        }
        Ok(q)
    }

    fn objective(&self, cols: &[GroupElement], slack: &[GroupElement]) -> f64 {
        let r: f64 = self.cols.iter().zip(cols).map(|(c, g)| c.weight * g.norm()).sum();
        let q: f64 = match &self.slack {
            Some(w) => w.iter().zip(slack).map(|(w, g)| w * g.norm()).sum(),
            None => 0.0,
        };
        q + r
    }

    /// Odometer over `(Z/p)^cols`, maintaining the slack incrementally. Ties
    /// keep the earliest assignment.
    fn solve_brute(&self, p: u32) -> Result<Solution> {
        let ncols = self.cols.len();
        let total = (p as u64).pow(ncols as u32);
        let norms: Vec<f64> = (0..p).map(|k| k.min(p - k) as f64).collect();
        let mut q: Vec<u32> = self.rhs.iter().map(|g| residue(g, p)).collect();
        let mut r = vec![0u32; ncols];
        let slack_w = self.slack.as_deref();
        let row_cost = |i: usize, v: u32| slack_w.map_or(0.0, |w| w[i] * norms[v as usize]);
        let mut nonzero = q.iter().filter(|&&v| v != 0).count();
        let mut cost_q: f64 = (0..q.len()).map(|i| row_cost(i, q[i])).sum();
        let mut cost_r = 0.0;
        let feasible = |nz: usize| slack_w.is_some() || nz == 0;
        let mut best: Option<(f64, u64)> = feasible(nonzero).then_some((cost_q, 0));
        for step in 1..total {
            let mut j = 0;
            loop {
                let col = &self.cols[j];
                cost_r -= col.weight * norms[r[j] as usize];
                r[j] = (r[j] + 1) % p;
                cost_r += col.weight * norms[r[j] as usize];
                for &(row, s) in &col.entries {
                    let old = q[row];
                    let delta = if s > 0 { p - 1 } else { 1 };
                    let new = (old + delta) % p;
                    cost_q += row_cost(row, new) - row_cost(row, old);
                    nonzero = nonzero + (new != 0) as usize - (old != 0) as usize;
                    q[row] = new;
                }
                if r[j] != 0 {
                    break;
                }
                j += 1;
            }
            if feasible(nonzero) {
                let cost = cost_q + cost_r;
                if best.is_none_or(|(b, _)| cost < b - 1e-12 * (1.0 + b.abs())) {
                    best = Some((cost, step));
                }
            }
        }
        let (_, step) = best.ok_or_else(|| Error::Infeasible(homology_note(self.group)))?;
        let mut digits = step;
        let cols: Vec<GroupElement> = (0..ncols)
            .map(|_| {
                let v = digits % p as u64;
                digits /= p as u64;
                GroupElement::Mod { value: v as u32, p }
            })
            .collect();
        let slack = self.slack_from(&cols)?;
        let value = self.objective(&cols, &slack);
        Ok(Solution {
            cols,
            slack,
            report: SolverReport {
                method: Method::BruteForce,
                optimal: true,
                iterations: total,
                residual: 0.0,
                lower_bound: value,
                note: None,
            },
        })
    }

    fn solve_lp(&self) -> Result<Solution> {
        let mut lp = microlp::Problem::new(OptimizationDirection::Minimize);
        let colvars: Vec<(Variable, Variable)> = self
            .cols
            .iter()
            .map(|c| (lp.add_var(c.weight, (0.0, f64::INFINITY)), lp.add_var(c.weight, (0.0, f64::INFINITY))))
            .collect();
        let slackvars: Option<Vec<(Variable, Variable)>> = self.slack.as_ref().map(|w| {
            w.iter().map(|&w| (lp.add_var(w, (0.0, f64::INFINITY)), lp.add_var(w, (0.0, f64::INFINITY)))).collect()
        });
        let mut rows: Vec<Vec<(Variable, f64)>> = vec![Vec::new(); self.rhs.len()];
        for (c, &(pos, neg)) in self.cols.iter().zip(&colvars) {
            for &(row, s) in &c.entries {
                rows[row].push((pos, s as f64));
                rows[row].push((neg, -(s as f64)));
            }
        }
        if let Some(sv) = &slackvars {
            for (row, &(pos, neg)) in sv.iter().enumerate() {
                rows[row].push((pos, 1.0));
                rows[row].push((neg, -1.0));
            }
        }
        for (row, expr) in rows.iter().enumerate() {
            let rhs = self.rhs[row].to_f64();
            if expr.is_empty() {
                if rhs != 0.0 {
                    return Err(Error::Infeasible(homology_note(self.group)));
                }
                continue;
            }
            lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, rhs);
        }
        let solution = run_lp(&lp, self.group)?;
        let lower_bound = solution.objective();
        let iterations = solution.stats().lp_iterations;
        let raw: Vec<f64> =
            colvars.iter().map(|&(pos, neg)| solution.var_value(pos) - solution.var_value(neg)).collect();
        let mut optimal = true;
        let mut note = None;
        let cols: Vec<GroupElement> = match self.group {
            Group::Integers => {
                let fractional = raw.iter().filter(|v| (*v - v.round()).abs() > INTEGRALITY_TOL).count();
                if fractional > 0 {
                    optimal = false;
                    note = Some(format!("{fractional} fractional LP values rounded"));
                }
                raw.iter().map(|v| GroupElement::Int(v.round() as i64)).collect()
            }
            _ => raw.iter().map(|&v| GroupElement::Real(if v.abs() < 1e-13 { 0.0 } else { v })).collect(),
        };
        let slack = match self.slack {
            Some(_) => self.slack_from(&cols)?,
            None => vec![self.group.zero(); self.rhs.len()],
        };
        Ok(Solution {
            cols,
            slack,
            report: SolverReport {
                method: Method::LinearProgram,
                optimal,
                iterations,
                residual: 0.0,
                lower_bound,
                note,
            },
        })
    }

    /// Relaxation of the `Z/2` problem: every row's variables (its slack and
    /// the columns with odd coefficient) range over the parity polytope of
    /// the row's right-hand side, cut out by one inequality per subset of
    /// the wrong parity.
    fn solve_parity_lp(&self) -> Result<Solution> {
        let mut lp = microlp::Problem::new(OptimizationDirection::Minimize);
        let colvars: Vec<Variable> = self.cols.iter().map(|c| lp.add_var(c.weight, (0.0, 1.0))).collect();
        let slackvars: Option<Vec<Variable>> =
            self.slack.as_ref().map(|w| w.iter().map(|&w| lp.add_var(w, (0.0, 1.0))).collect());
        let mut rows: Vec<Vec<Variable>> = vec![Vec::new(); self.rhs.len()];
        for (c, &v) in self.cols.iter().zip(&colvars) {
            for &(row, s) in &c.entries {
                if s % 2 != 0 {
                    rows[row].push(v);
                }
            }
        }
        if let Some(sv) = &slackvars {
            for (row, &v) in sv.iter().enumerate() {
                rows[row].push(v);
            }
        }
        for (row, vars) in rows.iter().enumerate() {
            let odd = residue(&self.rhs[row], 2) == 1;
            let k = vars.len();
            if k == 0 {
                if odd {
                    return Err(Error::Infeasible(homology_note(self.group)));
                }
                continue;
            }
            if k > MAX_PARITY_ROW {
                return Err(Error::OversizedInstance(format!("row with {k} variables in the parity relaxation")));
            }
            for subset in 0u32..(1 << k) {
                let size = subset.count_ones() as usize;
                // forbid the subsets whose parity differs from the right-hand side
                if (size % 2 == 1) == odd {
                    continue;
                }
                let expr: Vec<(Variable, f64)> =
                    vars.iter().enumerate().map(|(i, &v)| (v, if subset >> i & 1 == 1 { 1.0 } else { -1.0 })).collect();
                lp.add_constraint(expr.as_slice(), ComparisonOp::Le, size as f64 - 1.0);
            }
        }
        let solution = run_lp(&lp, self.group)?;
        let lower_bound = solution.objective();
        let iterations = solution.stats().lp_iterations;
        let raw: Vec<f64> = colvars.iter().map(|&v| solution.var_value(v)).collect();
        let fractional = raw.iter().filter(|v| (*v - v.round()).abs() > INTEGRALITY_TOL).count();
        let cols: Vec<GroupElement> =
            raw.iter().map(|&v| GroupElement::Mod { value: (v >= 0.5) as u32, p: 2 }).collect();
        let mut slack = self.slack_from(&cols)?;
        let mut note = (fractional > 0).then(|| format!("{fractional} fractional values rounded at 1/2"));
        let mut chosen = cols;
        if self.slack.is_none() && slack.iter().any(|g| !g.is_zero()) {
            // rounding broke the boundary constraint; fall back to any solution
            chosen = self.solve_gf2()?;
            slack = vec![self.group.zero(); self.rhs.len()];
            note = Some("rounded relaxation infeasible; returned an elimination solution".into());
        }
        Ok(Solution {
            cols: chosen,
            slack,
            report: SolverReport {
                method: Method::LinearProgram,
                optimal: fractional == 0,
                iterations,
                residual: 0.0,
                lower_bound,
                note,
            },
        })
    }

    /// Some solution of `B r = rhs` over `Z/2` by Gaussian elimination.
    fn solve_gf2(&self) -> Result<Vec<GroupElement>> {
        let n = self.cols.len();
        let words = n.div_ceil(64) + 1;
        // augmented rows as bitsets; the last bit holds the right-hand side
        let mut rows: Vec<Vec<u64>> = vec![vec![0; words]; self.rhs.len()];
        for (j, c) in self.cols.iter().enumerate() {
            for &(row, s) in &c.entries {
                if s % 2 != 0 {
                    rows[row][j / 64] ^= 1 << (j % 64);
                }
            }
        }
        for (row, g) in rows.iter_mut().zip(&self.rhs) {
            if residue(g, 2) == 1 {
                row[n / 64] |= 1 << (n % 64);
            }
        }
        let bit = |r: &[u64], j: usize| r[j / 64] >> (j % 64) & 1 == 1;
        let mut pivots = Vec::new();
        let mut top = 0;
        for j in 0..n {
            let Some(pr) = (top..rows.len()).find(|&r| bit(&rows[r], j)) else { continue };
            rows.swap(top, pr);
            let pivot = rows[top].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != top && bit(row, j) {
                    row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(j);
            top += 1;
        }
        if rows[top..].iter().any(|r| bit(r, n)) {
            return Err(Error::Infeasible(homology_note(self.group)));
        }
        let mut x = vec![GroupElement::Mod { value: 0, p: 2 }; n];
        for (r, &j) in pivots.iter().enumerate() {
            x[j] = GroupElement::Mod { value: bit(&rows[r], n) as u32, p: 2 };
        }
        Ok(x)
    }
}

fn run_lp(lp: &microlp::Problem, group: Group) -> Result<microlp::Solution> {
    match lp.solve() {
        Ok(outcome) => outcome.into_solution().map_err(|_| Error::Solver("linear program interrupted".into())),
        Err(microlp::Error::Infeasible) => Err(Error::Infeasible(homology_note(group))),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

fn residue(g: &GroupElement, p: u32) -> u32 {
    match *g {
        GroupElement::Mod { value, .. } => value % p,
        GroupElement::Int(k) => k.rem_euclid(p as i64) as u32,
        GroupElement::Real(v) => (v.round() as i64).rem_euclid(p as i64) as u32,
    }
}

fn homology_note(group: Group) -> String {
    format!("the prescribed chain is not a boundary in the complex over {group} (nonzero homology class)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Arc<Complex> {
        Arc::new(
            Complex::new(
                2,
                vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
                &[vec![0, 1, 2], vec![0, 2, 3]],
            )
            .unwrap(),
        )
    }

    fn square_boundary(k: &Arc<Complex>, group: Group) -> Chain {
        let g = group.one();
        Chain::from_simplices(k, group, &[(vec![0, 1], g), (vec![1, 2], g), (vec![2, 3], g), (vec![3, 0], g)]).unwrap()
    }

    #[test]
    fn zero_chain_has_zero_norm() {
        let k = square();
        let (v, _, report) = flat_norm(&Chain::zero(&k, 1, Group::Reals)).unwrap();
        assert_eq!(v, 0.0);
        assert!(report.optimal);
    }

    #[test]
    fn square_boundary_is_filled() {
        let k = square();
        for group in [Group::cyclic(2).unwrap(), Group::Integers, Group::Reals] {
            let p = square_boundary(&k, group);
            let (v, dec, report) = flat_norm(&p).unwrap();
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
            assert!(dec.q.is_zero());
            assert_eq!(dec.r.len(), 2);
            assert!(report.optimal);
            assert!(report.residual <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn relaxation_agrees_on_square() {
        let k = square();
        let p = square_boundary(&k, Group::cyclic(2).unwrap());
        let (v, _, report) = flat_norm_with(&p, &FlatOptions::with_method(SolveMethod::LinearProgram)).unwrap();
        assert_eq!(report.method, Method::LinearProgram);
        assert!(report.optimal);
        assert_relative_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn single_edge_is_not_filled() {
        let k = square();
        let p = Chain::from_simplices(&k, Group::Reals, &[(vec![0, 1], Group::Reals.one())]).unwrap();
        let (v, dec, _) = flat_norm(&p).unwrap();
        // filling costs 1/2 area plus two unit-ish edges, so Q = P
        assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        assert!(dec.r.is_zero());
    }

    #[test]
    fn top_dimensional_chain_is_its_own_mass() {
        let k = square();
        let p = Chain::constant(&k, 2, Group::Reals.one());
        let (v, dec, _) = flat_norm(&p).unwrap();
        assert_relative_eq!(v, 1.0);
        assert!(dec.r.is_zero());
    }

    #[test]
    fn brute_force_needs_finite_group() {
        let k = square();
        let p = square_boundary(&k, Group::Reals);
        assert!(flat_norm_with(&p, &FlatOptions::with_method(SolveMethod::BruteForce)).is_err());
    }

    #[test]
    fn mod_three_brute_force() {
        let k = square();
        let z3 = Group::cyclic(3).unwrap();
        let p = square_boundary(&k, z3);
        let (v, _, report) = flat_norm(&p).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-12);
        assert_eq!(report.iterations, 9);
    }

    #[test]
    fn oversized_mod_three_is_refused() {
        let k = square().refine(3);
        let p = square_boundary(&square(), Group::cyclic(3).unwrap()).refine(3);
        assert_eq!(k.count(2), 128);
        assert!(matches!(flat_norm(&p), Err(Error::OversizedInstance(_))));
        let z2 = square_boundary(&square(), Group::cyclic(2).unwrap()).refine(3);
        let strict = FlatOptions { method: SolveMethod::Auto, allow_relaxation: false };
        assert!(matches!(flat_norm_with(&z2, &strict), Err(Error::OversizedInstance(_))));
        let (v, _, report) = flat_norm(&z2).unwrap();
        assert!(report.optimal);
        assert_relative_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_distance_to_self_is_zero() {
        let k = square();
        let p = square_boundary(&k, Group::Reals);
        assert_eq!(flat_distance(&p, &p).unwrap(), 0.0);
        // across a refinement as well
        assert!(flat_distance(&p, &p.refine(2)).unwrap() < 1e-9);
    }

    #[test]
    fn mass_minimize_segment() {
        let k = square();
        let t = Chain::from_simplices(
            &k,
            Group::Reals,
            &[(vec![2], Group::Reals.one()), (vec![0], Group::Reals.from_int(-1))],
        )
        .unwrap();
        let (s, report) = mass_minimize(&t, &k).unwrap();
        assert_relative_eq!(s.mass(), 2f64.sqrt(), epsilon = 1e-9);
        assert!(report.optimal);
        assert_eq!(s.boundary().unwrap().sub(&t).unwrap().mass(), 0.0);
    }

    #[test]
    fn mass_minimize_trivial_and_infeasible() {
        let k = square();
        let (s, _) = mass_minimize(&Chain::zero(&k, 0, Group::Reals), &k).unwrap();
        assert!(s.is_zero());
        // a single point is not a boundary
        let t = Chain::from_simplices(&k, Group::Reals, &[(vec![2], Group::Reals.one())]).unwrap();
        assert!(matches!(mass_minimize(&t, &k), Err(Error::Infeasible(_))));
        let z2 = Group::cyclic(2).unwrap();
        let t = Chain::from_simplices(&k, z2, &[(vec![2], z2.one())]).unwrap();
        assert!(matches!(mass_minimize(&t, &k), Err(Error::Infeasible(_))));
    }

    #[test]
    fn mass_minimize_square_boundary_mod_two() {
        let k = square();
        let z2 = Group::cyclic(2).unwrap();
        let t = square_boundary(&k, z2);
        let (s, report) = mass_minimize(&t, &k).unwrap();
        assert_eq!(report.method, Method::BruteForce);
        assert_relative_eq!(s.mass(), 1.0);
    }

    #[test]
    fn gf2_elimination_finds_a_solution() {
        let k = square().refine(1);
        let z2 = Group::cyclic(2).unwrap();
        let t = square_boundary(&square(), z2).refine(1);
        let problem = Problem {
            group: z2,
            rhs: (0..k.count(1)).map(|i| t.coeff(i)).collect(),
            slack: None,
            cols: columns(&k, 2),
        };
        let x = problem.solve_gf2().unwrap();
        assert!(problem.slack_from(&x).unwrap().iter().all(|g| g.is_zero()));
    }
}
