//! Scenario generators and the convergence pipeline.
//!
//! Every scenario yields, for each `m`, a chain `S_m` on its own complex, an
//! optional flat target (the flat norm column is `fn(S_m - S)`, or `fn(S_m)`
//! when the target is zero) and an optional weak reference (measure and
//! varifold columns compare against it, or against zero).
//!
//! Measures and varifolds are sampled on the support refined until its mesh
//! drops below `2^-depth`, so chains that are refinements of each other are
//! sampled identically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{measure_weak_distance, Chain, ChainMeasure};
use crate::coeff::Group;
use crate::flatnorm::{flat_distance_with, flat_norm_with, FlatOptions, SolverReport};
use crate::simplicial::Complex;
use crate::varifold::{var_weak_distance, TestDictionary, Varifold};
use crate::{Error, Result};

/// Arc segments per radian of angle.
pub const DEFAULT_SEGMENTS_PER_RADIAN: f64 = 64.0;

/// The reference circle is the regular `2^11`-gon.
pub const DEFAULT_REFERENCE_EXPONENT: u32 = 11;

/// Rows used for trend assertions.
pub const TREND_WINDOW: usize = 5;

/// Spearman threshold for a decreasing column.
pub const TREND_THRESHOLD: f64 = -0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Boundaries of alternating sectors of a thin annulus.
    Annulus,
    /// Boundaries of `[m, m+1] x [0, 1/m]`.
    EscapingRectangle,
    /// Regular `2^m`-gons against a fine reference polygon.
    Circle,
    /// Dyadic refinements of the unit square's boundary.
    Square,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Annulus => "annulus",
            ScenarioKind::EscapingRectangle => "escaping_rectangle",
            ScenarioKind::Circle => "circle",
            ScenarioKind::Square => "square",
        }
    }

    pub fn min_m(self) -> usize {
        match self {
            ScenarioKind::Annulus => 2,
            ScenarioKind::EscapingRectangle => 1,
            ScenarioKind::Circle | ScenarioKind::Square => 3,
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annulus" => Ok(ScenarioKind::Annulus),
            "escaping_rectangle" | "rectangle" => Ok(ScenarioKind::EscapingRectangle),
            "circle" | "polygonal_circle" => Ok(ScenarioKind::Circle),
            "square" | "polygonal_square" => Ok(ScenarioKind::Square),
            _ => Err(Error::InvalidInput(format!("unknown scenario {s:?}"))),
        }
    }
}

/// Everything that determines a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub m_min: usize,
    pub m_max: usize,
    /// Sampling mesh `2^-depth` for measures and varifolds.
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_dict")]
    pub dict: String,
    /// Subdivision levels applied to the complex before the flat norm.
    #[serde(default)]
    pub refine: usize,
    #[serde(default = "default_segments")]
    pub segments_per_radian: f64,
    #[serde(default = "default_reference_exponent")]
    pub reference_exponent: u32,
}

fn default_depth() -> usize {
    6
}

fn default_dict() -> String {
    "default".into()
}

fn default_segments() -> f64 {
    DEFAULT_SEGMENTS_PER_RADIAN
}

fn default_reference_exponent() -> u32 {
    DEFAULT_REFERENCE_EXPONENT
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioKind, m_min: usize, m_max: usize) -> Self {
        ExperimentConfig {
            scenario,
            m_min,
            m_max,
            depth: default_depth(),
            dict: default_dict(),
            refine: 0,
            segments_per_radian: default_segments(),
            reference_exponent: default_reference_exponent(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m_min > self.m_max {
            return Err(Error::InvalidInput(format!("empty m range {}..{}", self.m_min, self.m_max)));
        }
        if self.m_min < self.scenario.min_m() {
            return Err(Error::InvalidInput(format!("{} needs m >= {}", self.scenario.name(), self.scenario.min_m())));
        }
        if self.scenario == ScenarioKind::Circle && self.m_max >= self.reference_exponent as usize {
            return Err(Error::InvalidInput("circle needs m below the reference exponent".into()));
        }
        if !(self.segments_per_radian > 0.0) {
            return Err(Error::InvalidInput("segments per radian must be positive".into()));
        }
        Ok(())
    }
}

/// One member of a scenario's sequence.
#[derive(Clone, Debug)]
pub struct Instance {
    pub m: usize,
    pub chain: Chain,
    /// `None` means the flat limit is zero.
    pub flat_target: Option<Chain>,
    /// `None` means the weak limit is zero.
    pub weak_reference: Option<Chain>,
}

pub fn generate(cfg: &ExperimentConfig, m: usize) -> Result<Instance> {
    match cfg.scenario {
        ScenarioKind::Annulus => scenario_annulus(m, cfg.segments_per_radian),
        ScenarioKind::EscapingRectangle => scenario_escaping_rectangle(m),
        ScenarioKind::Circle => scenario_polygonal_circle(m, cfg.reference_exponent),
        ScenarioKind::Square => scenario_polygonal_square(m),
    }
}

/// The annulus `1 <= |z| <= 1 + 1/m^2` cut into `2m` sectors of angle
/// `pi/m`; `S_m` is the mod-2 boundary of every second sector and the weak
/// reference is the inner circle.
pub fn scenario_annulus(m: usize, segments_per_radian: f64) -> Result<Instance> {
    if m < 2 {
        return Err(Error::InvalidInput("annulus needs m >= 2".into()));
    }
    let per_sector = (segments_per_radian * PI / m as f64).ceil() as usize;
    let n = 2 * m * per_sector;
    let outer = 1.0 + 1.0 / (m * m) as f64;
    let angle = |k: usize| 2.0 * PI * k as f64 / n as f64;
    let mut points: Vec<Vec<f64>> = (0..n).map(|k| vec![angle(k).cos(), angle(k).sin()]).collect();
    points.extend((0..n).map(|k| vec![outer * angle(k).cos(), outer * angle(k).sin()]));
    let mut tops = Vec::with_capacity(2 * n);
    for k in 0..n {
        let k1 = (k + 1) % n;
        tops.push(vec![k, k1, n + k1]);
        tops.push(vec![k, n + k1, n + k]);
    }
    let complex = Arc::new(Complex::new(2, points, &tops)?);
    let z2 = Group::cyclic(2)?;
    let mut sectors = Vec::new();
    for k in 0..n {
        // sector j covers [j pi/m, (j+1) pi/m]; keep the odd ones
        if (k / per_sector) % 2 == 1 {
            let k1 = (k + 1) % n;
            sectors.push((vec![k, k1, n + k1], z2.one()));
            sectors.push((vec![k, n + k1, n + k], z2.one()));
        }
    }
    let omega = Chain::from_simplices(&complex, z2, &sectors)?;
    let chain = omega.boundary()?;
    let circle: Vec<(Vec<usize>, _)> = (0..n).map(|k| (vec![k, (k + 1) % n], z2.one())).collect();
    let reference = Chain::from_simplices(&complex, z2, &circle)?;
    Ok(Instance { m, chain, flat_target: None, weak_reference: Some(reference) })
}

/// Total area of the alternating sectors, `(pi/2)(2/m^2 + 1/m^4)`.
pub fn annulus_sector_area(m: usize) -> f64 {
    let m = m as f64;
    PI / 2.0 * (2.0 / (m * m) + 1.0 / m.powi(4))
}

/// Smooth-curve length of the annulus boundary chain,
/// `pi + pi(1 + 1/m^2) + 2/m`.
pub fn annulus_boundary_length(m: usize) -> f64 {
    let m = m as f64;
    PI + PI * (1.0 + 1.0 / (m * m)) + 2.0 / m
}

/// `S_m` is the mod-2 boundary of `Q_m = [m, m+1] x [0, 1/m]`, meshed by a
/// 4 x 2 grid (16 triangles, small enough for exhaustive search) in
/// absolute coordinates. Both limits are zero.
pub fn scenario_escaping_rectangle(m: usize) -> Result<Instance> {
    if m < 1 {
        return Err(Error::InvalidInput("escaping rectangle needs m >= 1".into()));
    }
    let (nx, ny) = (4usize, 2usize);
    let (x0, h) = (m as f64, 1.0 / m as f64);
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            points.push(vec![x0 + i as f64 / nx as f64, h * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut tops = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            tops.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tops.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let complex = Arc::new(Complex::new(2, points, &tops)?);
    let z2 = Group::cyclic(2)?;
    let chain = Chain::constant(&complex, 2, z2.one()).boundary()?;
    Ok(Instance { m, chain, flat_target: None, weak_reference: None })
}

/// `P_m` is the regular `2^m`-gon inscribed in the unit circle, `S` the
/// `2^e`-gon through the same vertices. The complex holds both polygons and
/// fans triangulating each lune between a chord and its arc.
pub fn scenario_polygonal_circle(m: usize, reference_exponent: u32) -> Result<Instance> {
    if m < 3 || m >= reference_exponent as usize {
        return Err(Error::InvalidInput(format!("circle needs 3 <= m < {reference_exponent}")));
    }
    let n = 1usize << reference_exponent;
    let step = n >> m;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let mut tops: Vec<Vec<usize>> = (0..n).map(|k| vec![k, (k + 1) % n]).collect();
    for c in 0..(1usize << m) {
        let a = c * step;
        tops.push(vec![a, (a + step) % n]);
        for t in 1..step {
            tops.push(vec![a, a + t, (a + t + 1) % n]);
        }
    }
    let complex = Arc::new(Complex::new(2, points, &tops)?);
    let z = Group::Integers;
    let fine: Vec<_> = (0..n).map(|k| (vec![k, (k + 1) % n], z.one())).collect();
    let chords: Vec<_> = (0..(1usize << m)).map(|c| (vec![c * step, (c * step + step) % n], z.one())).collect();
    let reference = Chain::from_simplices(&complex, z, &fine)?;
    let chain = Chain::from_simplices(&complex, z, &chords)?;
    Ok(Instance { m, chain, flat_target: Some(reference.clone()), weak_reference: Some(reference) })
}

/// Perimeter of the regular `2^m`-gon inscribed in the unit circle.
pub fn polygon_perimeter(m: usize) -> f64 {
    let k = (1u64 << m) as f64;
    2.0 * k * (PI / k).sin()
}

/// `S` is the boundary of the unit square on a two-triangle complex and
/// `P_m` the same chain on its `m`-fold subdivision.
pub fn scenario_polygonal_square(m: usize) -> Result<Instance> {
    let complex = Arc::new(Complex::new(
        2,
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
        &[vec![0, 1, 2], vec![0, 2, 3]],
    )?);
    let z = Group::Integers;
    let edges: Vec<_> = [[0, 1], [1, 2], [2, 3], [3, 0]].iter().map(|e| (e.to_vec(), z.one())).collect();
    let s = Chain::from_simplices(&complex, z, &edges)?;
    Ok(Instance { m, chain: s.refine(m), flat_target: Some(s.clone()), weak_reference: Some(s) })
}

/// One row of a convergence report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub m: usize,
    /// `fn(S_m - S)`, or `fn(S_m)` when the flat limit is zero.
    pub flat: f64,
    pub flat_optimal: bool,
    pub mass: f64,
    pub measure_distance: f64,
    pub var_distance: f64,
    /// Mesh of the complex the flat norm was computed on.
    pub mesh: f64,
    pub boundary_mass: f64,
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub dictionary: String,
    pub reference_mass: Option<f64>,
    pub rows: Vec<Row>,
    pub solver_reports: Vec<Option<SolverReport>>,
}

/// Mesh of the support after `j` refinements is at most `2^-depth`.
fn sampling_levels(chain: &Chain, depth: usize) -> usize {
    if chain.is_zero() {
        return 0;
    }
    let k = chain.complex();
    let mesh = chain.support().iter().map(|&i| k.diam(chain.dim(), i)).fold(0.0, f64::max);
    let levels = (mesh * 2f64.powi(depth as i32)).log2() - 1e-9;
    levels.ceil().max(0.0) as usize
}

fn sampled_measure(chain: Option<&Chain>, n: usize, depth: usize) -> ChainMeasure {
    match chain {
        Some(c) => c.induced_measure(sampling_levels(c, depth)),
        None => ChainMeasure { n, atoms: Vec::new() },
    }
}

fn sampled_varifold(chain: Option<&Chain>, n: usize, d: usize, depth: usize) -> Result<Varifold> {
    match chain {
        Some(c) => Varifold::of_chain(c, sampling_levels(c, depth)),
        None => Ok(Varifold::empty(n, d)),
    }
}

/// Runs the whole pipeline for every `m` in the configured range. A failing
/// row is kept, with `NaN` in the affected columns and the error in `note`.
pub fn run(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let n = 2;
    let d = 1;
    let dict = TestDictionary::by_id(&cfg.dict, n, d)?;
    let mut rows = Vec::new();
    let mut solver_reports = Vec::new();
    let mut reference_mass = None;
    for m in cfg.m_min..=cfg.m_max {
        let inst = generate(cfg, m)?;
        reference_mass = inst.flat_target.as_ref().or(inst.weak_reference.as_ref()).map(Chain::mass);
        let (row, report) = run_row(cfg, &inst, &dict);
        rows.push(row);
        solver_reports.push(report);
    }
    Ok(ConvergenceReport { config: cfg.clone(), dictionary: dict.describe(), reference_mass, rows, solver_reports })
}

fn run_row(cfg: &ExperimentConfig, inst: &Instance, dict: &TestDictionary) -> (Row, Option<SolverReport>) {
    let (n, d) = (inst.chain.complex().ambient_dim(), inst.chain.dim());
    let mut notes = Vec::new();
    let opts = FlatOptions::default();
    let fine = inst.chain.refine(cfg.refine);
    let mesh = fine.complex().mesh().unwrap_or(f64::NAN);
    let flat = match &inst.flat_target {
        Some(target) => flat_distance_with(&fine, target, &opts),
        None => flat_norm_with(&fine, &opts),
    };
    let (flat, flat_optimal, report) = match flat {
        Ok((v, _, report)) => (v, report.optimal, Some(report)),
        Err(e) => {
            notes.push(format!("flat: {e}"));
            (f64::NAN, false, None)
        }
    };
    let boundary_mass = inst.chain.boundary().map(|b| b.mass()).unwrap_or(f64::NAN);
    let mu = sampled_measure(Some(&inst.chain), n, cfg.depth);
    let nu = sampled_measure(inst.weak_reference.as_ref(), n, cfg.depth);
    let measure_distance = measure_weak_distance(&mu, &nu, dict).unwrap_or_else(|e| {
        notes.push(format!("measure: {e}"));
        f64::NAN
    });
    let var_distance = sampled_varifold(Some(&inst.chain), n, d, cfg.depth)
        .and_then(|v| {
            let w = sampled_varifold(inst.weak_reference.as_ref(), n, d, cfg.depth)?;
            var_weak_distance(&v, &w, dict)
        })
        .unwrap_or_else(|e| {
            notes.push(format!("varifold: {e}"));
            f64::NAN
        });
    let row = Row {
        m: inst.m,
        flat,
        flat_optimal,
        mass: inst.chain.mass(),
        measure_distance,
        var_distance,
        mesh,
        boundary_mass,
        note: notes.join("; "),
    };
    (row, report)
}

/// Spearman rank correlation; ties get average ranks. `NaN` for fewer than
/// two points or a constant column.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mean) * (b - mean)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mean).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - mean).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Estimate of `liminf` of a finite sequence: the minimum of the last
/// [`TREND_WINDOW`] values, or, when the last three increase with
/// geometrically shrinking steps, their Aitken extrapolation.
pub fn liminf_estimate(values: &[f64]) -> f64 {
    let tail = &values[values.len().saturating_sub(TREND_WINDOW)..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    if let [.., a, b, c] = *values {
        let (d1, d2) = (b - a, c - b);
        if d1 > 0.0 && d2 > 0.0 && d2 < d1 {
            let r = d2 / d1;
            return tail_min.max(c + d2 * r / (1.0 - r));
        }
    }
    tail_min
}

/// Outcome of one scenario assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Check {
        Check { name: name.into(), passed, detail }
    }
}

impl ConvergenceReport {
    pub fn column(&self, f: impl Fn(&Row) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Spearman correlation of a column against `m` over the last
    /// [`TREND_WINDOW`] rows.
    pub fn trend(&self, f: impl Fn(&Row) -> f64) -> f64 {
        let tail = &self.rows[self.rows.len().saturating_sub(TREND_WINDOW)..];
        let ms: Vec<f64> = tail.iter().map(|r| r.m as f64).collect();
        let ys: Vec<f64> = tail.iter().map(f).collect();
        spearman(&ms, &ys)
    }

    /// The assertions the scenario is expected to satisfy.
    pub fn checks(&self) -> Vec<Check> {
        let mut out = Vec::new();
        let last = match self.rows.last() {
            Some(r) => r,
            None => return out,
        };
        let failed: Vec<usize> = self.rows.iter().filter(|r| !r.note.is_empty()).map(|r| r.m).collect();
        out.push(Check::new("rows computed", failed.is_empty(), format!("failed rows: {failed:?}")));
        let open: Vec<usize> = self.rows.iter().filter(|r| !(r.boundary_mass <= 1e-12)).map(|r| r.m).collect();
        out.push(Check::new("chains are cycles", open.is_empty(), format!("rows with boundary: {open:?}")));
        let decreasing = |name: &str, f: &dyn Fn(&Row) -> f64| {
            let rho = self.trend(f);
            Check::new(name, rho <= TREND_THRESHOLD, format!("spearman {rho:.3}"))
        };
        match self.config.scenario {
            ScenarioKind::Annulus => {
                let bad: Vec<usize> =
                    self.rows.iter().filter(|r| !(r.flat <= annulus_sector_area(r.m) * 1.05)).map(|r| r.m).collect();
                out.push(Check::new("flat norm below sector area", bad.is_empty(), format!("violations at {bad:?}")));
                let bad: Vec<usize> = self
                    .rows
                    .iter()
                    .filter(|r| !((r.mass - annulus_boundary_length(r.m)).abs() <= 0.02 * annulus_boundary_length(r.m)))
                    .map(|r| r.m)
                    .collect();
                out.push(Check::new("mass matches arc length", bad.is_empty(), format!("violations at {bad:?}")));
                out.push(decreasing("flat norm decreasing", &|r| r.flat));
                out.push(decreasing("varifold distance decreasing", &|r| r.var_distance));
            }
            ScenarioKind::EscapingRectangle => {
                let bad: Vec<usize> = self
                    .rows
                    .iter()
                    .filter(|r| !((r.mass - (2.0 + 2.0 / r.m as f64)).abs() <= 1e-9))
                    .map(|r| r.m)
                    .collect();
                out.push(Check::new("mass is 2 + 2/m", bad.is_empty(), format!("violations at {bad:?}")));
                let bad: Vec<usize> =
                    self.rows.iter().filter(|r| !(r.flat <= 1.0 / r.m as f64 + 1e-9)).map(|r| r.m).collect();
                out.push(Check::new("flat norm at most 1/m", bad.is_empty(), format!("violations at {bad:?}")));
                let radius =
                    TestDictionary::by_id(&self.config.dict, 2, 1).map(|d| d.support_radius()).unwrap_or(f64::INFINITY);
                let bad: Vec<usize> = self
                    .rows
                    .iter()
                    .filter(|r| r.m as f64 >= radius && !(r.var_distance <= 1e-12 && r.measure_distance <= 1e-12))
                    .map(|r| r.m)
                    .collect();
                out.push(Check::new(
                    "weak distances vanish past the dictionary",
                    bad.is_empty(),
                    format!("violations at {bad:?}"),
                ));
            }
            ScenarioKind::Circle => {
                let bad: Vec<usize> = self
                    .rows
                    .iter()
                    .filter(|r| !((r.mass - polygon_perimeter(r.m)).abs() <= 1e-9))
                    .map(|r| r.m)
                    .collect();
                out.push(Check::new("mass matches chord formula", bad.is_empty(), format!("violations at {bad:?}")));
                out.push(decreasing("flat distance decreasing", &|r| r.flat));
                out.push(decreasing("measure distance decreasing", &|r| r.measure_distance));
                out.push(decreasing("varifold distance decreasing", &|r| r.var_distance));
                if let Some(s) = self.reference_mass {
                    let masses = self.column(|r| r.mass);
                    let liminf = liminf_estimate(&masses);
                    out.push(Check::new(
                        "mass lower semicontinuous",
                        s <= liminf + 1e-6,
                        format!("M(S) = {s:.9}, liminf M(P_m) ~ {liminf:.9}, last {:.9}", last.mass),
                    ));
                }
            }
            ScenarioKind::Square => {
                let bad: Vec<usize> = self
                    .rows
                    .iter()
                    .filter(|r| !(r.flat <= 1e-12 && r.measure_distance <= 1e-12 && r.var_distance <= 1e-12))
                    .map(|r| r.m)
                    .collect();
                out.push(Check::new("all distances vanish", bad.is_empty(), format!("violations at {bad:?}")));
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    pub fn write_csv(&self, w: impl std::io::Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        for row in &self.rows {
            writer.serialize(row).map_err(|e| Error::InvalidInput(e.to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(
            file,
            "# scenario={} depth={} refine={} segments_per_radian={} dict={}",
            self.config.scenario.name(),
            self.config.depth,
            self.config.refine,
            self.config.segments_per_radian,
            self.dictionary
        )?;
        self.write_csv(file)
    }

    /// A static line plot of the distance columns against `m` on a log scale.
    pub fn svg(&self) -> String {
        let (w, h, pad) = (640.0, 400.0, 50.0);
        let series: [(&str, &str, Vec<f64>); 4] = [
            ("flat", "#1f77b4", self.column(|r| r.flat)),
            ("mass", "#7f7f7f", self.column(|r| r.mass)),
            ("measure", "#2ca02c", self.column(|r| r.measure_distance)),
            ("varifold", "#d62728", self.column(|r| r.var_distance)),
        ];
        let logs: Vec<f64> = series
            .iter()
            .flat_map(|(_, _, v)| v.iter().copied())
            .filter(|v| *v > 0.0 && v.is_finite())
            .map(f64::log10)
            .collect();
        let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
        let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
        let (lo, hi) = if lo.is_finite() && hi > lo { (lo, hi) } else { (-1.0, 1.0) };
        let (m0, m1) = (self.config.m_min as f64, (self.config.m_max as f64).max(self.config.m_min as f64 + 1.0));
        let px = |m: f64| pad + (m - m0) / (m1 - m0) * (w - 2.0 * pad);
        let py = |v: f64| h - pad - (v.log10() - lo) / (hi - lo) * (h - 2.0 * pad);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ =
            writeln!(s, r#"<text x="{pad}" y="20">{} (log10 scale, {lo} to {hi})</text>"#, self.config.scenario.name());
        let _ = writeln!(s, r#"<path d="M{pad} {pad} V{} H{}" stroke="black" fill="none"/>"#, h - pad, w - pad);
        for (i, (name, color, values)) in series.iter().enumerate() {
            let pts: Vec<String> = self
                .rows
                .iter()
                .zip(values)
                .filter(|(_, v)| **v > 0.0 && v.is_finite())
                .map(|(r, v)| format!("{:.2},{:.2}", px(r.m as f64), py(*v)))
                .collect();
            if !pts.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#,
                    pts.join(" ")
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
                w - pad - 60.0,
                pad + 16.0 * i as f64
            );
        }
        for r in &self.rows {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                px(r.m as f64),
                h - pad + 16.0,
                r.m
            );
        }
        s.push_str("</svg>\n");
        s
    }
}
