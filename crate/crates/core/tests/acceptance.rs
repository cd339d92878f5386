//! Acceptance suite. Runs every criterion, prints one `[PASS]`/`[FAIL]` line
//! each and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use flatvar::flatnorm::{self, FlatOptions, Method, SolveMethod};
use flatvar::harness::{self, annulus_sector_area, polygon_perimeter, spearman, ExperimentConfig, ScenarioKind};
use flatvar::lipmap::{jacobian_l1_error, jacobian_mass_bound, pushforward_mass_limit};
use flatvar::varifold::grassmann_dist;
use flatvar::{AffineApprox, Chain, Complex, Group, GroupElement, LipMap, Plane, TestDictionary};
use petgraph::graph::UnGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

fn timed(limit: Duration, start: Instant, passed: bool, detail: String) -> (bool, String) {
    let elapsed = start.elapsed();
    (passed && elapsed < limit, format!("{detail}; {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs()))
}

fn random_element(group: Group, rng: &mut impl Rng) -> GroupElement {
    match group {
        Group::Reals => group.element_from_f64(rng.gen_range(-100.0..100.0)).unwrap(),
        _ if rng.gen_bool(0.1) => group.zero(),
        _ => group.from_int(rng.gen_range(-1000..=1000)),
    }
}

fn norm_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let groups = [Group::Integers, Group::Reals, Group::cyclic(2)?, Group::cyclic(3)?, Group::cyclic(7)?];
    let mut violations = Vec::new();
    for group in groups {
        for _ in 0..1000 {
            let t = [random_element(group, &mut rng), random_element(group, &mut rng), random_element(group, &mut rng)];
            for g in &t {
                if (g.norm() == 0.0) != g.is_zero() || g.norm() < 0.0 {
                    violations.push(format!("{group}: definiteness at {g:?}"));
                }
                if g.neg().norm() != g.norm() {
                    violations.push(format!("{group}: symmetry at {g:?}"));
                }
            }
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                if t[a].add(&t[b])?.norm() > t[a].norm() + t[b].norm() {
                    violations.push(format!("{group}: triangle at {:?}, {:?}", t[a], t[b]));
                }
            }
            if t[0].add(&t[1])?.add(&t[2])?.norm() > t[0].norm() + t[1].norm() + t[2].norm() {
                violations.push(format!("{group}: triangle at {t:?}"));
            }
        }
    }
    let detail = format!("5 groups x 1000 triples, {} violations {:?}", violations.len(), violations.first());
    Ok(timed(Duration::from_secs(1), start, violations.is_empty(), detail))
}

/// A jittered polyline in the plane with `edges` segments.
fn polyline(edges: usize, rng: &mut impl Rng) -> Arc<Complex> {
    let points: Vec<Vec<f64>> =
        (0..=edges).map(|i| vec![i as f64 * 0.3 + rng.gen_range(-0.1..0.1), rng.gen_range(-0.2..0.2)]).collect();
    let segments: Vec<Vec<usize>> = (0..edges).map(|i| vec![i, i + 1]).collect();
    Arc::new(Complex::new(2, points, &segments).unwrap())
}

fn relaxation_vs_enumeration() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let z2 = Group::cyclic(2)?;
    let (mut integral, mut problems) = (0, Vec::new());
    for trial in 0..20 {
        let (k, dim) = if trial % 4 == 3 {
            (polyline(rng.gen_range(4..=12), &mut rng), 0)
        } else {
            let (nx, ny) = [(2, 2), (3, 2), (2, 3), (1, 3)][rng.gen_range(0..4)];
            (common::random_grid(nx, ny, 0.4, 0.2, &mut rng), 1)
        };
        assert!(k.count(k.top_dim()) <= 12);
        let p = common::random_chain(&k, dim, z2, 0.5, 1, &mut rng);
        let (brute, dec, brute_report) =
            flatnorm::flat_norm_with(&p, &FlatOptions::with_method(SolveMethod::BruteForce))?;
        let (lp, _, lp_report) = flatnorm::flat_norm_with(&p, &FlatOptions::with_method(SolveMethod::LinearProgram))?;
        if brute_report.method != Method::BruteForce || !brute_report.optimal {
            problems.push(format!("trial {trial}: enumeration not used"));
        }
        if dec.residual(&p)? > 1e-9 || (dec.q.mass() + dec.r.mass() - brute).abs() > 1e-9 {
            problems.push(format!("trial {trial}: decomposition does not verify"));
        }
        if lp_report.lower_bound > brute + 1e-9 {
            problems.push(format!("trial {trial}: relaxation {} above enumeration {brute}", lp_report.lower_bound));
        }
        if lp_report.optimal {
            integral += 1;
            if (lp - brute).abs() > 1e-9 {
                problems.push(format!("trial {trial}: integral relaxation {lp} differs from {brute}"));
            }
        }
    }
    let detail = format!("20 instances, {integral} with integral relaxation, problems {problems:?}");
    Ok(timed(Duration::from_secs(60), start, problems.is_empty(), detail))
}

fn square_boundary() -> Outcome {
    let k = common::unit_square();
    let z2 = Group::cyclic(2)?;
    let p = common::square_boundary(&k, z2);
    let (v, dec, report) = flatnorm::flat_norm_with(&p, &FlatOptions::with_method(SolveMethod::BruteForce))?;
    // every choice of 2-chain R, with Q = P - dR
    let mut best = f64::INFINITY;
    for mask in 0..4u32 {
        let terms: Vec<_> = (0..2).filter(|b| mask >> b & 1 == 1).map(|b| (b, z2.one())).collect();
        let r = Chain::from_coeffs(&k, 2, z2, terms)?;
        let q = p.sub(&r.boundary()?)?;
        best = best.min(q.mass() + r.mass());
    }
    let passed = v == 1.0 && best == 1.0 && dec.q.is_zero() && dec.r.len() == 2 && report.optimal;
    Ok((passed, format!("enumeration {v}, hand enumeration {best}, R has {} triangles", dec.r.len())))
}

fn escaping_rectangle() -> Outcome {
    let report = harness::run(&ExperimentConfig::new(ScenarioKind::EscapingRectangle, 1, 12))?;
    let radius = TestDictionary::default_for(2, 1).support_radius();
    let mut problems = Vec::new();
    for r in &report.rows {
        let m = r.m as f64;
        if (r.mass - (2.0 + 2.0 / m)).abs() > 1e-9 {
            problems.push(format!("mass {} at m={}", r.mass, r.m));
        }
        if m >= radius && r.var_distance > 1e-12 {
            problems.push(format!("var distance {} at m={}", r.var_distance, r.m));
        }
        if r.flat > 1.0 / m + 1e-9 {
            problems.push(format!("flat norm {} at m={}", r.flat, r.m));
        }
    }
    let last = report.rows.last().ok_or("no rows")?;
    if (last.mass - 2.0).abs() > 0.17 {
        problems.push(format!("limit row mass {}", last.mass));
    }
    Ok((
        problems.is_empty(),
        format!(
            "m=1..12, dictionary radius {radius:.3}, M(S_12)={:.4}, fn(S_12)={:.4}, problems {problems:?}",
            last.mass, last.flat
        ),
    ))
}

fn thin_annulus() -> Outcome {
    let start = Instant::now();
    let report = harness::run(&ExperimentConfig::new(ScenarioKind::Annulus, 2, 10))?;
    let mut problems = Vec::new();
    for r in &report.rows {
        if r.flat.is_nan() || r.flat > 1.05 * annulus_sector_area(r.m) {
            problems.push(format!("fn {} above area bound at m={}", r.flat, r.m));
        }
    }
    let tail: Vec<_> = report.rows.iter().filter(|r| r.m >= 4).collect();
    let ms: Vec<f64> = tail.iter().map(|r| r.m as f64).collect();
    let rho = spearman(&ms, &tail.iter().map(|r| r.var_distance).collect::<Vec<_>>());
    let last = report.rows.last().ok_or("no rows")?;
    let first = &report.rows[0];
    let flat_rho = report.trend(|r| r.flat);
    let passed = problems.is_empty()
        && rho <= -0.9
        && last.var_distance <= 0.05
        && flat_rho <= -0.9
        && last.flat < first.flat / 10.0;
    let detail = format!(
        "var distance spearman {rho:.3}, final {:.4}; fn {:.4} -> {:.5}; problems {problems:?}",
        last.var_distance, first.flat, last.flat
    );
    Ok(timed(Duration::from_secs(300), start, passed, detail))
}

fn polygonal_circle(report: &harness::ConvergenceReport) -> Outcome {
    let ms: Vec<f64> = report.rows.iter().map(|r| r.m as f64).collect();
    let col = |f: fn(&harness::Row) -> f64| report.rows.iter().map(f).collect::<Vec<_>>();
    let flat_rho = spearman(&ms, &col(|r| r.flat));
    let var_rho = spearman(&ms, &col(|r| r.var_distance));
    let last = report.rows.last().ok_or("no rows")?;
    let chord_ok = report.rows.iter().all(|r| (r.mass - polygon_perimeter(r.m)).abs() <= 1e-9);
    let passed = flat_rho <= -0.9
        && last.flat <= 1e-2
        && chord_ok
        && (last.mass - 2.0 * PI).abs() <= 1e-3
        && var_rho <= -0.9
        && last.var_distance <= 2e-2;
    Ok((
        passed,
        format!(
            "fn spearman {flat_rho:.3} final {:.2e}; |M(P_9) - 2pi| = {:.2e}; var spearman {var_rho:.3} final {:.2e}",
            last.flat,
            (last.mass - 2.0 * PI).abs(),
            last.var_distance
        ),
    ))
}

fn circle_measures(report: &harness::ConvergenceReport) -> Outcome {
    let ms: Vec<f64> = report.rows.iter().map(|r| r.m as f64).collect();
    let rho = spearman(&ms, &report.rows.iter().map(|r| r.measure_distance).collect::<Vec<_>>());
    let last = report.rows.last().ok_or("no rows")?;
    Ok((
        rho <= -0.9 && last.measure_distance <= 2e-2,
        format!("spearman {rho:.3}, final {:.2e}", last.measure_distance),
    ))
}

fn affine_jacobian() -> Outcome {
    let start = Instant::now();
    let k = Arc::new(Complex::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], &[vec![0, 1, 2]])?);
    let f = LipMap::from_spec("poly:1:0.5:2,0", 2)?;
    let errors = (0..=8).map(|lvl| jacobian_l1_error(&f, &k, lvl)).collect::<Result<Vec<_>, _>>()?;
    let monotone = errors[1..].windows(2).all(|w| w[1] <= w[0]);
    let passed = monotone && errors[8] <= 1e-3;
    let shown: Vec<String> = errors.iter().map(|e| format!("{e:.2e}")).collect();
    Ok(timed(Duration::from_secs(30), start, passed, format!("errors {}", shown.join(" "))))
}

const MAPS: [&str; 8] = [
    "identity",
    "scale:1.7",
    "rotation:0.6",
    "polar_wrap",
    "fold",
    "poly:1:0.5:2,0",
    "poly:0:0.3:1,1+1:-0.2:0,2",
    "poly:0:0.4:0,2+1:0.3:3,0",
];

fn pushforward_mass() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    let mut problems = Vec::new();
    for trial in 0..50 {
        let spec = MAPS[trial % MAPS.len()];
        let f = LipMap::from_spec(spec, 2)?;
        let k = common::random_grid(3, 3, 0.5 / 3.0, 0.2, &mut rng);
        let dim = rng.gen_range(1..=2);
        let group = if rng.gen_bool(0.5) { Group::Integers } else { Group::Reals };
        let p = common::random_chain(&k, dim, group, 0.6, 2, &mut rng);
        // M(f# P) is the limit of the level-k chord interpolant masses
        let mass = pushforward_mass_limit(&f, &p, 4)?;
        let bound = jacobian_mass_bound(&f, &p, 3)?;
        let gap = mass - bound;
        worst = worst.max(gap);
        if gap > 1e-6 {
            problems.push(format!("{spec} dim {dim}: {mass} > {bound}"));
        }
    }
    Ok((problems.is_empty(), format!("50 pairs, max M(f#P) - bound = {worst:.3e}, problems {problems:?}")))
}

const INJECTIVE: [&str; 6] = ["identity", "scale:0.5", "scale:2", "rotation:1.1", "poly:1:0.5:2,0", "polar_wrap"];

fn pushforward_continuity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = f64::NEG_INFINITY;
    let mut problems = Vec::new();
    for trial in 0..20 {
        let spec = INJECTIVE[trial % INJECTIVE.len()];
        let f = LipMap::from_spec(spec, 2)?;
        let lip = f.lip_bound().ok_or("builtin map without a Lipschitz bound")?;
        let k = common::random_grid(2, 2, 0.25, 0.2, &mut rng);
        let dim = if trial % 5 == 4 { 2 } else { 1 };
        let p = common::random_chain(&k, dim, Group::Reals, 0.5, 2, &mut rng);
        let q = common::random_chain(&k, dim, Group::Reals, 0.5, 2, &mut rng);
        let level = 1;
        let images = AffineApprox::new(&f, &k, level).push_with_ambient(&[&p, &q], level)?;
        let before = flatnorm::flat_distance(&p, &q)?;
        let after = flatnorm::flat_distance(&images[0], &images[1])?;
        let factor = lip.powi(dim as i32).max(lip.powi(dim as i32 + 1));
        let gap = after - factor * before;
        worst = worst.max(gap);
        if gap > 1e-3 {
            problems.push(format!("{spec} dim {dim}: {after} > {factor} * {before}"));
        }
    }
    let detail = format!("20 pairs, max excess {worst:.3e}, problems {problems:?}");
    Ok(timed(Duration::from_secs(120), start, problems.is_empty(), detail))
}

fn shortest_paths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let flips: Vec<bool> = (0..100).map(|_| rng.gen()).collect();
    let k = common::grid_with(10, 10, 0.1, |i, j| flips[j * 10 + i]);
    let mut graph = UnGraph::<(), f64>::new_undirected();
    let nodes: Vec<_> = (0..k.num_vertices()).map(|_| graph.add_node(())).collect();
    for e in 0..k.count(1) {
        let v = k.vertices_of(1, e);
        graph.add_edge(nodes[v[0]], nodes[v[1]], k.volume(1, e));
    }
    let reals = Group::Reals;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let a = rng.gen_range(0..k.num_vertices());
        let b = loop {
            let b = rng.gen_range(0..k.num_vertices());
            if b != a {
                break b;
            }
        };
        let t = Chain::from_simplices(&k, reals, &[(vec![b], reals.one()), (vec![a], reals.from_int(-1))])?;
        let (s, _) = flatnorm::mass_minimize(&t, &k)?;
        let dist = petgraph::algo::dijkstra(&graph, nodes[a], Some(nodes[b]), |e| *e.weight());
        worst = worst.max((s.mass() - dist[&nodes[b]]).abs());
        if s.boundary()?.sub(&t)?.mass() > 1e-9 {
            return Ok((false, format!("boundary of the minimiser differs for {a} -> {b}")));
        }
    }
    Ok((worst <= 1e-9, format!("10 pairs on a 10x10 grid, max |mass - shortest path| = {worst:.2e}")))
}

fn random_plane(rng: &mut impl Rng) -> Plane {
    loop {
        let vs: Vec<Vec<f64>> = (0..2).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        if let Ok(p) = Plane::span(4, &vs) {
            return p;
        }
    }
}

fn grassmannian() -> Outcome {
    let base = Plane::line_at_angle(2, 0.0);
    let mut worst_angle: f64 = 0.0;
    for theta in [PI / 6.0, PI / 4.0, PI / 3.0] {
        let d = grassmann_dist(&base, &Plane::line_at_angle(2, theta))?;
        worst_angle = worst_angle.max((d - theta.sin()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut violations = 0;
    for _ in 0..100 {
        let [a, b, c] = [random_plane(&mut rng), random_plane(&mut rng), random_plane(&mut rng)];
        let (ab, bc, ac) = (grassmann_dist(&a, &b)?, grassmann_dist(&b, &c)?, grassmann_dist(&a, &c)?);
        let ok = grassmann_dist(&a, &a)? <= 1e-12
            && ab > 1e-9
            && (ab - grassmann_dist(&b, &a)?).abs() <= 1e-12
            && ac <= ab + bc + 1e-12;
        violations += usize::from(!ok);
    }
    Ok((
        worst_angle <= 1e-9 && violations == 0,
        format!("max |dist - sin| = {worst_angle:.2e}; metric violations {violations}/100"),
    ))
}

fn main() {
    let circle = harness::run(&ExperimentConfig::new(ScenarioKind::Circle, 3, 9));
    let on_circle = |f: fn(&harness::ConvergenceReport) -> Outcome| -> Outcome {
        match &circle {
            Ok(report) => f(report),
            Err(e) => Err(e.to_string().into()),
        }
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("coefficient norm axioms", norm_axioms()),
        ("mod 2 relaxation against enumeration", relaxation_vs_enumeration()),
        ("mod 2 square boundary", square_boundary()),
        ("escaping rectangle", escaping_rectangle()),
        ("thin annulus", thin_annulus()),
        ("polygonal circle", on_circle(polygonal_circle)),
        ("mass measures of the polygonal circle", on_circle(circle_measures)),
        ("affine approximation of the Jacobian", affine_jacobian()),
        ("pushforward mass inequality", pushforward_mass()),
        ("pushforward flat continuity", pushforward_continuity()),
        ("mass minimisation against shortest paths", shortest_paths()),
        ("Grassmannian metric", grassmannian()),
    ];
    let mut failures = 0;
    for (i, (name, outcome)) in results.into_iter().enumerate() {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        failures += usize::from(!passed);
        println!("[{}] criterion {}: {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
