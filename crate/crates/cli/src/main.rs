//! Command-line front end. Every subcommand prints JSON on stdout (or writes
//! it with `--out`). `experiment` prints a JSON summary, writes its CSV
//! report to `--out` and exits with status 1 when a scenario assertion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flatvar::flatnorm::{self, FlatOptions, SolveMethod};
use flatvar::harness::{self, ExperimentConfig, ScenarioKind};
use flatvar::io::{self, ChainFile, SceneFile, VarifoldFile};
use flatvar::lipmap::LipMap;
use flatvar::simplicial::fullness_floor;
use flatvar::varifold::var_weak_distance;
use flatvar::{Chain, IntervalRegion, TestDictionary, Varifold};

#[derive(Parser)]
#[command(name = "flatvar", version, about = "Flat chains, flat norms and varifolds of polyhedral chains")]
struct Cli {
    /// Write the JSON result here instead of stdout (for `experiment`: the
    /// CSV report).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Lp,
    Brute,
}

impl From<MethodArg> for SolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => SolveMethod::Auto,
            MethodArg::Lp => SolveMethod::LinearProgram,
            MethodArg::Brute => SolveMethod::BruteForce,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Standard subdivision of a scene, `levels` times.
    Subdivide {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: usize,
    },
    /// Mass of a chain.
    Mass {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
    },
    /// Boundary of a chain.
    Boundary {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
    },
    /// Restriction to a union of boxes `lo,hi;lo,hi|...`.
    Restrict {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long = "box", allow_hyphen_values = true)]
        region: String,
        #[arg(long, default_value_t = flatvar::chain::DEFAULT_RESTRICT_DEPTH)]
        depth: usize,
    },
    /// Flat norm with its optimal decomposition.
    Flatnorm {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// Least-mass chain with a prescribed boundary.
    Massmin {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        boundary: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: MethodArg,
    },
    /// Image of a chain under a builtin map at subdivision level `depth`.
    Pushforward {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 0)]
        depth: usize,
    },
    /// Varifold of a chain sampled at subdivision level `depth`.
    Varify {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 0)]
        depth: usize,
    },
    /// Weak distance between two varifolds.
    Vardist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value = "default")]
        dict: String,
    },
    /// Convergence experiment over a range of m.
    Experiment {
        #[arg(long)]
        scenario: Option<String>,
        /// Range `a..b` (inclusive).
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        dict: Option<String>,
        #[arg(long)]
        refine: Option<usize>,
        #[arg(long)]
        segments_per_radian: Option<f64>,
        /// JSON config; flags given on the command line override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn load(scene: &Path, chain: &Path) -> Result<Chain> {
    let complex = io::read_scene(scene).with_context(|| format!("reading scene {}", scene.display()))?;
    io::read_chain(chain, &complex).with_context(|| format!("reading chain {}", chain.display()))
}

fn chain_with_scene(c: &Chain) -> Value {
    json!({ "scene": SceneFile::from_complex(c.complex()), "chain": ChainFile::from_chain(c) })
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once("..").context("range must look like a..b")?;
    Ok((a.trim().parse()?, b.trim().trim_start_matches('=').parse()?))
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    let out = cli.out.as_deref();
    match cli.command {
        Command::Subdivide { scene, levels } => {
            let complex = io::read_scene(&scene)?;
            let fine = complex.refine(levels);
            let mut value = serde_json::to_value(SceneFile::from_complex(&fine))?;
            value["mesh"] = json!(fine.mesh()?);
            value["min_fullness"] = json!(fine.min_fullness());
            if complex.top_dim() > 0 && levels > 0 {
                value["fullness_floor"] = json!(fullness_floor(&complex, levels)?);
            }
            emit(out, &value)?;
        }
        Command::Mass { scene, chain } => {
            let c = load(&scene, &chain)?;
            emit(out, &json!({ "mass": c.mass() }))?;
        }
        Command::Boundary { scene, chain } => {
            let c = load(&scene, &chain)?;
            emit(out, &serde_json::to_value(ChainFile::from_chain(&c.boundary()?))?)?;
        }
        Command::Restrict { scene, chain, region, depth } => {
            let c = load(&scene, &chain)?;
            let region = IntervalRegion::parse(&region)?;
            let r = c.restrict(&region, depth)?;
            let mut value = chain_with_scene(&r);
            value["mass"] = json!(r.mass());
            emit(out, &value)?;
        }
        Command::Flatnorm { scene, chain, method } => {
            let c = load(&scene, &chain)?;
            let (_, dec, report) = flatnorm::flat_norm_with(&c, &FlatOptions::with_method(method.into()))?;
            emit(out, &io::decomposition_json(&dec, &report))?;
        }
        Command::Massmin { scene, boundary, method } => {
            let t = load(&scene, &boundary)?;
            let complex = t.complex().clone();
            let (s, report) = flatnorm::mass_minimize_with(&t, &complex, &FlatOptions::with_method(method.into()))?;
            emit(out, &json!({ "mass": s.mass(), "chain": ChainFile::from_chain(&s), "report": report }))?;
        }
        Command::Pushforward { scene, chain, map, depth } => {
            let c = load(&scene, &chain)?;
            let f = LipMap::from_spec(&map, c.complex().ambient_dim())?;
            let image = f.pushforward_chain(&c, depth)?;
            let mut value = chain_with_scene(&image.chain);
            value["mass"] = json!(image.chain.mass());
            value["dropped"] = json!(image.dropped);
            value["lip_bound"] = json!(f.lip_bound());
            if let Some(w) = &image.warning {
                eprintln!("warning: {w}");
                value["warning"] = json!(w);
            }
            emit(out, &value)?;
        }
        Command::Varify { scene, chain, depth } => {
            let c = load(&scene, &chain)?;
            let v = Varifold::of_chain(&c, depth)?;
            emit(out, &serde_json::to_value(VarifoldFile::from_varifold(&v))?)?;
        }
        Command::Vardist { a, b, dict } => {
            let va = io::read_json::<VarifoldFile>(&a)?.build()?;
            let vb = io::read_json::<VarifoldFile>(&b)?.build()?;
            if (va.ambient_dim(), va.dim()) != (vb.ambient_dim(), vb.dim()) {
                bail!("varifolds have different dimensions");
            }
            let dictionary = TestDictionary::by_id(&dict, va.ambient_dim(), va.dim())?;
            let d = var_weak_distance(&va, &vb, &dictionary)?;
            emit(out, &json!({ "distance": d, "dictionary": dictionary.describe() }))?;
        }
        Command::Experiment { scenario, m, depth, dict, refine, segments_per_radian, config, plot } => {
            let mut cfg = match &config {
                Some(p) => io::read_json::<ExperimentConfig>(p).with_context(|| format!("reading {}", p.display()))?,
                None => {
                    let kind: ScenarioKind =
                        scenario.as_deref().context("--scenario or --config is required")?.parse()?;
                    let (lo, hi) = parse_range(m.as_deref().context("--m is required")?)?;
                    ExperimentConfig::new(kind, lo, hi)
                }
            };
            if config.is_some() {
                if let Some(s) = &scenario {
                    cfg.scenario = s.parse()?;
                }
                if let Some(r) = &m {
                    (cfg.m_min, cfg.m_max) = parse_range(r)?;
                }
            }
            if let Some(d) = depth {
                cfg.depth = d;
            }
            if let Some(d) = dict {
                cfg.dict = d;
            }
            if let Some(r) = refine {
                cfg.refine = r;
            }
            if let Some(s) = segments_per_radian {
                cfg.segments_per_radian = s;
            }
            let report = harness::run(&cfg)?;
            if let Some(p) = out {
                report.save_csv(p)?;
            }
            if let Some(p) = &plot {
                std::fs::write(p, report.svg())?;
            }
            let checks = report.checks();
            for c in &checks {
                eprintln!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            emit(None, &json!({ "rows": report.rows, "checks": checks, "dictionary": report.dictionary }))?;
            if !checks.iter().all(|c| c.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
