use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SCENE: &str = r#"{"n": 2, "vertices": [[0,0],[1,0],[0,1],[1,1]], "simplices": {"2": [[0,1,3],[0,3,2]]}}"#;
const SQUARE_Z2: &str = r#"{"dim": 1, "group": {"Zmod": 2}, "coeffs": [[[0,1],1],[[1,3],1],[[3,2],1],[[2,0],1]]}"#;
const SQUARE_R: &str = r#"{"dim": 1, "group": "R", "coeffs": [[[0,1],1],[[1,3],1],[[3,2],1],[[2,0],1]]}"#;
const ENDPOINTS: &str = r#"{"dim": 0, "group": "R", "coeffs": [[[3],1],[[0],-1]]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        for (name, text) in
            [("scene.json", SCENE), ("z2.json", SQUARE_Z2), ("r.json", SQUARE_R), ("ends.json", ENDPOINTS)]
        {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_flatvar")).current_dir(self.dir.path()).args(args).output().unwrap()
    }

    fn json(&self, args: &[&str]) -> Value {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    }
}

fn close(v: &Value, expected: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() <= 1e-9
}

#[test]
fn mass_and_boundary() {
    let fx = Fixture::new();
    let v = fx.json(&["mass", "--scene", "scene.json", "--chain", "r.json"]);
    assert!(close(&v["mass"], 4.0));
    let b = fx.json(&["boundary", "--scene", "scene.json", "--chain", "r.json"]);
    assert_eq!(b["dim"], 0);
    assert!(b["coeffs"].as_array().unwrap().is_empty());
}

#[test]
fn flatnorm_with_each_method() {
    let fx = Fixture::new();
    for method in ["auto", "lp", "brute"] {
        let v = fx.json(&["flatnorm", "--scene", "scene.json", "--chain", "z2.json", "--method", method]);
        assert!(close(&v["value"], 1.0), "{method}: {v}");
        assert_eq!(v["R"]["coeffs"].as_array().unwrap().len(), 2);
        assert!(v["report"]["residual"].as_f64().unwrap() <= 1e-9);
    }
    // enumeration is refused for real coefficients
    let out = fx.run(&["flatnorm", "--scene", "scene.json", "--chain", "r.json", "--method", "brute"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn massmin_finds_the_diagonal() {
    let fx = Fixture::new();
    let v = fx.json(&["massmin", "--scene", "scene.json", "--boundary", "ends.json"]);
    assert!(close(&v["mass"], 2f64.sqrt()));
}

#[test]
fn subdivide_and_restrict() {
    let fx = Fixture::new();
    let v = fx.json(&["subdivide", "--scene", "scene.json", "--levels", "2"]);
    assert_eq!(v["simplices"]["2"].as_array().unwrap().len(), 32);
    assert!(close(&v["mesh"], 2f64.sqrt() / 4.0));
    let r = fx.json(&["restrict", "--scene", "scene.json", "--chain", "r.json", "--box", "-1,0.5;-1,2"]);
    assert!(close(&r["mass"], 2.0), "{}", r["mass"]);
}

#[test]
fn pushforward_scales_mass() {
    let fx = Fixture::new();
    let v = fx.json(&["pushforward", "--scene", "scene.json", "--chain", "r.json", "--map", "scale:2", "--depth", "1"]);
    assert!(close(&v["mass"], 8.0));
    assert!(close(&v["lip_bound"], 2.0));
    let out = fx.run(&["pushforward", "--scene", "scene.json", "--chain", "r.json", "--map", "warp"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn varify_then_distance() {
    let fx = Fixture::new();
    let a = fx.path("a.json");
    let out =
        fx.run(&["--out", a.to_str().unwrap(), "varify", "--scene", "scene.json", "--chain", "r.json", "--depth", "2"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    assert_eq!(v["atoms"].as_array().unwrap().len(), 16);
    let d = fx.json(&["vardist", "--a", "a.json", "--b", "a.json"]);
    assert!(close(&d["distance"], 0.0));
    std::fs::write(fx.path("empty.json"), r#"{"n": 2, "d": 1, "atoms": []}"#).unwrap();
    let d = fx.json(&["vardist", "--a", "a.json", "--b", "empty.json"]);
    assert!(d["distance"].as_f64().unwrap() > 0.1);
}

fn read_csv(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn experiment_writes_report() {
    let fx = Fixture::new();
    let csv = fx.path("report.csv");
    let svg = fx.path("report.svg");
    let out = fx.run(&[
        "--out",
        csv.to_str().unwrap(),
        "experiment",
        "--scenario",
        "escaping_rectangle",
        "--m",
        "1..6",
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().all(|l| l.starts_with("[PASS]")), "{stderr}");
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 6);
    assert_eq!(read_csv(&csv).len(), 7);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));
}

#[test]
fn experiment_from_config_with_override() {
    let fx = Fixture::new();
    std::fs::write(fx.path("cfg.json"), r#"{"scenario": "annulus", "m_min": 2, "m_max": 3, "depth": 4}"#).unwrap();
    let out = fx.run(&["experiment", "--config", "cfg.json", "--m", "2..4"]);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 3);
    std::fs::write(fx.path("bad.json"), r#"{"scenario": "annulus", "m_min": 2, "m_max": 3, "typo": 1}"#).unwrap();
    assert_eq!(fx.run(&["experiment", "--config", "bad.json"]).status.code(), Some(2));
}

#[test]
fn malformed_input_exits_with_two() {
    let fx = Fixture::new();
    std::fs::write(fx.path("broken.json"), "{").unwrap();
    assert_eq!(fx.run(&["mass", "--scene", "broken.json", "--chain", "r.json"]).status.code(), Some(2));
    assert_eq!(fx.run(&["mass", "--scene", "scene.json", "--chain", "missing.json"]).status.code(), Some(2));
}
