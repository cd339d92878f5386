//! JSON formats for scenes, chains, varifolds and flat-norm results.
//!
//! Scene:
//! ```json
//! {"n": 2, "vertices": [[0,0],[1,0],[0,1]], "simplices": {"2": [[0,1,2]]}}
//! ```
//! Chains refer to simplices of the scene's complex either by index in the
//! canonical (lexicographic) order of that dimension or by vertex list, in
//! which case the listed order fixes the orientation:
//! ```json
//! {"dim": 1, "group": {"Zmod": 2}, "coeffs": [[0, 1], [[1, 2], 1]]}
//! ```
//! Varifolds:
//! ```json
//! {"atoms": [{"x": [0, 0], "basis": [[1, 0]], "w": 1.0}]}
//! ```
//! with optional `"n"` and `"d"` (required only when there are no atoms).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chain::Chain;
use crate::coeff::Group;
use crate::flatnorm::{FlatDecomposition, SolverReport};
use crate::simplicial::Complex;
use crate::varifold::{Atom, Plane, Varifold};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SceneFile {
    pub n: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Simplices keyed by dimension; faces are added automatically.
    #[serde(default)]
    pub simplices: BTreeMap<String, Vec<Vec<usize>>>,
}

impl SceneFile {
    pub fn from_complex(k: &Complex) -> SceneFile {
        let mut simplices = BTreeMap::new();
        for d in 1..=k.top_dim() {
            if k.count(d) > 0 {
                simplices.insert(d.to_string(), k.simplices(d).to_vec());
            }
        }
        SceneFile { n: k.ambient_dim(), vertices: k.points().to_vec(), simplices }
    }

    pub fn build(&self) -> Result<Arc<Complex>> {
        let mut all = Vec::new();
        for (key, list) in &self.simplices {
            let d: usize = key.parse().map_err(|_| Error::InvalidInput(format!("bad dimension key {key:?}")))?;
            for s in list {
                if s.len() != d + 1 {
                    return Err(Error::InvalidInput(format!("simplex {s:?} listed under dimension {d}")));
                }
                all.push(s.clone());
            }
        }
        if self.vertices.is_empty() {
            return Err(Error::EmptyComplex);
        }
        Ok(Arc::new(Complex::new(self.n, self.vertices.clone(), &all)?))
    }
}

/// A chain term given by index or by oriented vertex list.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermRef {
    Index(usize),
    Vertices(Vec<usize>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainFile {
    pub dim: usize,
    pub group: Group,
    pub coeffs: Vec<(TermRef, f64)>,
}

impl ChainFile {
    pub fn from_chain(c: &Chain) -> ChainFile {
        ChainFile {
            dim: c.dim(),
            group: c.group(),
            coeffs: c.terms().map(|(i, g)| (TermRef::Index(i), g.to_f64())).collect(),
        }
    }

    pub fn build(&self, complex: &Arc<Complex>) -> Result<Chain> {
        let mut chain = Chain::zero(complex, self.dim, self.group);
        for (term, value) in &self.coeffs {
            let g = self.group.element_from_f64(*value)?;
            let piece = match term {
                TermRef::Index(i) => Chain::from_coeffs(complex, self.dim, self.group, [(*i, g)])?,
                TermRef::Vertices(v) => {
                    if v.len() != self.dim + 1 {
                        return Err(Error::DimensionMismatch { expected: self.dim + 1, found: v.len() });
                    }
                    Chain::from_simplices(complex, self.group, &[(v.clone(), g)])?
                }
            };
            chain = chain.add(&piece)?;
        }
        Ok(chain)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomFile {
    pub x: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub w: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarifoldFile {
    /// Inferred from the atoms when absent.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    pub atoms: Vec<AtomFile>,
}

impl VarifoldFile {
    pub fn from_varifold(v: &Varifold) -> VarifoldFile {
        VarifoldFile {
            n: Some(v.ambient_dim()),
            d: Some(v.dim()),
            atoms: v
                .atoms()
                .iter()
                .map(|a| AtomFile { x: a.x.clone(), basis: a.plane.basis().to_vec(), w: a.w })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<Varifold> {
        let first = self.atoms.first();
        let n = self
            .n
            .or(first.map(|a| a.x.len()))
            .ok_or_else(|| Error::InvalidInput("varifold without atoms must state its dimensions".into()))?;
        let d = self.d.or(first.map(|a| a.basis.len())).unwrap_or(0);
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                if a.basis.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: a.basis.len() });
                }
                Ok(Atom { x: a.x.clone(), plane: Plane::span(n, &a.basis)?, w: a.w })
            })
            .collect::<Result<Vec<_>>>()?;
        Varifold::new(n, d, atoms)
    }
}

/// `{value, Q, R, report}` for a flat-norm computation.
pub fn decomposition_json(dec: &FlatDecomposition, report: &SolverReport) -> Value {
    serde_json::json!({
        "value": dec.value,
        "Q": ChainFile::from_chain(&dec.q),
        "R": ChainFile::from_chain(&dec.r),
        "report": report,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

pub fn read_scene(path: &Path) -> Result<Arc<Complex>> {
    read_json::<SceneFile>(path)?.build()
}

pub fn read_chain(path: &Path, complex: &Arc<Complex>) -> Result<Chain> {
    read_json::<ChainFile>(path)?.build(complex)
}
