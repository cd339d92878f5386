//! Polyhedral flat chains with coefficients in a normed abelian group, their
//! mass and simplicial flat norm, Lipschitz pushforwards through simplexwise
//! affine approximation, and the varifolds these chains induce.
//!
//! The crate is organised bottom-up:
//!
//! - [`coeff`]: coefficient groups `Z`, `R`, `Z/pZ` with their norms.
//! - [`simplicial`]: embedded simplicial complexes, volumes, fullness and
//!   iterated standard (midpoint) subdivision.
//! - [`chain`]: chains over a complex, mass, boundary, restriction to
//!   interval regions and the induced mass measure.
//! - [`flatnorm`]: the flat norm and boundary-constrained mass minimisation,
//!   solved exactly by enumeration or as linear programs.
//! - [`lipmap`]: Lipschitz maps, approximate Jacobians and chain pushforward.
//! - [`varifold`]: Grassmannian planes, atomic varifolds, weak distances.
//! - [`harness`]: scenario generators and convergence reports.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod coeff;
pub mod flatnorm;
pub mod harness;
pub mod io;
pub mod lipmap;
pub mod simplicial;
pub mod varifold;

mod linalg;

pub use chain::{Chain, ChainMeasure, IntervalRegion};
pub use coeff::{Group, GroupElement};
pub use flatnorm::{FlatDecomposition, FlatOptions, SolveMethod, SolverReport};
pub use lipmap::{AffineApprox, LipMap};
pub use simplicial::{Complex, Subdivision};
pub use varifold::{Plane, TestDictionary, Varifold};

/// Errors produced by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("coefficient groups differ: {0} vs {1}")]
    GroupMismatch(Group, Group),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("complex is empty")]
    EmptyComplex,
    #[error("degenerate {dim}-simplex {vertices:?} (zero volume)")]
    DegenerateSimplex { dim: usize, vertices: Vec<usize> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("chains live on incompatible complexes: {0}")]
    IncompatibleComplexes(String),
    #[error("no chain with the requested boundary exists in the complex: {0}")]
    Infeasible(String),
    #[error("instance too large for exact enumeration: {0}")]
    OversizedInstance(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("test dictionary is empty")]
    EmptyDictionary,
    #[error("restricted chain has zero mass at radius {radius}")]
    ZeroRestrictedMass { radius: f64 },
    #[error("differential unavailable at {0:?}")]
    NoDifferential(Vec<f64>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
