//! Normed abelian coefficient groups.
//!
//! Three groups are supported: the integers, the reals, and the cyclic groups
//! `Z/pZ`. The cyclic norm is the geodesic one, `|k| = min(k, p - k)`, so a
//! `Z/2Z` chain has mass equal to the volume of its support.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A coefficient group. Serializes as `"Z"`, `"R"` or `{"Zmod": p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "Z")]
    Integers,
    #[serde(rename = "R")]
    Reals,
    #[serde(rename = "Zmod")]
    CyclicMod(u32),
}

impl Group {
    /// Checked constructor for `Z/pZ`; `p` must be at least 2.
    pub fn cyclic(p: u32) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidInput(format!("Z/{p}Z is not a valid coefficient group")));
        }
        Ok(Group::CyclicMod(p))
    }

    pub fn zero(self) -> GroupElement {
        match self {
            Group::Integers => GroupElement::Int(0),
            Group::Reals => GroupElement::Real(0.0),
            Group::CyclicMod(p) => GroupElement::Mod { value: 0, p },
        }
    }

    /// The element `1`, or its image in `Z/pZ`.
    pub fn one(self) -> GroupElement {
        self.from_int(1)
    }

    /// Image of an integer under the canonical map `Z -> G`.
    pub fn from_int(self, k: i64) -> GroupElement {
        match self {
            Group::Integers => GroupElement::Int(k),
            Group::Reals => GroupElement::Real(k as f64),
            Group::CyclicMod(p) => GroupElement::Mod { value: k.rem_euclid(p as i64) as u32, p },
        }
    }

    /// Parses a JSON-ish numeric value into an element of this group.
    ///
    /// Integer groups reject non-integral input; cyclic groups reduce mod `p`.
    pub fn element_from_f64(self, v: f64) -> Result<GroupElement> {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite coefficient {v}")));
        }
        match self {
            Group::Reals => Ok(GroupElement::Real(v)),
            _ => {
                if v.fract() != 0.0 {
                    return Err(Error::InvalidInput(format!("coefficient {v} is not an element of {self}")));
                }
                Ok(self.from_int(v as i64))
            }
        }
    }

    /// Number of elements for finite groups.
    pub fn order(self) -> Option<u32> {
        match self {
            Group::CyclicMod(p) => Some(p),
            _ => None,
        }
    }

    /// True when `-g = g` for every element (only `Z/2Z`).
    pub fn is_characteristic_two(self) -> bool {
        self == Group::CyclicMod(2)
    }

    /// All elements of a finite group in canonical order.
    pub fn elements(self) -> Option<Vec<GroupElement>> {
        self.order().map(|p| (0..p).map(|k| GroupElement::Mod { value: k, p }).collect())
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Integers => write!(f, "Z"),
            Group::Reals => write!(f, "R"),
            Group::CyclicMod(p) => write!(f, "Z/{p}Z"),
        }
    }
}

/// An element of one of the supported groups.
///
/// Cyclic values are always kept reduced into `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GroupElement {
    Int(i64),
    Real(f64),
    Mod { value: u32, p: u32 },
}

impl GroupElement {
    pub fn group(&self) -> Group {
        match *self {
            GroupElement::Int(_) => Group::Integers,
            GroupElement::Real(_) => Group::Reals,
            GroupElement::Mod { p, .. } => Group::CyclicMod(p),
        }
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement> {
        match (*self, *other) {
            (GroupElement::Int(a), GroupElement::Int(b)) => a
                .checked_add(b)
                .map(GroupElement::Int)
                .ok_or_else(|| Error::InvalidInput("integer coefficient overflow".into())),
            (GroupElement::Real(a), GroupElement::Real(b)) => Ok(GroupElement::Real(a + b)),
            (GroupElement::Mod { value: a, p }, GroupElement::Mod { value: b, p: q }) if p == q => {
                Ok(GroupElement::Mod { value: ((a as u64 + b as u64) % p as u64) as u32, p })
            }
            _ => Err(Error::GroupMismatch(self.group(), other.group())),
        }
    }

    pub fn neg(&self) -> GroupElement {
        match *self {
            GroupElement::Int(a) => GroupElement::Int(-a),
            GroupElement::Real(a) => GroupElement::Real(-a),
            GroupElement::Mod { value, p } => GroupElement::Mod { value: (p - value) % p, p },
        }
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement> {
        self.add(&other.neg())
    }

    /// Integer multiple `k * g`.
    pub fn scale(&self, k: i64) -> GroupElement {
        match *self {
            GroupElement::Int(a) => GroupElement::Int(a * k),
            GroupElement::Real(a) => GroupElement::Real(a * k as f64),
            GroupElement::Mod { value, p } => {
                GroupElement::Mod { value: ((value as i64 * k).rem_euclid(p as i64)) as u32, p }
            }
        }
    }

    /// Multiplies by an orientation sign (`+1` or `-1`).
    pub fn signed(&self, sign: i8) -> GroupElement {
        if sign < 0 {
            self.neg()
        } else {
            *self
        }
    }

    pub fn norm(&self) -> f64 {
        match *self {
            GroupElement::Int(a) => a.unsigned_abs() as f64,
            GroupElement::Real(a) => a.abs(),
            GroupElement::Mod { value, p } => value.min(p - value) as f64,
        }
    }

    /// Exact zero test, with no tolerance for reals.
    pub fn is_zero(&self) -> bool {
        match *self {
            GroupElement::Int(a) => a == 0,
            GroupElement::Real(a) => a == 0.0,
            GroupElement::Mod { value, .. } => value == 0,
        }
    }

    /// Representative as a float (the reduced value for cyclic groups).
    pub fn to_f64(&self) -> f64 {
        match *self {
            GroupElement::Int(a) => a as f64,
            GroupElement::Real(a) => a,
            GroupElement::Mod { value, .. } => value as f64,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(a) => write!(f, "{a}"),
            GroupElement::Real(a) => write!(f, "{a}"),
            GroupElement::Mod { value, p } => write!(f, "{value} mod {p}"),
        }
    }
}
