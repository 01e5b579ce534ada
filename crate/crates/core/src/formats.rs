//! JSON documents for systems, normalized systems and maps.
//!
//! Integers are written as bare JSON numbers of any length.

use std::fmt;

use num_bigint::BigInt;
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, IntVector};
use crate::normal_form::NormalizedSystem;
use crate::simplex::{AffineUnimodularMap, InequalitySystem};

pub const SYSTEM_FORMAT: &str = "delta-simplex/system-v1";
pub const NORMALIZED_FORMAT: &str = "delta-simplex/normalized-v1";

/// An arbitrary-precision integer that serializes as a plain JSON number.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Int(pub BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let number: Number = self
            .0
            .to_string()
            .parse()
            .map_err(serde::ser::Error::custom)?;
        number.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let number = Number::deserialize(deserializer)?;
        let text = number.to_string();
        text.parse::<BigInt>()
            .map(Int)
            .map_err(|_| de::Error::custom(format!("expected an integer, got {text}")))
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn ints(v: &[BigInt]) -> Vec<Int> {
    v.iter().cloned().map(Int).collect()
}

pub fn int_rows(m: &IntMatrix) -> Vec<Vec<Int>> {
    m.to_rows().iter().map(|r| ints(r)).collect()
}

pub fn from_ints(v: Vec<Int>) -> IntVector {
    v.into_iter().map(|x| x.0).collect()
}

pub fn matrix_from_rows(rows: Vec<Vec<Int>>, cols: usize) -> Result<IntMatrix> {
    IntMatrix::from_rows(rows.into_iter().map(from_ints).collect(), cols)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    pub format: String,
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Int>>,
    pub b: Vec<Int>,
}

impl SystemDoc {
    pub fn from_system(sys: &InequalitySystem) -> Self {
        Self {
            format: SYSTEM_FORMAT.into(),
            n: sys.dim(),
            a: int_rows(sys.a()),
            b: ints(sys.b()),
        }
    }

    pub fn to_system(self) -> Result<InequalitySystem> {
        check_format(&self.format, SYSTEM_FORMAT)?;
        if self.a.len() != self.n + 1 || self.a.iter().any(|r| r.len() != self.n) {
            return Err(Error::Parse(format!(
                "system with n = {} needs {} rows of length {}",
                self.n,
                self.n + 1,
                self.n
            )));
        }
        InequalitySystem::new(matrix_from_rows(self.a, self.n)?, from_ints(self.b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizedDoc {
    pub format: String,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub delta: Int,
    #[serde(rename = "H")]
    pub h_matrix: Vec<Vec<Int>>,
    pub h: Vec<Int>,
    pub c: Vec<Int>,
    pub c0: Int,
}

impl NormalizedDoc {
    pub fn from_normalized(ns: &NormalizedSystem) -> Self {
        Self {
            format: NORMALIZED_FORMAT.into(),
            n: ns.n(),
            s: ns.s(),
            k: ns.k(),
            delta: Int(ns.delta().clone()),
            h_matrix: int_rows(ns.h_matrix()),
            h: ints(ns.h()),
            c: ints(ns.c()),
            c0: Int(ns.c0().clone()),
        }
    }

    pub fn to_normalized(self) -> Result<NormalizedSystem> {
        check_format(&self.format, NORMALIZED_FORMAT)?;
        if self.h_matrix.len() != self.n || self.h_matrix.iter().any(|r| r.len() != self.n) {
            return Err(Error::Parse(format!("H must be {0}x{0}", self.n)));
        }
        if self.s + self.k != self.n {
            return Err(Error::Parse("s + k must equal n".into()));
        }
        NormalizedSystem::from_parts(
            self.n,
            self.s,
            self.k,
            self.delta.0,
            matrix_from_rows(self.h_matrix, self.n)?,
            from_ints(self.h),
            from_ints(self.c),
            self.c0.0,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    #[serde(rename = "U")]
    pub u: Vec<Vec<Int>>,
    pub x0: Vec<Int>,
}

impl MapDoc {
    pub fn from_map(m: &AffineUnimodularMap) -> Self {
        Self {
            u: int_rows(m.u()),
            x0: ints(m.x0()),
        }
    }

    pub fn to_map(self) -> Result<AffineUnimodularMap> {
        let n = self.x0.len();
        AffineUnimodularMap::new(matrix_from_rows(self.u, n)?, from_ints(self.x0))
    }
}

fn check_format(found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Parse(format!(
            "expected format {expected:?}, found {found:?}"
        )))
    }
}

/// A parsed input document of either kind.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputDoc {
    System(InequalitySystem),
    Normalized(NormalizedSystem),
}

impl InputDoc {
    pub fn to_system(&self) -> InequalitySystem {
        match self {
            InputDoc::System(s) => s.clone(),
            InputDoc::Normalized(ns) => ns.to_system(),
        }
    }
}

/// Parses a system-v1 or normalized-v1 document.
pub fn parse_input(text: &str) -> Result<InputDoc> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let format = value
        .get("format")
        .and_then(|f| f.as_str())
        .ok_or_else(|| Error::Parse("missing \"format\" field".into()))?
        .to_string();
    let parse_err = |e: serde_json::Error| Error::Parse(e.to_string());
    match format.as_str() {
        SYSTEM_FORMAT => Ok(InputDoc::System(
            serde_json::from_value::<SystemDoc>(value)
                .map_err(parse_err)?
                .to_system()?,
        )),
        NORMALIZED_FORMAT => Ok(InputDoc::Normalized(
            serde_json::from_value::<NormalizedDoc>(value)
                .map_err(parse_err)?
                .to_normalized()?,
        )),
        other => Err(Error::Parse(format!("unknown format {other:?}"))),
    }
}

pub fn system_to_json(sys: &InequalitySystem) -> String {
    serde_json::to_string(&SystemDoc::from_system(sys)).expect("serializable")
}

pub fn normalized_to_json(ns: &NormalizedSystem) -> String {
    serde_json::to_string(&NormalizedDoc::from_normalized(ns)).expect("serializable")
}
