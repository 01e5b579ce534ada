use num_bigint::BigInt;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("rank error: {0}")]
    Rank(String),
    #[error("matrix is singular")]
    Singular,
    #[error("not a simplex (rank/degeneracy): maximal minor of base {base:?} vanishes")]
    DegenerateMinor { base: Vec<usize> },
    #[error("empty or unbounded or lower-dimensional: vertex {vertex} does not strictly satisfy row {row}")]
    NotFullDimensional { vertex: usize, row: usize },
    #[error("matrix is not unimodular")]
    NotUnimodular,
    #[error("invalid system: row {0} is zero")]
    ZeroRow(usize),
    #[error("oracle scale exceeded: {candidates} candidate points, cap {cap}")]
    OracleScaleExceeded { candidates: BigInt, cap: u64 },
    #[error("radius too small: the scan region cut off potentially better points")]
    RadiusTooSmall,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("base {base:?} is not maximal (|minor| = {minor}, delta = {delta}); maximal bases: {valid:?}")]
    NonMaximalBase {
        base: Vec<usize>,
        minor: BigInt,
        delta: BigInt,
        valid: Vec<Vec<usize>>,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}
