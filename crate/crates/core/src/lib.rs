//! Enumeration and unimodular equivalence of empty Δ-modular simplices.
//!
//! A simplex is given as `{x : A x <= b}` with `A` of shape `(n+1) x n`.
//! The crate normalizes such systems into a canonical block Hermite form,
//! enumerates every normalized empty simplex and empty lattice-simplex for a
//! given `(Δ, n)`, and removes unimodular duplicates.

pub mod atlas;
pub mod corner;
pub mod enumeration;
pub mod equivalence;
pub mod error;
pub mod formats;
pub mod linalg;
pub mod normal_form;
pub mod simplex;

pub use atlas::{AtlasRecord, EnumerateOptions, FamilySelection};
pub use enumeration::{CandidateRecord, Family};
pub use equivalence::{check_equivalence, Certificate, Verdict};
pub use error::{Error, Result};
pub use linalg::{IntMatrix, IntVector, RationalVector};
pub use normal_form::{CanonicalKey, NormalizedSystem};
pub use simplex::{AffineUnimodularMap, InequalitySystem};
