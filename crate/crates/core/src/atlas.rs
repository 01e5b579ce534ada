//! Atlas files (JSON Lines of class representatives), the enumeration
//! driver, verification and statistics.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corner::{CornerSolver, GroupTable};
use crate::enumeration::{enumerate_families, CandidateRecord, Family, Provenance};
use crate::equivalence::{dedup_families, equivalent_normalized_set};
use crate::error::{Error, Result};
use crate::formats::{from_ints, int_rows, ints, matrix_from_rows, Int};
use crate::normal_form::{
    apex_value, canonical_key, validate_normalized, CanonicalKey, NormalizedSystem,
};
use crate::simplex::{
    count_integer_points_bruteforce, is_lattice_simplex, validate_simplex, DEFAULT_POINT_CAP,
};

pub const ATLAS_FORMAT: &str = "delta-simplex/atlas-v1";

/// Largest dimension for which the point-count oracle runs during verification.
pub const ORACLE_MAX_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtlasRecord {
    pub family: Family,
    pub system: NormalizedSystem,
    pub key: CanonicalKey,
    pub provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtlasLine {
    format: String,
    n: usize,
    delta: Int,
    family: Family,
    s: usize,
    k: usize,
    #[serde(rename = "H")]
    h_matrix: Vec<Vec<Int>>,
    h: Vec<Int>,
    c: Vec<Int>,
    c0: Int,
    canonical_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl AtlasRecord {
    pub fn from_candidate(r: CandidateRecord) -> Self {
        Self {
            family: r.family,
            key: canonical_key(&r.system),
            system: r.system,
            provenance: Some(r.provenance),
        }
    }

    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn delta(&self) -> &BigInt {
        self.system.delta()
    }

    pub fn to_line(&self) -> String {
        let ns = &self.system;
        let line = AtlasLine {
            format: ATLAS_FORMAT.into(),
            n: ns.n(),
            delta: Int(ns.delta().clone()),
            family: self.family,
            s: ns.s(),
            k: ns.k(),
            h_matrix: int_rows(ns.h_matrix()),
            h: ints(ns.h()),
            c: ints(ns.c()),
            c0: Int(ns.c0().clone()),
            canonical_key: self.key.to_string(),
            provenance: self.provenance.clone(),
        };
        serde_json::to_string(&line).expect("serializable")
    }

    /// Parses one line. The stored key is kept as written; [`verify_atlas`]
    /// compares it against the recomputed one.
    pub fn from_line(text: &str) -> Result<Self> {
        let line: AtlasLine =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if line.format != ATLAS_FORMAT {
            return Err(Error::Parse(format!("unexpected format {:?}", line.format)));
        }
        let n = line.n;
        if line.h_matrix.len() != n || line.s + line.k != n {
            return Err(Error::Parse("record shape does not match n".into()));
        }
        let system = NormalizedSystem::from_parts(
            n,
            line.s,
            line.k,
            line.delta.0,
            matrix_from_rows(line.h_matrix, n)?,
            from_ints(line.h),
            from_ints(line.c),
            line.c0.0,
        )?;
        let key: CanonicalKey = line.canonical_key.parse()?;
        Ok(Self {
            family: line.family,
            system,
            key,
            provenance: line.provenance,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilySelection {
    Empty,
    Lattice,
    Both,
}

impl FamilySelection {
    pub fn includes(self, family: Family) -> bool {
        matches!(
            (self, family),
            (FamilySelection::Both, _)
                | (FamilySelection::Empty, Family::Empty)
                | (FamilySelection::Lattice, Family::LatticeEmpty)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub delta: u64,
    pub n: usize,
    pub family: FamilySelection,
    /// Include every `Δ' <= delta`.
    pub up_to: bool,
}

/// Enumerates, deduplicates and sorts the representatives by key.
pub fn build_atlas(opts: &EnumerateOptions) -> Result<Vec<AtlasRecord>> {
    if opts.delta == 0 || opts.n == 0 {
        return Err(Error::Domain("Δ and n must be at least 1".into()));
    }
    let deltas = if opts.up_to {
        1..=opts.delta
    } else {
        opts.delta..=opts.delta
    };
    let mut out = Vec::new();
    for delta in deltas {
        let fam = enumerate_families(delta, opts.n)?;
        for (family, records) in [
            (Family::Empty, fam.empty),
            (Family::LatticeEmpty, fam.lattice),
        ] {
            if opts.family.includes(family) {
                out.extend(
                    dedup_families(records)?
                        .into_iter()
                        .map(AtlasRecord::from_candidate),
                );
            }
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}

pub fn write_atlas<W: Write>(records: &[AtlasRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()
}

pub fn read_atlas<R: BufRead>(input: R) -> Result<Vec<AtlasRecord>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            AtlasRecord::from_line(&line)
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

/// One failed check of [`verify_atlas`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyIssue {
    pub key: String,
    pub provenance: Option<Provenance>,
    pub problem: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checked: usize,
    pub oracle_checked: usize,
    pub issues: Vec<VerifyIssue>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks every record: normalized-form conditions (including Δ of the full
/// matrix), emptiness via the corner solver and, for `n <= 6`, via point
/// counting, the bound `|c0 - c^T v| <= Δ`, and pairwise inequivalence.
pub fn verify_atlas(records: &[AtlasRecord]) -> Result<VerifyReport> {
    let per_record = records
        .par_iter()
        .map(|r| verify_record(r).map(|(problems, oracle)| (r, problems, oracle)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerifyReport {
        checked: records.len(),
        ..Default::default()
    };
    for (r, problems, oracle) in per_record {
        report.oracle_checked += usize::from(oracle);
        for problem in problems {
            report.issues.push(VerifyIssue {
                key: r.key.to_string(),
                provenance: r.provenance.clone(),
                problem,
            });
        }
    }

    let keys: BTreeMap<&CanonicalKey, &AtlasRecord> = records.iter().map(|r| (&r.key, r)).collect();
    if keys.len() != records.len() {
        report.issues.push(VerifyIssue {
            key: String::new(),
            provenance: None,
            problem: "duplicate canonical keys".into(),
        });
    }
    let clashes = records
        .par_iter()
        .filter(|r| validate_simplex(&r.system.to_system()).is_ok())
        .map(|r| {
            let set = equivalent_normalized_set(&r.system.to_system())?;
            Ok(set
                .keys()
                .filter(|k| *k != &r.key && keys.contains_key(k))
                .map(|k| (r, k.to_string()))
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    for (r, other) in clashes.into_iter().flatten() {
        report.issues.push(VerifyIssue {
            key: r.key.to_string(),
            provenance: r.provenance.clone(),
            problem: format!("equivalent to record {other}"),
        });
    }
    Ok(report)
}

fn verify_record(r: &AtlasRecord) -> Result<(Vec<String>, bool)> {
    let ns = &r.system;
    let n = ns.n();
    let mut problems = Vec::new();
    let recomputed = canonical_key(ns);
    if recomputed != r.key {
        problems.push(format!(
            "stored key differs from the recomputed key {recomputed}"
        ));
    }
    let report = validate_normalized(ns);
    if !report.is_valid() {
        problems.push(format!("emptiness/validator violation: {report}"));
        return Ok((problems, false));
    }
    let sys = ns.to_system();
    let meta = validate_simplex(&sys)?;
    let integral_apex = ns.h().iter().all(|x| x.is_zero());
    let table = GroupTable::new(ns.h_matrix())?;
    let solver = CornerSolver::new(&table, ns.h_matrix(), ns.c())?;
    match r.family {
        Family::Empty => {
            if integral_apex || &solver.solve(ns.h())?.f_star <= ns.c0() {
                problems.push(
                    "emptiness/validator violation: simplex contains an integer point".into(),
                );
            }
        }
        Family::LatticeEmpty => {
            let on_facet = solver.count_at_value(ns.h(), ns.c0(), n as u64 + 1)?;
            let below = solver.solve_excluding_origin()?.f_star;
            if !integral_apex
                || !is_lattice_simplex(&meta)
                || on_facet != n as u64
                || &below != ns.c0()
            {
                problems.push("emptiness/validator violation: not an empty lattice-simplex".into());
            }
        }
    }
    let gap = BigRational::from_integer(ns.c0().clone()) - apex_value(ns)?;
    if gap.abs() > BigRational::from_integer(ns.delta().clone()) {
        problems.push(format!("|c0 - c^T v| = {} exceeds Δ", gap.abs()));
    }
    let mut oracle = false;
    if n <= ORACLE_MAX_DIM {
        match count_integer_points_bruteforce(&sys, DEFAULT_POINT_CAP) {
            Ok(count) => {
                oracle = true;
                let expected = match r.family {
                    Family::Empty => 0,
                    Family::LatticeEmpty => n as u64 + 1,
                };
                if count != expected {
                    problems.push(format!(
                        "emptiness/validator violation: {count} integer points, expected {expected}"
                    ));
                }
            }
            Err(Error::OracleScaleExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((problems, oracle))
}

/// `C(n+Δ-1, Δ-1) · Δ^(log2 Δ + 2)`, the class-count bound for empty simplices.
pub fn empty_class_bound(delta: u64, n: usize) -> f64 {
    let d = delta as f64;
    binomial(n as u64 + delta - 1, delta - 1)
        .to_f64()
        .unwrap_or(f64::INFINITY)
        * d.powf(d.log2() + 2.0)
}

/// Exact test of `count <= C(n+Δ-1, Δ-1) · Δ^(log2 Δ + 2)`.
pub fn within_empty_class_bound(count: u64, delta: u64, n: usize) -> bool {
    if delta == 0 {
        return false;
    }
    let binom = binomial(n as u64 + delta - 1, delta - 1);
    let floor_log = 63 - delta.leading_zeros();
    let delta_big = BigInt::from(delta);
    // Δ^(floor(log2 Δ) + 2) never exceeds the bound.
    let lower = &binom * delta_big.pow(floor_log + 2);
    if BigInt::from(count) <= lower {
        return true;
    }
    if delta.is_power_of_two() {
        return false;
    }
    let ln = |x: &BigInt| {
        let bits = x.bits();
        let shift = bits.saturating_sub(60);
        (x >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
    };
    let d = delta as f64;
    (count as f64).ln() <= ln(&binom) + (d.log2() + 2.0) * d.ln()
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub delta: BigInt,
    pub n: usize,
    pub family: Family,
    pub count: u64,
    /// Present for the empty family only.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// Record counts per `(Δ, n, family)`, with the class-count bound for empty families.
pub fn atlas_stats(records: &[AtlasRecord]) -> Vec<StatsRow> {
    let mut counts: BTreeMap<(BigInt, usize, Family), u64> = BTreeMap::new();
    for r in records {
        *counts
            .entry((r.delta().clone(), r.n(), r.family))
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((delta, n, family), count)| {
            let small = delta.to_u64().filter(|_| family == Family::Empty);
            StatsRow {
                bound: small.map(|d| empty_class_bound(d, n)),
                within_bound: small.map(|d| within_empty_class_bound(count, d, n)),
                delta,
                n,
                family,
                count,
            }
        })
        .collect()
}
