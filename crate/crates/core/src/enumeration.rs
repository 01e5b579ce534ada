//! Generation of all normalized empty simplices and empty lattice-simplices
//! for a given `(Δ, n)`, before removal of equivalent duplicates.

use std::fmt;
use std::str::FromStr;

use log::debug;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corner::{CornerSolver, GroupTable};
use crate::error::{Error, Result};
use crate::linalg::{gcd_all, solve_rational, IntMatrix, IntVector};
use crate::normal_form::{validate_normalized, NormalizedSystem};
use crate::simplex::{is_lattice_simplex, validate_simplex};

/// Ordered tuples of integers `>= 2` whose product is `delta`, sorted by
/// length and then lexicographically. `delta = 1` gives only the empty tuple.
pub fn divisor_tuples(delta: u64) -> Result<Vec<Vec<u64>>> {
    if delta == 0 {
        return Err(Error::Domain("Δ must be at least 1".into()));
    }
    fn extend(rest: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if rest == 1 {
            out.push(prefix.clone());
            return;
        }
        for d in 2..=rest {
            if rest.is_multiple_of(d) {
                prefix.push(d);
                extend(rest / d, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(delta, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// A block HNF `[[I_s, 0], [B, T]]` together with the indices it was generated from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockHnf {
    pub tuple: Vec<u64>,
    pub t_index: usize,
    pub b_index: usize,
    pub s: usize,
    pub k: usize,
    pub h_matrix: IntMatrix,
}

/// Every block HNF of determinant `delta` in dimension `n` whose `B` columns
/// are lexicographically non-decreasing.
pub fn enumerate_block_hnfs(delta: u64, n: usize) -> Result<Vec<BlockHnf>> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let mut out = Vec::new();
    for tuple in divisor_tuples(delta)? {
        let k = tuple.len();
        if k > n {
            continue;
        }
        let s = n - k;
        let ts = lower_triangular_with_diagonal(&tuple);
        // BS: vectors x with 0 <= x_i < d_i, in lexicographic order.
        let bs = odometer(&tuple);
        let column_choices = multisets(bs.len(), s);
        for (t_index, t) in ts.iter().enumerate() {
            for (b_index, cols) in column_choices.iter().enumerate() {
                let mut hm = IntMatrix::identity(n);
                for i in 0..k {
                    for (j, &col) in cols.iter().enumerate() {
                        hm.set(s + i, j, BigInt::from(bs[col][i]));
                    }
                    for j in 0..=i {
                        hm.set(s + i, s + j, BigInt::from(t[i][j]));
                    }
                }
                out.push(BlockHnf {
                    tuple: tuple.clone(),
                    t_index,
                    b_index,
                    s,
                    k,
                    h_matrix: hm,
                });
            }
        }
    }
    Ok(out)
}

fn lower_triangular_with_diagonal(diag: &[u64]) -> Vec<Vec<Vec<u64>>> {
    let k = diag.len();
    let slots: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    let radices: Vec<u64> = slots.iter().map(|&(i, _)| diag[i]).collect();
    odometer(&radices)
        .into_iter()
        .map(|values| {
            let mut t = vec![vec![0u64; k]; k];
            for i in 0..k {
                t[i][i] = diag[i];
            }
            for (&(i, j), v) in slots.iter().zip(values) {
                t[i][j] = v;
            }
            t
        })
        .collect()
}

/// All vectors `x` with `0 <= x_i < radices[i]`, lexicographic.
fn odometer(radices: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Non-decreasing sequences of length `len` over `0..size`, lexicographic.
fn multisets(size: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(size: usize, len: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in from..size {
            cur.push(v);
            rec(size, len, v, cur, out);
            cur.pop();
        }
    }
    rec(size, len, 0, &mut cur, &mut out);
    out
}

fn diagonal_u64(h_matrix: &IntMatrix) -> Vec<u64> {
    (0..h_matrix.rows())
        .map(|i| h_matrix.get(i, i).to_u64().expect("small diagonal"))
        .collect()
}

/// All reduced right-hand sides `0 <= h_i < H_ii`, lexicographic.
pub fn enumerate_rhs(h_matrix: &IntMatrix) -> Vec<IntVector> {
    odometer(&diagonal_u64(h_matrix))
        .into_iter()
        .map(|v| v.into_iter().map(BigInt::from).collect())
        .collect()
}

/// All integer `c` with `-H^{-T} c ∈ (0,1]^n`, lexicographic.
///
/// Coordinates are fixed from the last one backwards: with
/// `r = sum_{j>i} H_ji t_j`, the admissible `c_i` are the integers in
/// `[-H_ii - r, -r)`.
pub fn enumerate_paral(h_matrix: &IntMatrix) -> Vec<IntVector> {
    let n = h_matrix.rows();
    let mut out = Vec::new();
    let mut c = vec![BigInt::zero(); n];
    let mut t = vec![BigRational::zero(); n];
    fn rec(
        hm: &IntMatrix,
        i: usize,
        c: &mut IntVector,
        t: &mut Vec<BigRational>,
        out: &mut Vec<IntVector>,
    ) {
        let r: BigRational = (i + 1..hm.rows())
            .map(|j| &t[j] * BigRational::from_integer(hm.get(j, i).clone()))
            .sum();
        let diag = BigRational::from_integer(hm.get(i, i).clone());
        let lo = (-&diag - &r).ceil().to_integer();
        let hi = (-&r).ceil().to_integer();
        let mut ci = lo;
        while ci < hi {
            t[i] = (-BigRational::from_integer(ci.clone()) - &r) / &diag;
            c[i] = ci.clone();
            if i == 0 {
                out.push(c.clone());
            } else {
                rec(hm, i - 1, c, t, out);
            }
            ci += 1;
        }
    }
    if n > 0 {
        rec(h_matrix, n - 1, &mut c, &mut t, &mut out);
    }
    out.sort();
    out
}

/// Right-hand sides of the last facet worth considering for a fixed cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum C0Candidates {
    /// Apex not integral: every `c0` in `[l_star, f_star - 1]` gives an empty simplex.
    EmptyRange { l_star: BigInt, f_star: BigInt },
    /// Apex integral (`h = 0`): only `c0 = f_star` can give an empty lattice-simplex.
    Lattice { f_star: BigInt },
}

pub fn c0_candidates(h_matrix: &IntMatrix, h: &[BigInt], c: &[BigInt]) -> Result<C0Candidates> {
    let table = GroupTable::new(h_matrix)?;
    let solver = CornerSolver::new(&table, h_matrix, c)?;
    c0_with_solver(&solver, h_matrix, h, c)
}

fn c0_with_solver(
    solver: &CornerSolver<'_>,
    h_matrix: &IntMatrix,
    h: &[BigInt],
    c: &[BigInt],
) -> Result<C0Candidates> {
    let v = solve_rational(h_matrix, h)?;
    if v.iter().all(|q| q.is_integer()) {
        if h.iter().any(|x| !x.is_zero()) {
            return Err(Error::Precondition(
                "integral apex needs a reduced h = 0".into(),
            ));
        }
        let f_star = solver.solve_excluding_origin()?.f_star;
        return Ok(C0Candidates::Lattice { f_star });
    }
    let cv: BigRational = v
        .iter()
        .zip(c)
        .map(|(vi, ci)| vi * BigRational::from_integer(ci.clone()))
        .sum();
    let l_star = cv.floor().to_integer() + BigInt::one();
    let f_star = solver.solve(h)?.f_star;
    Ok(C0Candidates::EmptyRange { l_star, f_star })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Empty,
    LatticeEmpty,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Empty => "empty",
            Family::LatticeEmpty => "lattice_empty",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empty" => Ok(Family::Empty),
            "lattice_empty" => Ok(Family::LatticeEmpty),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// Where in the generation tree a candidate came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tuple: Vec<u64>,
    pub t_index: usize,
    pub b_index: usize,
    pub h_index: usize,
    pub c_index: usize,
    pub c0_offset: usize,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tuple={:?} T#{} B#{} h#{} c#{} c0+{}",
            self.tuple, self.t_index, self.b_index, self.h_index, self.c_index, self.c0_offset
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateRecord {
    pub system: NormalizedSystem,
    pub family: Family,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Families {
    pub empty: Vec<CandidateRecord>,
    pub lattice: Vec<CandidateRecord>,
}

/// Enumerates both families for `(delta, n)`. Work is split over the block
/// HNFs; the output order does not depend on the thread count.
pub fn enumerate_families(delta: u64, n: usize) -> Result<Families> {
    let blocks = enumerate_block_hnfs(delta, n)?;
    let per_block = blocks
        .par_iter()
        .map(candidates_for_block)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Families::default();
    for records in per_block {
        for r in records {
            match r.family {
                Family::Empty => out.empty.push(r),
                Family::LatticeEmpty => out.lattice.push(r),
            }
        }
    }
    Ok(out)
}

/// True if two equal `B` columns carry decreasing `c` entries.
fn breaks_tie_order(block: &BlockHnf, c: &[BigInt]) -> bool {
    let hm = &block.h_matrix;
    (1..block.s)
        .any(|j| (block.s..hm.rows()).all(|i| hm.get(i, j - 1) == hm.get(i, j)) && c[j - 1] > c[j])
}

fn rows_primitive(hm: &IntMatrix, h: &[BigInt], c: &[BigInt], c0: &BigInt) -> bool {
    let n = hm.rows();
    let row_ok =
        |row: &[BigInt], rhs: &BigInt| gcd_all(row.iter().chain(std::iter::once(rhs))).is_one();
    (0..n).all(|i| row_ok(hm.row(i), &h[i])) && row_ok(c, c0)
}

fn candidates_for_block(block: &BlockHnf) -> Result<Vec<CandidateRecord>> {
    let hm = &block.h_matrix;
    let n = hm.rows();
    let table = GroupTable::new(hm)?;
    let rhs_list = enumerate_rhs(hm);
    let mut out = Vec::new();
    for (c_index, c) in enumerate_paral(hm).into_iter().enumerate() {
        if breaks_tie_order(block, &c) {
            continue;
        }
        let solver = CornerSolver::new(&table, hm, &c)?;
        for (h_index, h) in rhs_list.iter().enumerate() {
            let provenance = |c0_offset| Provenance {
                tuple: block.tuple.clone(),
                t_index: block.t_index,
                b_index: block.b_index,
                h_index,
                c_index,
                c0_offset,
            };
            match c0_with_solver(&solver, hm, h, &c)? {
                C0Candidates::EmptyRange { l_star, f_star } => {
                    let mut c0 = l_star.clone();
                    while c0 < f_star {
                        let offset = (&c0 - &l_star).to_usize().expect("small range");
                        let prov = provenance(offset);
                        if let Some(system) = admit(block, h, &c, &c0, &prov)? {
                            out.push(CandidateRecord {
                                system,
                                family: Family::Empty,
                                provenance: prov,
                            });
                        }
                        c0 += 1;
                    }
                }
                C0Candidates::Lattice { f_star } => {
                    let prov = provenance(0);
                    let Some(system) = admit(block, h, &c, &f_star, &prov)? else {
                        continue;
                    };
                    let meta = validate_simplex(&system.to_system())?;
                    if !is_lattice_simplex(&meta) {
                        debug!("skip {prov}: vertices not integral");
                        continue;
                    }
                    // Integer points are the origin plus those on c^T x = f*; only the n vertices may lie there.
                    let on_facet = solver.count_at_value(h, &f_star, n as u64 + 1)?;
                    if on_facet != n as u64 {
                        debug!("skip {prov}: {on_facet} integer points on the far facet");
                        continue;
                    }
                    out.push(CandidateRecord {
                        system,
                        family: Family::LatticeEmpty,
                        provenance: prov,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn admit(
    block: &BlockHnf,
    h: &[BigInt],
    c: &[BigInt],
    c0: &BigInt,
    prov: &Provenance,
) -> Result<Option<NormalizedSystem>> {
    let hm = &block.h_matrix;
    if !rows_primitive(hm, h, c, c0) {
        debug!("skip {prov}: row with gcd > 1");
        return Ok(None);
    }
    let delta: u64 = block.tuple.iter().product();
    let system = NormalizedSystem::from_parts(
        hm.rows(),
        block.s,
        block.k,
        BigInt::from(delta),
        hm.clone(),
        h.to_vec(),
        c.to_vec(),
        c0.clone(),
    )?;
    let report = validate_normalized(&system);
    if !report.is_valid() {
        debug!("skip {prov}: {report}");
        return Ok(None);
    }
    Ok(Some(system))
}
