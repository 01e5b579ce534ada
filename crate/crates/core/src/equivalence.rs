//! Unimodular equivalence: the set of all normalized forms of a simplex,
//! equivalence decisions with witness maps, and removal of duplicates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::corner::GroupTable;
use crate::enumeration::CandidateRecord;
use crate::error::{Error, Result};
use crate::linalg::{det, IntMatrix, IntVector, RationalVector};
use crate::normal_form::{
    canonical_key, normalize_auto, normalize_primitive, primitivize, same_facets, CanonicalKey,
    NormalizedSystem,
};
use crate::simplex::{
    apply_map, compose, inverse, validate_simplex, AffineUnimodularMap, InequalitySystem,
};

/// Row orders for the base rows of a block HNF: every placement of the `k`
/// non-unit rows into the `n` positions, times every order of those rows,
/// with the unit rows filling the gaps in their original order.
///
/// `perm[p]` is the row placed at position `p`. This list can miss normalized
/// forms (see [`generator_chain_orders`]); it is kept for comparison.
pub fn reduced_permutations(s: usize, k: usize) -> Vec<Vec<usize>> {
    let n = s + k;
    let mut out = Vec::new();
    for positions in combinations(n, k) {
        for order in permutations(&(s..n).collect::<Vec<_>>()) {
            let mut perm = vec![usize::MAX; n];
            for (&p, &row) in positions.iter().zip(&order) {
                perm[p] = row;
            }
            let mut unit = 0..s;
            for slot in perm.iter_mut().filter(|x| **x == usize::MAX) {
                *slot = unit.next().expect("s free slots");
            }
            out.push(perm);
        }
    }
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Row orders of `H` that reach every normalized form with the same omitted facet.
///
/// Let `g_i` be the class of `e_i` in `Z^n / HZ^n`. After reordering, row
/// `i` gets a non-unit diagonal exactly when `g_i` lies outside the subgroup
/// generated by the later rows. So the non-unit rows, in order, form a chain
/// `f_1, ..., f_m` with `g_{f_j} ∉ <g_{f_{j+1}}, ..., g_{f_m}>` that
/// generates the whole group, and the normalized form depends only on that
/// chain. Each order returned puts the other rows first (ascending) and then
/// the chain.
pub fn generator_chain_orders(h_matrix: &IntMatrix) -> Result<Vec<Vec<usize>>> {
    let table = GroupTable::new(h_matrix)?;
    let n = table.dim();
    let mut chains = Vec::new();
    let mut members = vec![false; table.order()];
    members[0] = true;
    let mut tail = Vec::new();
    extend_chain(&table, &mut members, &mut tail, &mut chains);
    Ok(chains
        .into_iter()
        .map(|chain| {
            let mut order: Vec<usize> = (0..n).filter(|r| !chain.contains(r)).collect();
            order.extend(chain);
            order
        })
        .collect())
}

/// `tail` holds the chain from the back; `members` is the subgroup it generates.
fn extend_chain(
    table: &GroupTable,
    members: &mut Vec<bool>,
    tail: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if members.iter().all(|&m| m) {
        out.push(tail.iter().rev().copied().collect());
        return;
    }
    for r in 0..table.dim() {
        if tail.contains(&r) || members[table.step(0, r)] {
            continue;
        }
        let saved = members.clone();
        close_under(table, members, r);
        tail.push(r);
        extend_chain(table, members, tail, out);
        tail.pop();
        *members = saved;
    }
}

/// Adds the class of `e_r` to the subgroup marked in `members`: the result
/// is every `m + j g_r` with `m` an old member.
fn close_under(table: &GroupTable, members: &mut [bool], r: usize) {
    let mut stack: Vec<usize> = (0..members.len()).filter(|&g| members[g]).collect();
    while let Some(g) = stack.pop() {
        let next = table.step(g, r);
        if !members[next] {
            members[next] = true;
            stack.push(next);
        }
    }
}

/// One member of an [`EquivalentSet`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalentRecord {
    pub system: NormalizedSystem,
    /// `apply_map(source, map)`, rows reordered by `rows`, equals `system`.
    pub map: AffineUnimodularMap,
    pub rows: Vec<usize>,
}

/// Every normalized system equivalent to a simplex, keyed canonically.
/// `source` is the primitive form of the input.
#[derive(Clone, Debug)]
pub struct EquivalentSet {
    pub source: InequalitySystem,
    pub records: BTreeMap<CanonicalKey, EquivalentRecord>,
}

impl EquivalentSet {
    pub fn contains(&self, key: &CanonicalKey) -> bool {
        self.records.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.records.keys()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Normalizes from every maximal base and every generator-chain order of
/// its rows. The first map found for a key is kept.
pub fn equivalent_normalized_set(sys: &InequalitySystem) -> Result<EquivalentSet> {
    equivalent_set_with(sys, generator_chain_orders)
}

/// Like [`equivalent_normalized_set`] but with [`reduced_permutations`] as the row orders.
pub fn equivalent_set_reduced(sys: &InequalitySystem) -> Result<EquivalentSet> {
    equivalent_set_with(sys, |hm| {
        let s = (0..hm.rows())
            .take_while(|&i| hm.get(i, i).is_one())
            .count();
        Ok(reduced_permutations(s, hm.rows() - s))
    })
}

/// Like [`equivalent_normalized_set`] but trying all `n!` orders of every maximal base.
pub fn equivalent_set_exhaustive(sys: &InequalitySystem) -> Result<EquivalentSet> {
    equivalent_set_with(sys, |hm| {
        Ok(permutations(&(0..hm.rows()).collect::<Vec<_>>()))
    })
}

fn equivalent_set_with<F>(sys: &InequalitySystem, orders: F) -> Result<EquivalentSet>
where
    F: Fn(&IntMatrix) -> Result<Vec<Vec<usize>>>,
{
    let prim = primitivize(sys)?;
    let meta = validate_simplex(&prim)?;
    let n = prim.dim();
    let mut records = BTreeMap::new();
    for base in &meta.max_det_bases {
        let first = normalize_primitive(&prim, &meta.delta, base)?;
        let start = first.system.to_system();
        for order in orders(first.system.h_matrix())? {
            let mut rows_order = order.clone();
            rows_order.push(n);
            let permuted = start.permute_rows(&rows_order);
            let base_rows: Vec<usize> = (0..n).collect();
            let second = normalize_primitive(&permuted, &meta.delta, &base_rows)?;
            let map = compose(&first.map, &second.map);
            let rows = second
                .rows
                .iter()
                .map(|&r| first.rows[rows_order[r]])
                .collect();
            records
                .entry(canonical_key(&second.system))
                .or_insert(EquivalentRecord {
                    system: second.system,
                    map,
                    rows,
                });
        }
    }
    Ok(EquivalentSet {
        source: prim,
        records,
    })
}

/// Why two simplices are not equivalent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    DimensionMismatch,
    DeltaMismatch,
    MinorMultisetMismatch,
    SearchExhausted,
}

impl Certificate {
    pub fn as_str(self) -> &'static str {
        match self {
            Certificate::DimensionMismatch => "dimension-mismatch",
            Certificate::DeltaMismatch => "delta-mismatch",
            Certificate::MinorMultisetMismatch => "minor-multiset-mismatch",
            Certificate::SearchExhausted => "search-exhausted",
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `witness` carries the first simplex onto the second:
    /// `apply_map(second, witness)` describes the first.
    Equivalent {
        witness: AffineUnimodularMap,
    },
    NotEquivalent {
        certificate: Certificate,
    },
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

pub fn check_equivalence(s: &InequalitySystem, t: &InequalitySystem) -> Result<Verdict> {
    let ps = primitivize(s)?;
    let pt = primitivize(t)?;
    let ms = validate_simplex(&ps)?;
    let mt = validate_simplex(&pt)?;
    let reject = |certificate| Ok(Verdict::NotEquivalent { certificate });
    if ps.dim() != pt.dim() {
        return reject(Certificate::DimensionMismatch);
    }
    if ms.delta != mt.delta {
        return reject(Certificate::DeltaMismatch);
    }
    if ms.minor_multiset() != mt.minor_multiset() {
        return reject(Certificate::MinorMultisetMismatch);
    }
    let nt = normalize_auto(&pt)?;
    let key = canonical_key(&nt.system);
    let ns = normalize_auto(&ps)?;
    let map_s = if canonical_key(&ns.system) == key {
        ns.map
    } else {
        let set = equivalent_normalized_set(&ps)?;
        match set.records.get(&key) {
            Some(rec) => rec.map.clone(),
            None => return reject(Certificate::SearchExhausted),
        }
    };
    let witness = compose(&nt.map, &inverse(&map_s));
    if !same_facets(&apply_map(&pt, &witness)?, &ps) {
        return Err(Error::Internal(
            "equivalence witness failed verification".into(),
        ));
    }
    Ok(Verdict::Equivalent { witness })
}

/// Keeps one record per equivalence class: the one with the least key.
pub fn dedup_families(records: Vec<CandidateRecord>) -> Result<Vec<CandidateRecord>> {
    let mut index: BTreeMap<CanonicalKey, CandidateRecord> = BTreeMap::new();
    for r in records {
        index.entry(canonical_key(&r.system)).or_insert(r);
    }
    let keys: Vec<CanonicalKey> = index.keys().cloned().collect();
    let mut removed: BTreeSet<CanonicalKey> = BTreeSet::new();
    let mut survivors = Vec::new();
    let batch = rayon::current_num_threads().max(1) * 4;
    let mut pos = 0;
    while pos < keys.len() {
        let mut chunk = Vec::with_capacity(batch);
        while pos < keys.len() && chunk.len() < batch {
            if !removed.contains(&keys[pos]) {
                chunk.push(&keys[pos]);
            }
            pos += 1;
        }
        let sets = chunk
            .par_iter()
            .map(|k| equivalent_normalized_set(&index[*k].system.to_system()))
            .collect::<Result<Vec<_>>>()?;
        for (key, set) in chunk.into_iter().zip(sets) {
            if removed.contains(key) {
                continue;
            }
            for other in set.keys() {
                if other != key && index.contains_key(other) {
                    removed.insert(other.clone());
                }
            }
            survivors.push(key.clone());
        }
    }
    Ok(survivors
        .into_iter()
        .map(|k| index.remove(&k).expect("survivor present"))
        .collect())
}

/// Bounded search for an equivalence: `U` with entries in `[-u_bound, u_bound]`
/// and `|det U| = 1`, translation entries in `[-x_bound, x_bound]`, mapping
/// the vertex set of `s` onto that of `t`. Test oracle for small dimensions.
pub fn brute_force_equivalent(
    s: &InequalitySystem,
    t: &InequalitySystem,
    u_bound: i64,
    x_bound: i64,
) -> Result<Option<AffineUnimodularMap>> {
    let vs = validate_simplex(s)?.vertices;
    let vt = validate_simplex(t)?.vertices;
    let n = s.dim();
    if n != t.dim() {
        return Ok(None);
    }
    let mut target: Vec<RationalVector> = vt.clone();
    target.sort();
    let x_limit = BigInt::from(x_bound);
    let entries = n * n;
    let span = (2 * u_bound + 1) as usize;
    let total = span.pow(entries as u32);
    for code in 0..total {
        let mut rest = code;
        let mut u = IntMatrix::zeros(n, n);
        for e in 0..entries {
            u.set(e / n, e % n, BigInt::from((rest % span) as i64 - u_bound));
            rest /= span;
        }
        if !det(&u)?.abs().is_one() {
            continue;
        }
        let lin = |v: &RationalVector| -> RationalVector {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| &v[j] * BigRational::from_integer(u.get(i, j).clone()))
                        .sum()
                })
                .collect()
        };
        let uv0 = lin(&vs[0]);
        for w in &vt {
            let shift: RationalVector = w.iter().zip(&uv0).map(|(a, b)| a - b).collect();
            if shift
                .iter()
                .any(|q| !q.is_integer() || q.to_integer().abs() > x_limit)
            {
                continue;
            }
            let mut image: Vec<RationalVector> = vs
                .iter()
                .map(|v| lin(v).into_iter().zip(&shift).map(|(a, b)| a + b).collect())
                .collect();
            image.sort();
            if image == target {
                let x0: IntVector = shift.iter().map(|q| q.to_integer()).collect();
                return Ok(Some(AffineUnimodularMap::new(u, x0)?));
            }
        }
    }
    Ok(None)
}
