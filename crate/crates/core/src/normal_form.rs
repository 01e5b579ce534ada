//! Normalized systems and the normalization algorithm.
//!
//! A normalized system is `(H; c^T) x <= (h; c0)` where
//! `H = [[I_s, 0], [B, T]]` is a block Hermite normal form with `det H = Δ`,
//! `0 <= h_i < H_ii`, rows of `(A | b)` primitive, and `c` in the half-open
//! fundamental parallelepiped of `-H^T`. The coordinates of the identity
//! block are ordered by (column of `B`, entry of `c`), both ascending, which
//! makes the form unique for a given assignment of facets to rows.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    adjugate, delta_of, det, dot, gcd_all, hnf, is_hnf, max_minors, solve_rational, IntMatrix,
    IntVector, RationalVector,
};
use crate::simplex::{
    apply_map, compose, validate_simplex, AffineUnimodularMap, InequalitySystem, SimplexMeta,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedSystem {
    n: usize,
    s: usize,
    k: usize,
    delta: BigInt,
    h_matrix: IntMatrix,
    h: IntVector,
    c: IntVector,
    c0: BigInt,
}

impl NormalizedSystem {
    /// Builds a system and derives `s` (leading unit-diagonal rows), `k` and `delta = det H`.
    /// Nothing beyond shapes is checked; see [`validate_normalized`].
    pub fn new(h_matrix: IntMatrix, h: IntVector, c: IntVector, c0: BigInt) -> Result<Self> {
        let n = h_matrix.cols();
        check_shapes(n, &h_matrix, &h, &c)?;
        let s = (0..n).take_while(|&i| h_matrix.get(i, i).is_one()).count();
        let delta = det(&h_matrix)?;
        Ok(Self {
            n,
            s,
            k: n - s,
            delta,
            h_matrix,
            h,
            c,
            c0,
        })
    }

    /// Builds a system from explicitly given block sizes and determinant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        n: usize,
        s: usize,
        k: usize,
        delta: BigInt,
        h_matrix: IntMatrix,
        h: IntVector,
        c: IntVector,
        c0: BigInt,
    ) -> Result<Self> {
        check_shapes(n, &h_matrix, &h, &c)?;
        Ok(Self {
            n,
            s,
            k,
            delta,
            h_matrix,
            h,
            c,
            c0,
        })
    }

    pub fn from_system(sys: &InequalitySystem) -> Result<Self> {
        let n = sys.dim();
        let h_matrix = sys.a().select_rows(&(0..n).collect::<Vec<_>>());
        let c = sys.a().row(n).to_vec();
        Self::new(h_matrix, sys.b()[..n].to_vec(), c, sys.b()[n].clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    pub fn h_matrix(&self) -> &IntMatrix {
        &self.h_matrix
    }

    pub fn h(&self) -> &[BigInt] {
        &self.h
    }

    pub fn c(&self) -> &[BigInt] {
        &self.c
    }

    pub fn c0(&self) -> &BigInt {
        &self.c0
    }

    /// The `k x s` block `B`.
    pub fn b_block(&self) -> IntMatrix {
        let mut b = IntMatrix::zeros(self.k, self.s);
        for i in 0..self.k {
            for j in 0..self.s {
                b.set(i, j, self.h_matrix.get(self.s + i, j).clone());
            }
        }
        b
    }

    /// The `k x k` block `T`.
    pub fn t_block(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.k, self.k);
        for i in 0..self.k {
            for j in 0..self.k {
                t.set(i, j, self.h_matrix.get(self.s + i, self.s + j).clone());
            }
        }
        t
    }

    pub fn to_system(&self) -> InequalitySystem {
        let mut rows = self.h_matrix.to_rows();
        rows.push(self.c.clone());
        let a = IntMatrix::from_rows(rows, self.n).expect("shapes checked at construction");
        let mut b = self.h.clone();
        b.push(self.c0.clone());
        InequalitySystem::new(a, b).expect("shapes checked at construction")
    }

    /// The vertex `v = H^{-1} h` opposite the facet `c^T x <= c0`.
    pub fn apex(&self) -> Result<RationalVector> {
        solve_rational(&self.h_matrix, &self.h)
    }

    pub fn with_c0(&self, c0: BigInt) -> Self {
        Self { c0, ..self.clone() }
    }
}

fn check_shapes(n: usize, h_matrix: &IntMatrix, h: &[BigInt], c: &[BigInt]) -> Result<()> {
    if n == 0 || h_matrix.rows() != n || h_matrix.cols() != n || h.len() != n || c.len() != n {
        return Err(Error::Shape(format!(
            "normalized system needs an n x n H (n >= 1) and h, c of length n; got {}x{}, {}, {}",
            h_matrix.rows(),
            h_matrix.cols(),
            h.len(),
            c.len()
        )));
    }
    Ok(())
}

/// Canonical text key: `n;delta;` followed by the comma-separated entries of
/// the flattened `(n+1) x (n+1)` matrix `(A | b)`, row-major.
///
/// Keys order lexicographically by `(n, delta, entries)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey {
    n: usize,
    delta: BigInt,
    entries: Vec<BigInt>,
}

impl CanonicalKey {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    /// Rebuilds the normalized system the key was computed from.
    pub fn to_normalized(&self) -> Result<NormalizedSystem> {
        let n = self.n;
        let w = n + 1;
        let mut rows = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        for i in 0..n {
            rows.push(self.entries[i * w..i * w + n].to_vec());
            h.push(self.entries[i * w + n].clone());
        }
        let c = self.entries[n * w..n * w + n].to_vec();
        let c0 = self.entries[n * w + n].clone();
        let ns = NormalizedSystem::new(IntMatrix::from_rows(rows, n)?, h, c, c0)?;
        Ok(NormalizedSystem {
            delta: self.delta.clone(),
            ..ns
        })
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};", self.n, self.delta)?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for CanonicalKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed canonical key {s:?}"));
        let mut parts = s.splitn(3, ';');
        let n: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let delta: BigInt = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let entries = parts
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|e| e.parse::<BigInt>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        if n == 0 || entries.len() != (n + 1) * (n + 1) {
            return Err(bad());
        }
        Ok(Self { n, delta, entries })
    }
}

pub fn canonical_key(ns: &NormalizedSystem) -> CanonicalKey {
    let mut entries = Vec::with_capacity((ns.n + 1) * (ns.n + 1));
    for i in 0..ns.n {
        entries.extend_from_slice(ns.h_matrix.row(i));
        entries.push(ns.h[i].clone());
    }
    entries.extend_from_slice(&ns.c);
    entries.push(ns.c0.clone());
    CanonicalKey {
        n: ns.n,
        delta: ns.delta.clone(),
        entries,
    }
}

/// Divides every row `(a_i | b_i)` by the gcd of its entries.
pub fn primitivize(sys: &InequalitySystem) -> Result<InequalitySystem> {
    let n = sys.dim();
    let mut rows = Vec::with_capacity(n + 1);
    let mut rhs = Vec::with_capacity(n + 1);
    for (i, row) in sys.extended_rows().into_iter().enumerate() {
        let g = gcd_all(&row);
        if g.is_zero() {
            return Err(Error::ZeroRow(i));
        }
        let mut row: IntVector = row.into_iter().map(|x| x / &g).collect();
        rhs.push(row.pop().expect("row has n+1 entries"));
        rows.push(row);
    }
    InequalitySystem::new(IntMatrix::from_rows(rows, n)?, rhs)
}

/// True iff both systems consist of the same primitive rows up to order,
/// i.e. describe the same simplex.
pub fn same_facets(a: &InequalitySystem, b: &InequalitySystem) -> bool {
    let rows = |s: &InequalitySystem| {
        primitivize(s).ok().map(|p| {
            let mut r = p.extended_rows();
            r.sort();
            r
        })
    };
    a.dim() == b.dim() && matches!((rows(a), rows(b)), (Some(x), Some(y)) if x == y)
}

/// Translation reducing `b` against an HNF: returns `(h, x0)` with
/// `h = b - H x0` and `0 <= h_i < H_ii`.
pub fn reduce_rhs(h_matrix: &IntMatrix, b: &[BigInt]) -> Result<(IntVector, IntVector)> {
    if !is_hnf(h_matrix) {
        return Err(Error::Precondition(
            "reduce_rhs needs a matrix in HNF".into(),
        ));
    }
    if b.len() != h_matrix.rows() {
        return Err(Error::Shape(format!(
            "rhs of length {} for a {}x{} matrix",
            b.len(),
            h_matrix.rows(),
            h_matrix.cols()
        )));
    }
    let n = b.len();
    let mut h = b.to_vec();
    let mut x0 = vec![BigInt::zero(); n];
    for i in 0..n {
        let q = num_integer::Integer::div_floor(&h[i], h_matrix.get(i, i));
        if !q.is_zero() {
            for (r, hr) in h.iter_mut().enumerate().skip(i) {
                *hr -= &q * h_matrix.get(r, i);
            }
        }
        x0[i] = q;
    }
    Ok((h, x0))
}

/// Output of [`normalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalization {
    pub system: NormalizedSystem,
    /// `apply_map(input, map)` equals the normalized system up to row order
    /// and row scaling.
    pub map: AffineUnimodularMap,
    /// Output row `r` stems from input row `rows[r]`.
    pub rows: Vec<usize>,
}

/// Bases of maximal `|det|` of the primitive form of `sys`, ascending.
pub fn max_det_bases(sys: &InequalitySystem) -> Result<Vec<Vec<usize>>> {
    let prim = primitivize(sys)?;
    Ok(validate_simplex(&prim)?.max_det_bases)
}

/// The normalization algorithm for the given ordered base.
///
/// Base maximality is judged on the primitive form of `sys`. The base rows
/// keep the given order going into the HNF.
pub fn normalize(sys: &InequalitySystem, base: &[usize]) -> Result<Normalization> {
    let n = sys.dim();
    let mut sorted = base.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if base.len() != n || sorted.len() != n || sorted.iter().any(|&i| i > n) {
        return Err(Error::Precondition(format!(
            "base {base:?} is not a set of {n} row indices out of {}",
            n + 1
        )));
    }
    let prim = primitivize(sys)?;
    let meta = validate_simplex(&prim)?;
    normalize_validated(&prim, &meta, base)
}

/// [`normalize`] with the base of least row-index set among the maximal ones.
pub fn normalize_auto(sys: &InequalitySystem) -> Result<Normalization> {
    let prim = primitivize(sys)?;
    let meta = validate_simplex(&prim)?;
    let base = meta
        .max_det_bases
        .first()
        .cloned()
        .ok_or_else(|| Error::Internal("simplex without a maximal base".into()))?;
    normalize_validated(&prim, &meta, &base)
}

fn normalize_validated(
    prim: &InequalitySystem,
    meta: &SimplexMeta,
    base: &[usize],
) -> Result<Normalization> {
    normalize_primitive(prim, &meta.delta, base).map_err(|e| match e {
        Error::NonMaximalBase {
            base, minor, delta, ..
        } => Error::NonMaximalBase {
            base,
            minor,
            delta,
            valid: meta.max_det_bases.clone(),
        },
        other => other,
    })
}

/// Normalization of a system already known to be a primitive simplex with
/// the given Δ; `base` must be `n` distinct row indices.
pub(crate) fn normalize_primitive(
    prim: &InequalitySystem,
    delta: &BigInt,
    base: &[usize],
) -> Result<Normalization> {
    let n = prim.dim();
    let omitted = (0..=n)
        .find(|i| !base.contains(i))
        .expect("base has n distinct rows");
    let minor = det(&prim.a().select_rows(base))?;
    if &minor.abs() != delta {
        return Err(Error::NonMaximalBase {
            base: base.to_vec(),
            minor,
            delta: delta.clone(),
            valid: Vec::new(),
        });
    }

    let mut order = base.to_vec();
    order.push(omitted);
    let stacked = prim.permute_rows(&order);
    let decomposition = hnf(stacked.a())?;
    let hermite = AffineUnimodularMap::linear_unchecked(decomposition.q_inv.clone());
    let full = &decomposition.full;

    // Unit-diagonal rows first (they are unit vectors), then the rest in their
    // original order; afterwards sort the unit block by (B column, c entry).
    let mut sigma: Vec<usize> = (0..n).filter(|&i| full.get(i, i).is_one()).collect();
    let s = sigma.len();
    sigma.extend((0..n).filter(|&i| !full.get(i, i).is_one()));
    let pair_key = |i: usize| -> Vec<BigInt> {
        let mut key: Vec<BigInt> = sigma[s..].iter().map(|&r| full.get(r, i).clone()).collect();
        key.push(full.get(n, i).clone());
        key
    };
    let mut unit_block = sigma[..s].to_vec();
    unit_block.sort_by_cached_key(|&i| pair_key(i));
    sigma[..s].copy_from_slice(&unit_block);

    let mut perm = IntMatrix::zeros(n, n);
    for (p, &i) in sigma.iter().enumerate() {
        perm.set(i, p, BigInt::one());
    }
    let permutation = AffineUnimodularMap::linear_unchecked(perm);

    let mut h_matrix = IntMatrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            h_matrix.set(p, q, full.get(sigma[p], sigma[q]).clone());
        }
    }
    let c: IntVector = sigma.iter().map(|&q| full.get(n, q).clone()).collect();
    let rhs: IntVector = sigma.iter().map(|&p| stacked.b()[p].clone()).collect();
    let (h, x0) = reduce_rhs(&h_matrix, &rhs)?;
    let c0 = &stacked.b()[n] - dot(&c, &x0);

    let map = compose(
        &compose(&hermite, &permutation),
        &AffineUnimodularMap::translation(x0),
    );
    let mut rows: Vec<usize> = sigma.iter().map(|&p| order[p]).collect();
    rows.push(omitted);

    let system = NormalizedSystem {
        n,
        s,
        k: n - s,
        delta: delta.clone(),
        h_matrix,
        h,
        c,
        c0,
    };
    let report = validate_normalized(&system);
    if !report.is_valid() {
        return Err(Error::Internal(format!(
            "normalization produced an invalid system: {report}"
        )));
    }
    debug_assert!(apply_map(prim, &map)
        .map(|img| img.permute_rows(&rows) == system.to_system())
        .unwrap_or(false));
    Ok(Normalization { system, map, rows })
}

/// A violated requirement of the normalized form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Violation {
    /// `H` is not a lower-triangular, row-reduced HNF.
    Hnf,
    /// `det H`, the stored delta and the recomputed Δ of the full matrix disagree.
    Delta,
    /// Not of the form `[[I_s, 0], [B, T]]` with `T_ii >= 2` and `2^k <= Δ`.
    BlockForm,
    /// Identity-block coordinates not ordered by (B column, c entry).
    ColumnOrder,
    /// Some `h_i` outside `[0, H_ii)`.
    Rhs,
    /// Some row of `(A | b)` is not primitive.
    Gcd,
    /// `-H^{-T} c` not in `(0, 1]^n`.
    Paral,
    /// `max |a_ij| > Δ`.
    MaxEntry,
    /// The system is not a bounded full-dimensional simplex.
    NotSimplex,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Violation::Hnf => "H not in Hermite normal form",
            Violation::Delta => "det H differs from Δ",
            Violation::BlockForm => "H not of block form [I 0; B T]",
            Violation::ColumnOrder => "B columns out of order",
            Violation::Rhs => "h not reduced",
            Violation::Gcd => "row not primitive",
            Violation::Paral => "c outside paral(-H^T)",
            Violation::MaxEntry => "entry larger than Δ",
            Violation::NotSimplex => "not a full-dimensional simplex",
        };
        f.write_str(text)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every condition of the normalized form, including the column
/// tie-break, and recomputes Δ of the full `(n+1) x n` matrix.
pub fn validate_normalized(ns: &NormalizedSystem) -> ValidationReport {
    let mut violations = Vec::new();
    let n = ns.n;
    let hm = &ns.h_matrix;

    if !is_hnf(hm) {
        violations.push(Violation::Hnf);
    }

    let det_h = det(hm).unwrap_or_else(|_| BigInt::zero());
    let sys = ns.to_system();
    let full_delta = max_minors(sys.a())
        .map(|m| delta_of(&m))
        .unwrap_or_default();
    if det_h != ns.delta || full_delta != det_h || !det_h.is_positive() {
        violations.push(Violation::Delta);
    }

    let block_ok = ns.s + ns.k == n
        && (0..ns.s).all(|i| {
            (0..n).all(|j| {
                let expected = if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                };
                hm.get(i, j) == &expected
            })
        })
        && (ns.s..n).all(|i| hm.get(i, i) >= &BigInt::from(2))
        && (ns.delta.is_positive() && BigInt::one() << ns.k <= ns.delta);
    if !block_ok {
        violations.push(Violation::BlockForm);
    }

    if ns.s + ns.k == n {
        let pair = |j: usize| -> Vec<&BigInt> {
            let mut v: Vec<&BigInt> = (ns.s..n).map(|i| hm.get(i, j)).collect();
            v.push(&ns.c[j]);
            v
        };
        if (1..ns.s).any(|j| pair(j - 1).cmp(&pair(j)) == Ordering::Greater) {
            violations.push(Violation::ColumnOrder);
        }
    }

    if (0..n).any(|i| ns.h[i].is_negative() || &ns.h[i] >= hm.get(i, i)) {
        violations.push(Violation::Rhs);
    }

    if sys.extended_rows().iter().any(|row| !gcd_all(row).is_one()) {
        violations.push(Violation::Gcd);
    }

    if det_h.is_zero() || !in_paral(hm, &det_h, &ns.c) {
        violations.push(Violation::Paral);
    }

    if sys.a().max_abs() > ns.delta {
        violations.push(Violation::MaxEntry);
    }

    if validate_simplex(&sys).is_err() {
        violations.push(Violation::NotSimplex);
    }

    ValidationReport { violations }
}

/// `-H^{-T} c ∈ (0,1]^n`, tested via `w = -adj(H)^T c ∈ [1, det H]^n` (for `det H > 0`).
fn in_paral(hm: &IntMatrix, det_h: &BigInt, c: &[BigInt]) -> bool {
    if !det_h.is_positive() {
        return false;
    }
    let adj = adjugate(hm).expect("square");
    adj.vec_mul(c)
        .into_iter()
        .all(|w| w.is_negative() && &(-w) <= det_h)
}

/// `t = -H^{-T} c` as exact rationals.
pub fn paral_coordinates(hm: &IntMatrix, c: &[BigInt]) -> Result<RationalVector> {
    let neg: IntVector = c.iter().map(|x| -x).collect();
    solve_rational(&hm.transpose(), &neg)
}

/// `c^T v` for the apex `v = H^{-1} h`.
pub fn apex_value(ns: &NormalizedSystem) -> Result<BigRational> {
    let v = ns.apex()?;
    Ok(ns
        .c
        .iter()
        .zip(&v)
        .map(|(ci, vi)| vi * BigRational::from_integer(ci.clone()))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::int_vec;
    use crate::simplex::{apply_map, inverse};

    fn ns(h: &[&[i64]], hv: &[i64], c: &[i64], c0: i64) -> NormalizedSystem {
        NormalizedSystem::new(
            IntMatrix::from_i64_rows(h),
            int_vec(hv),
            int_vec(c),
            BigInt::from(c0),
        )
        .unwrap()
    }

    fn triangle() -> InequalitySystem {
        InequalitySystem::from_i64(&[[-1, 0], [0, -1], [1, 1]], &[0, 0, 1]).unwrap()
    }

    #[test]
    fn primitivize_examples() {
        let sys = InequalitySystem::from_i64(&[[2, 0], [2, 4], [-3, -6]], &[0, 3, -9]).unwrap();
        let p = primitivize(&sys).unwrap();
        assert_eq!(
            p.extended_rows(),
            vec![
                int_vec(&[1, 0, 0]),
                int_vec(&[2, 4, 3]),
                int_vec(&[-1, -2, -3])
            ]
        );
        let zero = InequalitySystem::from_i64(&[[0, 0], [1, 0], [0, 1]], &[0, 1, 1]).unwrap();
        assert_eq!(primitivize(&zero), Err(Error::ZeroRow(0)));
    }

    #[test]
    fn reduce_rhs_examples() {
        let (h, x0) = reduce_rhs(&IntMatrix::from_i64_rows(&[[2]]), &int_vec(&[5])).unwrap();
        assert_eq!((h, x0), (int_vec(&[1]), int_vec(&[2])));

        let hm = IntMatrix::from_i64_rows(&[[1, 0], [1, 2]]);
        let (h, x0) = reduce_rhs(&hm, &int_vec(&[3, 4])).unwrap();
        assert_eq!(h, int_vec(&[0, 1]));
        assert_eq!(x0, int_vec(&[3, 0]));

        let (h, x0) = reduce_rhs(&hm, &int_vec(&[0, 1])).unwrap();
        assert_eq!((h, x0), (int_vec(&[0, 1]), int_vec(&[0, 0])));

        assert!(matches!(
            reduce_rhs(
                &IntMatrix::from_i64_rows(&[[1, 1], [0, 2]]),
                &int_vec(&[0, 0])
            ),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn normalize_standard_triangle() {
        let out = normalize(&triangle(), &[0, 1]).unwrap();
        let expected = ns(&[&[1, 0], &[0, 1]], &[0, 0], &[-1, -1], 1);
        assert_eq!(out.system, expected);
        let img = apply_map(&triangle(), &out.map).unwrap();
        assert_eq!(img.permute_rows(&out.rows), expected.to_system());
    }

    #[test]
    fn normalize_is_idempotent() {
        let sys = ns(
            &[&[1, 0, 0], &[0, 1, 0], &[1, 2, 3]],
            &[0, 0, 2],
            &[-1, -1, -1],
            0,
        );
        assert!(
            validate_normalized(&sys).is_valid(),
            "{}",
            validate_normalized(&sys)
        );
        let out = normalize(&sys.to_system(), &[0, 1, 2]).unwrap();
        assert_eq!(out.system, sys);
        assert_eq!(out.map, AffineUnimodularMap::identity(3));
        assert_eq!(out.rows, vec![0, 1, 2, 3]);
    }

    #[test]
    fn normalize_segment() {
        // [1/3, 1/2] written as -3x <= -1, 2x <= 1.
        let seg = InequalitySystem::from_i64(&[[-3], [2]], &[-1, 1]).unwrap();
        assert_eq!(max_det_bases(&seg).unwrap(), vec![vec![0]]);
        let out = normalize(&seg, &[0]).unwrap();
        assert_eq!(out.system, ns(&[&[3]], &[2], &[-2], -1));
        assert!(validate_normalized(&out.system).is_valid());
        let img = apply_map(&seg, &out.map).unwrap();
        assert_eq!(img.permute_rows(&out.rows), out.system.to_system());
        let back = apply_map(&out.system.to_system(), &inverse(&out.map)).unwrap();
        assert!(same_facets(&back, &seg));

        assert!(matches!(
            normalize(&seg, &[1]),
            Err(Error::NonMaximalBase { .. })
        ));
    }

    #[test]
    fn validator_examples() {
        let good = ns(&[&[1, 0], &[0, 1]], &[0, 0], &[-1, -1], 1);
        assert!(validate_normalized(&good).is_valid());

        let bad_c = ns(&[&[1, 0], &[0, 1]], &[0, 0], &[-2, -1], 1);
        assert!(validate_normalized(&bad_c)
            .violations
            .contains(&Violation::Paral));

        let bad_h = ns(&[&[1, 0], &[0, 1]], &[0, 1], &[-1, -1], 1);
        assert!(validate_normalized(&bad_h)
            .violations
            .contains(&Violation::Rhs));

        let unsorted = ns(
            &[&[1, 0, 0], &[0, 1, 0], &[1, 0, 2]],
            &[0, 0, 0],
            &[-1, -1, -1],
            1,
        );
        assert!(validate_normalized(&unsorted)
            .violations
            .contains(&Violation::ColumnOrder));
    }

    #[test]
    fn tie_break_uses_c_entry() {
        let sys = ns(
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 2]],
            &[0, 0, 1],
            &[-1, -2, -2],
            -1,
        );
        let report = validate_normalized(&sys);
        assert!(
            report.violations.contains(&Violation::ColumnOrder),
            "{report}"
        );
    }

    #[test]
    fn canonical_key_examples() {
        let a = ns(&[&[1, 0], &[0, 1]], &[0, 0], &[-1, -1], 1);
        let b = a.with_c0(BigInt::from(2));
        assert_eq!(canonical_key(&a), canonical_key(&a.clone()));
        assert_ne!(canonical_key(&a), canonical_key(&b));
        assert!(canonical_key(&a) < canonical_key(&b));
        let text = canonical_key(&a).to_string();
        assert_eq!(text, "2;1;1,0,0,0,1,0,-1,-1,1");
        let parsed: CanonicalKey = text.parse().unwrap();
        assert_eq!(parsed, canonical_key(&a));
        assert_eq!(parsed.to_normalized().unwrap(), a);
        assert!("2;1;1,0".parse::<CanonicalKey>().is_err());
    }
}
