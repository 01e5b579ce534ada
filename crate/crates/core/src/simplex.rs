//! Simplices `{x : A x <= b}`, their vertices and Δ, affine unimodular maps,
//! and a brute-force lattice-point oracle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, adjugate, delta_of, dot, is_unimodular, max_minors, solve_rational, IntMatrix, IntVector,
    MaxMinor, RationalVector,
};

/// Default bound on the number of candidate points the brute-force oracle scans.
pub const DEFAULT_POINT_CAP: u64 = 10_000_000;

/// A system `A x <= b` with `A` of shape `(n+1) x n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InequalitySystem {
    a: IntMatrix,
    b: IntVector,
}

impl InequalitySystem {
    pub fn new(a: IntMatrix, b: IntVector) -> Result<Self> {
        let n = a.cols();
        if n == 0 || a.rows() != n + 1 || b.len() != n + 1 {
            return Err(Error::Shape(format!(
                "expected an (n+1) x n matrix with n >= 1 and rhs of length n+1, got {}x{} and {}",
                a.rows(),
                a.cols(),
                b.len()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn from_i64<R: AsRef<[i64]>>(a: &[R], b: &[i64]) -> Result<Self> {
        Self::new(IntMatrix::from_i64_rows(a), linalg::int_vec(b))
    }

    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    /// Reorders rows: output row `r` is input row `order[r]`.
    pub fn permute_rows(&self, order: &[usize]) -> Self {
        Self {
            a: self.a.select_rows(order),
            b: order.iter().map(|&i| self.b[i].clone()).collect(),
        }
    }

    /// Rows `(a_i | b_i)` as flat integer vectors.
    pub fn extended_rows(&self) -> Vec<IntVector> {
        (0..self.a.rows())
            .map(|i| {
                let mut row = self.a.row(i).to_vec();
                row.push(self.b[i].clone());
                row
            })
            .collect()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        (0..self.a.rows()).all(|i| dot(self.a.row(i), x) <= self.b[i])
    }
}

/// The affine map `x -> U x + x0` with `U` unimodular.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineUnimodularMap {
    u: IntMatrix,
    x0: IntVector,
}

impl AffineUnimodularMap {
    pub fn new(u: IntMatrix, x0: IntVector) -> Result<Self> {
        if !u.is_square() || u.rows() != x0.len() {
            return Err(Error::Shape(format!(
                "map with a {}x{} matrix and a length-{} translation",
                u.rows(),
                u.cols(),
                x0.len()
            )));
        }
        if !is_unimodular(&u) {
            return Err(Error::NotUnimodular);
        }
        Ok(Self { u, x0 })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            u: IntMatrix::identity(n),
            x0: vec![BigInt::zero(); n],
        }
    }

    pub fn translation(x0: IntVector) -> Self {
        Self {
            u: IntMatrix::identity(x0.len()),
            x0,
        }
    }

    pub(crate) fn linear_unchecked(u: IntMatrix) -> Self {
        let n = u.rows();
        debug_assert!(is_unimodular(&u));
        Self {
            u,
            x0: vec![BigInt::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn u(&self) -> &IntMatrix {
        &self.u
    }

    pub fn x0(&self) -> &[BigInt] {
        &self.x0
    }

    pub fn apply(&self, x: &[BigInt]) -> IntVector {
        self.u
            .mul_vec(x)
            .into_iter()
            .zip(&self.x0)
            .map(|(y, t)| y + t)
            .collect()
    }

    pub fn apply_rational(&self, x: &[BigRational]) -> RationalVector {
        (0..self.dim())
            .map(|i| {
                let mut acc = BigRational::from_integer(self.x0[i].clone());
                for (uij, xj) in self.u.row(i).iter().zip(x) {
                    acc += xj * BigRational::from_integer(uij.clone());
                }
                acc
            })
            .collect()
    }
}

/// `compose(m2, m1)(x) = m2(m1(x))`.
pub fn compose(m2: &AffineUnimodularMap, m1: &AffineUnimodularMap) -> AffineUnimodularMap {
    assert_eq!(m2.dim(), m1.dim(), "composing maps of different dimension");
    AffineUnimodularMap {
        u: m2.u.mul(&m1.u),
        x0: m2.apply(&m1.x0),
    }
}

/// `inverse(m)(m(x)) = x`, using `U^{-1} = adj(U) / det(U)`.
pub fn inverse(m: &AffineUnimodularMap) -> AffineUnimodularMap {
    let d = linalg::det(&m.u).expect("square by construction");
    let adj = adjugate(&m.u).expect("square by construction");
    let u_inv = if d.is_one() { adj } else { adj.scale(&d) };
    let x0 = u_inv.mul_vec(&m.x0).into_iter().map(|v| -v).collect();
    AffineUnimodularMap { u: u_inv, x0 }
}

/// Returns `(A U, b - A x0)`: `x` satisfies the result iff `m(x)` satisfies `sys`,
/// so the result describes the preimage `m^{-1}(S)`.
pub fn apply_map(sys: &InequalitySystem, m: &AffineUnimodularMap) -> Result<InequalitySystem> {
    if sys.dim() != m.dim() {
        return Err(Error::Shape(format!(
            "map of dimension {} applied to a system of dimension {}",
            m.dim(),
            sys.dim()
        )));
    }
    let a = sys.a.mul(&m.u);
    let shift = sys.a.mul_vec(&m.x0);
    let b = sys.b.iter().zip(shift).map(|(bi, si)| bi - si).collect();
    Ok(InequalitySystem { a, b })
}

/// Data attached to a validated simplex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexMeta {
    pub delta: BigInt,
    /// `vertices[i]` is the vertex opposite the facet of row `i`.
    pub vertices: Vec<RationalVector>,
    /// Bases (ascending row sets) whose minor has absolute value `delta`.
    pub max_det_bases: Vec<Vec<usize>>,
    pub minors: Vec<MaxMinor>,
}

impl SimplexMeta {
    /// Absolute values of the maximal minors, sorted.
    pub fn minor_multiset(&self) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = self.minors.iter().map(|m| m.minor.abs()).collect();
        v.sort();
        v
    }
}

/// Succeeds iff every maximal minor is nonzero and every basic solution
/// strictly satisfies its omitted inequality.
pub fn validate_simplex(sys: &InequalitySystem) -> Result<SimplexMeta> {
    let n = sys.dim();
    let minors = max_minors(&sys.a)?;
    if let Some(m) = minors.iter().find(|m| m.minor.is_zero()) {
        return Err(Error::DegenerateMinor {
            base: m.base.clone(),
        });
    }
    let delta = delta_of(&minors);
    let mut vertices = Vec::with_capacity(n + 1);
    for omit in 0..=n {
        let base: Vec<usize> = (0..=n).filter(|&i| i != omit).collect();
        let rhs: IntVector = base.iter().map(|&i| sys.b[i].clone()).collect();
        let v = solve_rational(&sys.a.select_rows(&base), &rhs)?;
        let lhs: BigRational = sys
            .a
            .row(omit)
            .iter()
            .zip(&v)
            .map(|(a, x)| x * BigRational::from_integer(a.clone()))
            .sum();
        if lhs >= BigRational::from_integer(sys.b[omit].clone()) {
            return Err(Error::NotFullDimensional {
                vertex: omit,
                row: omit,
            });
        }
        vertices.push(v);
    }
    let max_det_bases = minors
        .iter()
        .filter(|m| m.minor.abs() == delta)
        .map(|m| m.base.clone())
        .collect();
    Ok(SimplexMeta {
        delta,
        vertices,
        max_det_bases,
        minors,
    })
}

/// Integer bounding box `[lo_i, hi_i]` of a set of rational points.
pub(crate) fn bounding_box(points: &[RationalVector]) -> Vec<(BigInt, BigInt)> {
    let n = points.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let lo = points.iter().map(|p| p[i].clone()).min().unwrap();
            let hi = points.iter().map(|p| p[i].clone()).max().unwrap();
            (lo.ceil().to_integer(), hi.floor().to_integer())
        })
        .collect()
}

/// Exact `|S ∩ Z^n|` by scanning every integer point of the vertex bounding box.
pub fn count_integer_points_bruteforce(sys: &InequalitySystem, cap: u64) -> Result<u64> {
    let meta = validate_simplex(sys)?;
    let bounds = bounding_box(&meta.vertices);
    let mut candidates = BigInt::one();
    for (lo, hi) in &bounds {
        if hi < lo {
            return Ok(0);
        }
        candidates *= hi - lo + 1;
    }
    if candidates > BigInt::from(cap) {
        return Err(Error::OracleScaleExceeded { candidates, cap });
    }
    if let Some(count) = count_small(sys, &bounds) {
        return Ok(count);
    }
    let mut x: IntVector = bounds.iter().map(|(lo, _)| lo.clone()).collect();
    let mut count = 0u64;
    loop {
        if sys.contains(&x) {
            count += 1;
        }
        if !advance(&mut x, &bounds) {
            return Ok(count);
        }
    }
}

fn advance(x: &mut [BigInt], bounds: &[(BigInt, BigInt)]) -> bool {
    for (xi, (lo, hi)) in x.iter_mut().zip(bounds) {
        if *xi < *hi {
            *xi += 1;
            return true;
        }
        *xi = lo.clone();
    }
    false
}

/// Machine-integer fast path; `None` when something does not fit.
fn count_small(sys: &InequalitySystem, bounds: &[(BigInt, BigInt)]) -> Option<u64> {
    let a: Vec<Vec<i64>> = (0..sys.a.rows())
        .map(|i| sys.a.row(i).iter().map(|x| x.to_i64()).collect())
        .collect::<Option<_>>()?;
    let b: Vec<i64> = sys.b.iter().map(|x| x.to_i64()).collect::<Option<_>>()?;
    let bounds: Vec<(i64, i64)> = bounds
        .iter()
        .map(|(lo, hi)| Some((lo.to_i64()?, hi.to_i64()?)))
        .collect::<Option<_>>()?;
    let mut x: Vec<i64> = bounds.iter().map(|&(lo, _)| lo).collect();
    let mut count = 0u64;
    loop {
        let mut inside = true;
        for (row, &rhs) in a.iter().zip(&b) {
            let mut acc = 0i128;
            for (&aij, &xj) in row.iter().zip(&x) {
                acc = acc.checked_add(aij as i128 * xj as i128)?;
            }
            if acc > rhs as i128 {
                inside = false;
                break;
            }
        }
        if inside {
            count += 1;
        }
        let mut advanced = false;
        for (xi, &(lo, hi)) in x.iter_mut().zip(&bounds) {
            if *xi < hi {
                *xi += 1;
                advanced = true;
                break;
            }
            *xi = lo;
        }
        if !advanced {
            return Some(count);
        }
    }
}

/// True iff every coordinate of every vertex is an integer.
pub fn is_lattice_simplex(meta: &SimplexMeta) -> bool {
    meta.vertices
        .iter()
        .all(|v| v.iter().all(|x| x.denom().is_one()))
}
