//! Exact integer and rational linear algebra.
//!
//! Everything here works on arbitrary-precision integers. Matrices are dense
//! and row-major. The Hermite normal form follows the lower-triangular,
//! row-reduced convention: `A = H_full * Q` with `Q` unimodular, the top
//! square block of `H_full` lower-triangular, `H_ii > 0` and
//! `0 <= H_ij < H_ii` for `j < i`.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type IntVector = Vec<BigInt>;
/// Entries are kept fully reduced with positive denominators by `BigRational`.
pub type RationalVector = Vec<BigRational>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must share one length.
    /// An empty row list yields a `0 x cols` matrix, so pass `cols` explicitly.
    pub fn from_rows(rows: Vec<IntVector>, cols: usize) -> Result<Self> {
        let n_rows = rows.len();
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            data,
        })
    }

    /// Convenience constructor for small literal matrices.
    ///
    /// Panics on ragged input.
    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let rows = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::from_rows(rows, cols).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigInt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<IntVector> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Matrix product. Panics if the inner dimensions disagree.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// `M * v`. Panics on length mismatch.
    pub fn mul_vec(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `v^T * M`. Panics on length mismatch.
    pub fn vec_mul(&self, v: &[BigInt]) -> IntVector {
        assert_eq!(self.rows, v.len(), "vector-matrix shape mismatch");
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += vi * self.get(i, j);
            }
        }
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        IntMatrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    /// `max |a_ij|`, zero for an empty matrix.
    pub fn max_abs(&self) -> BigInt {
        self.data
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        self.get(i, j)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn int_vec(values: &[i64]) -> IntVector {
    values.iter().map(|&x| BigInt::from(x)).collect()
}

/// Extended Euclid: returns `(g, s, t)` with `s*a + t*b = g >= 0`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// gcd of all entries; zero for an all-zero (or empty) slice.
pub fn gcd_all<'a, I: IntoIterator<Item = &'a BigInt>>(values: I) -> BigInt {
    values.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

/// Fraction-free (Bareiss) determinant.
pub fn det(m: &IntMatrix) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "determinant of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a = m.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a.get(k, k).is_zero() {
            match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                Some(p) => {
                    a.swap_rows(k, p);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        let pivot = a.get(k, k).clone();
        for i in k + 1..n {
            let aik = a.get(i, k).clone();
            for j in k + 1..n {
                let v = (a.get(i, j) * &pivot - &aik * a.get(k, j)) / &prev;
                a.set(i, j, v);
            }
        }
        prev = pivot;
    }
    let d = a.get(n - 1, n - 1).clone();
    Ok(if negate { -d } else { d })
}

fn minor_matrix(m: &IntMatrix, skip_row: usize, skip_col: usize) -> IntMatrix {
    let n = m.rows();
    let mut data = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != skip_row) {
        for j in (0..n).filter(|&j| j != skip_col) {
            data.push(m.get(i, j).clone());
        }
    }
    IntMatrix {
        rows: n - 1,
        cols: n - 1,
        data,
    }
}

/// Classical adjugate `M*` with `M * M* = M* * M = det(M) * I`, also for singular `M`.
pub fn adjugate(m: &IntMatrix) -> Result<IntMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "adjugate of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n <= 1 {
        return Ok(IntMatrix::identity(n));
    }
    let mut adj = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let cof = det(&minor_matrix(m, i, j))?;
            adj.set(j, i, if (i + j) % 2 == 0 { cof } else { -cof });
        }
    }
    Ok(adj)
}

/// Result of [`hnf`]: `A = full * q` with `q` unimodular, and `full = A * q_inv`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hnf {
    pub full: IntMatrix,
    pub q: IntMatrix,
    pub q_inv: IntMatrix,
}

impl Hnf {
    /// The top square block.
    pub fn square(&self) -> IntMatrix {
        let n = self.full.cols();
        self.full.select_rows(&(0..n).collect::<Vec<_>>())
    }
}

/// Column-style echelon reduction of the first `pivot_rows` rows of `w`.
///
/// When `q` is given, it is kept so that `w_original = w * q` holds throughout.
fn column_echelon(
    w: &mut IntMatrix,
    pivot_rows: usize,
    mut q: Option<&mut IntMatrix>,
) -> Result<()> {
    let cols = w.cols();
    let rows = w.rows();
    for i in 0..pivot_rows {
        for j in i + 1..cols {
            if w.get(i, j).is_zero() {
                continue;
            }
            let a = w.get(i, i).clone();
            let b = w.get(i, j).clone();
            let (g, s, t) = extended_gcd(&a, &b);
            let u = -(&b / &g);
            let v = &a / &g;
            for r in 0..rows {
                let ci = w.get(r, i).clone();
                let cj = w.get(r, j).clone();
                w.set(r, i, &s * &ci + &t * &cj);
                w.set(r, j, &u * &ci + &v * &cj);
            }
            if let Some(q) = q.as_deref_mut() {
                for c in 0..q.cols() {
                    let ri = q.get(i, c).clone();
                    let rj = q.get(j, c).clone();
                    q.set(i, c, &v * &ri - &u * &rj);
                    q.set(j, c, &s * &rj - &t * &ri);
                }
            }
        }
        if w.get(i, i).is_zero() {
            return Err(Error::Rank(format!(
                "leading {}x{} block is singular (row {i})",
                pivot_rows, pivot_rows
            )));
        }
        if w.get(i, i).is_negative() {
            for r in 0..rows {
                let v = -w.get(r, i).clone();
                w.set(r, i, v);
            }
            if let Some(q) = q.as_deref_mut() {
                for x in q.row_mut(i) {
                    *x = -x.clone();
                }
            }
        }
        let pivot = w.get(i, i).clone();
        for j in 0..i {
            let f = w.get(i, j).div_floor(&pivot);
            if f.is_zero() {
                continue;
            }
            for r in 0..rows {
                let v = w.get(r, j) - &f * w.get(r, i);
                w.set(r, j, v);
            }
            if let Some(q) = q.as_deref_mut() {
                for c in 0..q.cols() {
                    let v = q.get(i, c) + &f * q.get(j, c);
                    q.set(i, c, v);
                }
            }
        }
    }
    Ok(())
}

/// Hermite normal form of an `m x n` matrix (`m >= n`) whose leading `n x n`
/// block is nonsingular. No row permutation is chosen here.
pub fn hnf(a: &IntMatrix) -> Result<Hnf> {
    let n = a.cols();
    if a.rows() < n {
        return Err(Error::Shape(format!(
            "HNF needs at least as many rows as columns, got {}x{}",
            a.rows(),
            n
        )));
    }
    // The identity stacked below A records the inverse transform under the same column ops.
    let m = a.rows();
    let mut stacked = IntMatrix::zeros(m + n, n);
    stacked.data[..m * n].clone_from_slice(&a.data);
    for i in 0..n {
        stacked.set(m + i, i, BigInt::one());
    }
    let mut q = IntMatrix::identity(n);
    column_echelon(&mut stacked, n, Some(&mut q))?;
    let full = IntMatrix {
        rows: m,
        cols: n,
        data: stacked.data[..m * n].to_vec(),
    };
    let q_inv = IntMatrix {
        rows: n,
        cols: n,
        data: stacked.data[m * n..].to_vec(),
    };
    Ok(Hnf { full, q, q_inv })
}

/// Lower-triangular HNF basis of the full-rank lattice spanned by the columns of `generators`.
pub fn lattice_basis(generators: &IntMatrix) -> Result<IntMatrix> {
    let n = generators.rows();
    if generators.cols() < n {
        return Err(Error::Rank(format!(
            "{} generators cannot span a rank-{n} lattice",
            generators.cols()
        )));
    }
    let mut w = generators.clone();
    column_echelon(&mut w, n, None)?;
    let mut basis = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            basis.set(i, j, w.get(i, j).clone());
        }
    }
    Ok(basis)
}

/// True iff `h` is square, lower-triangular, with positive diagonal and
/// `0 <= h_ij < h_ii` for `j < i`.
pub fn is_hnf(h: &IntMatrix) -> bool {
    if !h.is_square() {
        return false;
    }
    let n = h.rows();
    (0..n).all(|i| {
        let d = h.get(i, i);
        d.is_positive()
            && (0..i).all(|j| !h.get(i, j).is_negative() && h.get(i, j) < d)
            && (i + 1..n).all(|j| h.get(i, j).is_zero())
    })
}

/// Exact solution of `M x = b` for nonsingular `M`.
pub fn solve_rational(m: &IntMatrix, b: &[BigInt]) -> Result<RationalVector> {
    if !m.is_square() || m.rows() != b.len() {
        return Err(Error::Shape(format!(
            "solve with a {}x{} matrix and a length-{} rhs",
            m.rows(),
            m.cols(),
            b.len()
        )));
    }
    let n = m.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = m
                .row(i)
                .iter()
                .cloned()
                .map(BigRational::from_integer)
                .collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n)
            .find(|&i| !a[i][k].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(k, p);
        let pivot = a[k][k].clone();
        for i in 0..n {
            if i == k || a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k..=n {
                let v = &a[k][j] * &f;
                a[i][j] -= v;
            }
        }
    }
    Ok((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
}

pub fn is_unimodular(u: &IntMatrix) -> bool {
    u.is_square() && det(u).map(|d| d.abs().is_one()).unwrap_or(false)
}

/// One maximal minor: the determinant of the rows `base` (ascending order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxMinor {
    pub base: Vec<usize>,
    pub minor: BigInt,
}

/// All `n+1` maximal minors of an `(n+1) x n` matrix, ordered by the omitted
/// row `n, n-1, ..., 0` so that bases come out in ascending lexicographic order.
pub fn max_minors(a: &IntMatrix) -> Result<Vec<MaxMinor>> {
    let n = a.cols();
    if a.rows() != n + 1 {
        return Err(Error::Shape(format!(
            "maximal minors expect an (n+1) x n matrix, got {}x{}",
            a.rows(),
            n
        )));
    }
    (0..=n)
        .rev()
        .map(|omit| {
            let base: Vec<usize> = (0..=n).filter(|&i| i != omit).collect();
            let minor = det(&a.select_rows(&base))?;
            Ok(MaxMinor { base, minor })
        })
        .collect()
}

/// `max |minor|`.
pub fn delta_of(minors: &[MaxMinor]) -> BigInt {
    minors
        .iter()
        .map(|m| m.minor.abs())
        .max()
        .unwrap_or_else(BigInt::zero)
}
