//! Integer minimization over simplicial cones `{x : Hx <= h}`.
//!
//! With `y = h - Hx` the problem becomes: minimize `w^T y` over `y >= 0` in
//! the residue class of `h` modulo `HZ^n`, where `w = -adj(H)^T c`. That is a
//! shortest path problem on the finite group `Z^n / HZ^n`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{adjugate, det, dot, is_hnf, solve_rational, IntMatrix, IntVector};
use crate::normal_form::reduce_rhs;

/// Largest group order a [`GroupTable`] will be built for.
pub const MAX_GROUP_ORDER: u64 = 1 << 24;

/// The quotient group `Z^n / HZ^n` for an HNF `H`, with elements stored as
/// residue vectors `0 <= r_i < H_ii`.
///
/// Element ids are mixed-radix encodings with the first coordinate most
/// significant, so id order is the lexicographic order of residues.
#[derive(Clone, Debug)]
pub struct GroupTable {
    n: usize,
    diag: Vec<i64>,
    strides: Vec<usize>,
    lower: Vec<Vec<i64>>,
    order: usize,
    steps: Vec<usize>,
}

impl GroupTable {
    pub fn new(h_matrix: &IntMatrix) -> Result<Self> {
        if !is_hnf(h_matrix) {
            return Err(Error::Precondition(
                "group table needs a matrix in HNF".into(),
            ));
        }
        let n = h_matrix.rows();
        let to_i64 = |x: &BigInt| {
            x.to_i64()
                .filter(|v| (*v as u64) <= MAX_GROUP_ORDER)
                .ok_or_else(|| Error::Domain(format!("group order above {MAX_GROUP_ORDER}")))
        };
        let diag = (0..n)
            .map(|i| to_i64(h_matrix.get(i, i)))
            .collect::<Result<Vec<_>>>()?;
        let order = diag.iter().try_fold(1u64, |acc, &d| {
            acc.checked_mul(d as u64).filter(|&p| p <= MAX_GROUP_ORDER)
        });
        let order = order
            .ok_or_else(|| Error::Domain(format!("group order above {MAX_GROUP_ORDER}")))?
            as usize;
        let lower = (0..n)
            .map(|i| (0..=i).map(|j| to_i64(h_matrix.get(i, j))).collect())
            .collect::<Result<Vec<Vec<i64>>>>()?;
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * diag[i + 1] as usize;
        }
        let mut table = Self {
            n,
            diag,
            strides,
            lower,
            order,
            steps: Vec::new(),
        };
        let mut steps = Vec::with_capacity(order * n);
        let mut r = vec![0i64; n];
        for id in 0..order {
            table.decode_into(id, &mut r);
            for j in 0..n {
                let mut moved = r.clone();
                moved[j] += 1;
                table.reduce_in_place(&mut moved);
                steps.push(table.encode(&moved));
            }
        }
        table.steps = steps;
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of elements, equal to `det H`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Id of `reduce(r + e_j)`.
    pub fn step(&self, id: usize, j: usize) -> usize {
        self.steps[id * self.n + j]
    }

    pub fn residue(&self, id: usize) -> IntVector {
        let mut r = vec![0i64; self.n];
        self.decode_into(id, &mut r);
        r.into_iter().map(BigInt::from).collect()
    }

    /// Id of the class of an arbitrary integer vector.
    pub fn class_of(&self, z: &[BigInt]) -> usize {
        let mut r: Vec<BigInt> = z.to_vec();
        for i in 0..self.n {
            let q = r[i].div_floor(&BigInt::from(self.diag[i]));
            if !q.is_zero() {
                for (k, rk) in r.iter_mut().enumerate().skip(i) {
                    *rk -= &q * self.lower[k][i];
                }
            }
        }
        r.iter()
            .zip(&self.strides)
            .map(|(x, s)| x.to_usize().expect("reduced residue") * s)
            .sum()
    }

    fn decode_into(&self, mut id: usize, r: &mut [i64]) {
        for i in 0..self.n {
            r[i] = (id / self.strides[i]) as i64;
            id %= self.strides[i];
        }
    }

    fn encode(&self, r: &[i64]) -> usize {
        r.iter()
            .zip(&self.strides)
            .map(|(&x, s)| x as usize * s)
            .sum()
    }

    fn reduce_in_place(&self, r: &mut [i64]) {
        for i in 0..self.n {
            let q = r[i].div_euclid(self.diag[i]);
            if q != 0 {
                for k in i..self.n {
                    r[k] -= q * self.lower[k][i];
                }
            }
        }
    }
}

/// The unique `r ≡ z (mod HZ^n)` with `0 <= r_i < H_ii`.
pub fn reduce_residue(h_matrix: &IntMatrix, z: &[BigInt]) -> Result<IntVector> {
    Ok(reduce_rhs(h_matrix, z)?.0)
}

/// `w = -adj(H)^T c`; errors unless every `w_i` lies in `[1, det H]`, which
/// is exactly `c ∈ paral(-H^T)`.
pub fn scaled_weights(h_matrix: &IntMatrix, c: &[BigInt]) -> Result<IntVector> {
    let delta = det(h_matrix)?;
    if !delta.is_positive() || c.len() != h_matrix.rows() {
        return Err(Error::Precondition(
            "weights need a square H with positive determinant and matching c".into(),
        ));
    }
    let w: IntVector = adjugate(h_matrix)?
        .vec_mul(c)
        .into_iter()
        .map(|x| -x)
        .collect();
    if w.iter().any(|x| !x.is_positive() || x > &delta) {
        return Err(Error::Precondition(format!(
            "c = {c:?} is not in paral(-H^T): scaled weights {w:?} outside [1, {delta}]"
        )));
    }
    Ok(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CornerSolution {
    pub f_star: BigInt,
    pub witness_x: IntVector,
}

/// Shortest paths from the zero class for one objective `c`. One instance
/// answers corner problems for every right-hand side.
#[derive(Clone, Debug)]
pub struct CornerSolver<'a> {
    table: &'a GroupTable,
    h_matrix: IntMatrix,
    c: IntVector,
    adj_c: IntVector,
    delta: BigInt,
    weights: Vec<u64>,
    dist: Vec<u64>,
    pred: Vec<Option<(usize, usize)>>,
}

impl<'a> CornerSolver<'a> {
    pub fn new(table: &'a GroupTable, h_matrix: &IntMatrix, c: &[BigInt]) -> Result<Self> {
        if table.dim() != h_matrix.rows() {
            return Err(Error::Shape("group table and H differ in dimension".into()));
        }
        let weights: Vec<u64> = scaled_weights(h_matrix, c)?
            .iter()
            .map(|w| w.to_u64().expect("weight bounded by the group order"))
            .collect();
        let delta = det(h_matrix)?;
        let adj_c = adjugate(h_matrix)?.vec_mul(c);
        let (dist, pred) = dijkstra(table, &weights);
        Ok(Self {
            table,
            h_matrix: h_matrix.clone(),
            c: c.to_vec(),
            adj_c,
            delta,
            weights,
            dist,
            pred,
        })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    /// Scaled shortest distance from the zero class to the class `id`.
    pub fn distance(&self, id: usize) -> u64 {
        self.dist[id]
    }

    /// `min { c^T x : Hx <= h, x ∈ Z^n }` with a minimizer.
    pub fn solve(&self, h: &[BigInt]) -> Result<CornerSolution> {
        let target = self.table.class_of(h);
        let scaled = dot(&self.adj_c, h) + BigInt::from(self.dist[target]);
        let (f_star, rem) = scaled.div_rem(&self.delta);
        if !rem.is_zero() {
            return Err(Error::Internal(format!(
                "corner value {scaled}/{} is not integral",
                self.delta
            )));
        }
        let mut y = vec![BigInt::zero(); self.table.dim()];
        let mut id = target;
        while let Some((prev, j)) = self.pred[id] {
            y[j] += 1;
            id = prev;
        }
        let rhs: IntVector = h.iter().zip(&y).map(|(a, b)| a - b).collect();
        let x = solve_rational(&self.h_matrix, &rhs)?;
        let witness_x = x
            .into_iter()
            .map(|q| {
                q.is_integer()
                    .then(|| q.to_integer())
                    .ok_or_else(|| Error::Internal("corner witness is not integral".into()))
            })
            .collect::<Result<IntVector>>()?;
        debug_assert_eq!(dot(&self.c, &witness_x), f_star);
        Ok(CornerSolution { f_star, witness_x })
    }

    /// `min { c^T x : Hx <= 0, x ∈ Z^n \ {0} }`, as the best of the problems
    /// with right-hand side `-e_j`.
    pub fn solve_excluding_origin(&self) -> Result<CornerSolution> {
        let n = self.table.dim();
        let mut best: Option<CornerSolution> = None;
        for j in 0..n {
            let mut rhs = vec![BigInt::zero(); n];
            rhs[j] = -BigInt::one();
            let sol = self.solve(&rhs)?;
            if best.as_ref().is_none_or(|b| sol.f_star < b.f_star) {
                best = Some(sol);
            }
        }
        best.ok_or_else(|| Error::Shape("empty dimension".into()))
    }

    /// Number of integer points `x` with `Hx <= h` and `c^T x = value`,
    /// saturating at `limit`.
    pub fn count_at_value(&self, h: &[BigInt], value: &BigInt, limit: u64) -> Result<u64> {
        let target = self.table.class_of(h);
        let budget = &self.delta * value - dot(&self.adj_c, h);
        if budget.is_negative() {
            return Ok(0);
        }
        let budget = budget
            .to_usize()
            .filter(|&b| (b + 1).saturating_mul(self.table.order()) <= 1 << 28)
            .ok_or_else(|| Error::Domain("facet count table too large".into()))?;
        let order = self.table.order();
        // ways[s * order + g]: vectors y >= 0 of scaled weight s in class g.
        let mut ways = vec![0u64; (budget + 1) * order];
        ways[0] = 1;
        for (j, &w) in self.weights.iter().enumerate() {
            let w = w as usize;
            if w > budget {
                continue;
            }
            for s in 0..=budget - w {
                for g in 0..order {
                    let count = ways[s * order + g];
                    if count > 0 {
                        let cell = &mut ways[(s + w) * order + self.table.step(g, j)];
                        *cell = (*cell + count).min(limit);
                    }
                }
            }
        }
        Ok(ways[budget * order + target].min(limit))
    }
}

fn dijkstra(table: &GroupTable, weights: &[u64]) -> (Vec<u64>, Vec<Option<(usize, usize)>>) {
    let order = table.order();
    let mut dist = vec![u64::MAX; order];
    let mut pred = vec![None; order];
    let mut done = vec![false; order];
    let mut heap = BinaryHeap::new();
    dist[0] = 0;
    heap.push(Reverse((0u64, 0usize)));
    while let Some(Reverse((d, id))) = heap.pop() {
        if done[id] {
            continue;
        }
        done[id] = true;
        for (j, &w) in weights.iter().enumerate() {
            let next = table.step(id, j);
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                pred[next] = Some((id, j));
                heap.push(Reverse((nd, next)));
            }
        }
    }
    (dist, pred)
}

pub fn corner_minimum(h_matrix: &IntMatrix, h: &[BigInt], c: &[BigInt]) -> Result<CornerSolution> {
    let table = GroupTable::new(h_matrix)?;
    CornerSolver::new(&table, h_matrix, c)?.solve(h)
}

/// `min { c^T x : Hx <= 0, x ∈ Z^n \ {0} }`.
pub fn corner_minimum_excluding_vertex(
    h_matrix: &IntMatrix,
    c: &[BigInt],
) -> Result<CornerSolution> {
    let table = GroupTable::new(h_matrix)?;
    CornerSolver::new(&table, h_matrix, c)?.solve_excluding_origin()
}

/// Exhaustive search of the cone inside the box `v ± radius` around the apex
/// `v = H^{-1} h`, pruned by the running optimum.
///
/// Returns [`Error::RadiusTooSmall`] if a cone point outside the box could
/// beat the best point found inside it.
pub fn corner_minimum_bruteforce(
    h_matrix: &IntMatrix,
    h: &[BigInt],
    c: &[BigInt],
    radius: u64,
) -> Result<CornerSolution> {
    let n = h_matrix.rows();
    if !is_hnf(h_matrix) || h.len() != n || c.len() != n {
        return Err(Error::Precondition(
            "brute force needs an HNF and matching vectors".into(),
        ));
    }
    let w = scaled_weights(h_matrix, c)?;
    let delta = det(h_matrix)?;
    let v = solve_rational(h_matrix, h)?;
    let radius = BigInt::from(radius);
    let lo: IntVector = v.iter().map(|q| q.ceil().to_integer() - &radius).collect();
    let hi: IntVector = v.iter().map(|q| q.floor().to_integer() + &radius).collect();
    let mut search = Search {
        h_matrix,
        h,
        w: &w,
        lo,
        hi,
        x: vec![BigInt::zero(); n],
        best: None,
        cut: None,
    };
    search.descend(0, &BigInt::zero());
    let (scaled, x) = search.best.ok_or(Error::RadiusTooSmall)?;
    if search.cut.is_some_and(|cut| cut < scaled) {
        return Err(Error::RadiusTooSmall);
    }
    let f_star = dot(c, &x);
    debug_assert_eq!(
        &f_star * &delta,
        dot(&adjugate(h_matrix)?.vec_mul(c), h) + scaled
    );
    Ok(CornerSolution {
        f_star,
        witness_x: x,
    })
}

struct Search<'a> {
    h_matrix: &'a IntMatrix,
    h: &'a [BigInt],
    w: &'a [BigInt],
    lo: IntVector,
    hi: IntVector,
    x: IntVector,
    /// Best scaled value `w^T y` and its point.
    best: Option<(BigInt, IntVector)>,
    /// Smallest partial bound among branches left out by the box.
    cut: Option<BigInt>,
}

impl Search<'_> {
    fn bound(&self) -> Option<&BigInt> {
        self.best.as_ref().map(|b| &b.0)
    }

    fn note_cut(&mut self, partial: BigInt) {
        if self.cut.as_ref().is_none_or(|c| &partial < c) {
            self.cut = Some(partial);
        }
    }

    fn descend(&mut self, i: usize, partial: &BigInt) {
        let n = self.x.len();
        if i == n {
            if self.bound().is_none_or(|b| partial < b) {
                self.best = Some((partial.clone(), self.x.clone()));
            }
            return;
        }
        let diag = self.h_matrix.get(i, i).clone();
        let slack: BigInt = &self.h[i]
            - (0..i)
                .map(|j| self.h_matrix.get(i, j) * &self.x[j])
                .sum::<BigInt>();
        let top = slack.div_floor(&diag);
        // y_i = slack - diag * x_i grows as x_i decreases.
        let cost = |xi: &BigInt| partial + &self.w[i] * (&slack - &diag * xi);
        let start = if top > self.hi[i] {
            self.note_cut(cost(&top));
            self.hi[i].clone()
        } else {
            top
        };
        let mut xi = start;
        loop {
            let p = cost(&xi);
            if self.bound().is_some_and(|b| &p >= b) {
                break;
            }
            if xi < self.lo[i] {
                self.note_cut(p);
                break;
            }
            self.x[i] = xi.clone();
            self.descend(i + 1, &p);
            xi -= 1;
        }
    }
}
