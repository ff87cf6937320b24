//! Enumerative ground-truth tests: determinant brute force, Camion's
//! submatrix criterion (ST), Ghouila-Houri column enumeration (CE), and an
//! exhaustive graph-realization search.

use std::time::{Duration, Instant};

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::graphic::{GraphEdge, RealizationGraph};
use crate::matrix::{BinaryMatrix, Label, TernaryMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub rows: Vec<Label>,
    pub cols: Vec<Label>,
    pub det: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Tu,
    NotTu(Witness),
    /// Budget exhausted while working on submatrices (or column subsets) of this order.
    Timeout { order: usize },
}

impl OracleVerdict {
    pub fn is_tu(&self) -> bool {
        matches!(self, OracleVerdict::Tu)
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, OracleVerdict::Timeout { .. })
    }

    /// `Some(true)` for t.u., `Some(false)` for not t.u., `None` on timeout.
    pub fn decided(&self) -> Option<bool> {
        match self {
            OracleVerdict::Tu => Some(true),
            OracleVerdict::NotTu(_) => Some(false),
            OracleVerdict::Timeout { .. } => None,
        }
    }
}

/// Determinant by fraction-free elimination in i64. Callers keep orders small.
pub fn det_i64(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    if n == 0 {
        return 1;
    }
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let mut sign = 1i64;
    let mut prev = 1i64;
    for k in 0..n - 1 {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&i| m[i][k] != 0) else {
                return 0;
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

/// Exact determinant by fraction-free elimination over big integers.
pub fn det_big(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Determinant of a ternary matrix (exact, any order).
pub fn det_ternary(a: &TernaryMatrix) -> BigInt {
    let rows: Vec<Vec<BigInt>> = (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| BigInt::from(a.get(i, j))).collect())
        .collect();
    det_big(&rows)
}

pub const BRUTE_FORCE_GUARD: usize = 28;

/// Checks every square submatrix; the witness is the first offender by order, then lexicographically.
pub fn brute_force_tu(a: &TernaryMatrix) -> Result<OracleVerdict, Error> {
    brute_force_tu_guarded(a, BRUTE_FORCE_GUARD)
}

pub fn brute_force_tu_guarded(a: &TernaryMatrix, guard: usize) -> Result<OracleVerdict, Error> {
    let (m, n) = (a.nrows(), a.ncols());
    if m + n > guard {
        return Err(Error::TooLarge(format!("m + n = {} exceeds {}", m + n, guard)));
    }
    let dense = a.to_rows();
    for k in 1..=m.min(n) {
        for rs in (0..m).combinations(k) {
            for cs in (0..n).combinations(k) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&i| cs.iter().map(|&j| dense[i][j]).collect()).collect();
                let d = det_i64(&sub);
                if d.abs() > 1 {
                    return Ok(OracleVerdict::NotTu(Witness {
                        rows: rs.iter().map(|&i| a.row_labels()[i]).collect(),
                        cols: cs.iter().map(|&j| a.col_labels()[j]).collect(),
                        det: Some(d),
                    }));
                }
            }
        }
    }
    Ok(OracleVerdict::Tu)
}

struct Clock {
    start: Instant,
    budget: Option<Duration>,
    ticks: u32,
}

impl Clock {
    fn new(budget: Option<Duration>) -> Self {
        Clock { start: Instant::now(), budget, ticks: 0 }
    }

    #[inline]
    fn expired(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 1024 != 0 {
            return false;
        }
        self.budget.is_some_and(|b| self.start.elapsed() >= b)
    }
}

/// Camion's criterion over square submatrices in increasing order.
pub fn st_camion(a: &TernaryMatrix, budget: Option<Duration>) -> OracleVerdict {
    let (m, n) = (a.nrows(), a.ncols());
    let dense = a.to_rows();
    let mut clock = Clock::new(budget);
    for k in 1..=m.min(n) {
        for rs in (0..m).combinations(k) {
            // only columns with an even count inside the chosen rows can take part
            let eligible: Vec<usize> = (0..n)
                .filter(|&j| rs.iter().filter(|&&i| dense[i][j] != 0).count() % 2 == 0)
                .collect();
            if clock.expired() {
                return OracleVerdict::Timeout { order: k };
            }
            if eligible.len() < k {
                continue;
            }
            for cs in eligible.iter().copied().combinations(k) {
                if clock.expired() {
                    return OracleVerdict::Timeout { order: k };
                }
                let mut total = 0i64;
                let mut even = true;
                for &i in &rs {
                    let mut cnt = 0;
                    for &j in &cs {
                        let v = dense[i][j];
                        if v != 0 {
                            cnt += 1;
                            total += v;
                        }
                    }
                    if cnt % 2 != 0 {
                        even = false;
                        break;
                    }
                }
                if even && total.rem_euclid(4) != 0 {
                    return OracleVerdict::NotTu(Witness {
                        rows: rs.iter().map(|&i| a.row_labels()[i]).collect(),
                        cols: cs.iter().map(|&j| a.col_labels()[j]).collect(),
                        det: None,
                    });
                }
            }
        }
    }
    OracleVerdict::Tu
}

/// Ghouila-Houri criterion over column subsets in increasing size.
pub fn ce_ghouila_houri(a: &TernaryMatrix, budget: Option<Duration>) -> OracleVerdict {
    let (m, n) = (a.nrows(), a.ncols());
    let cols: Vec<Vec<i64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j) as i64).collect()).collect();
    let mut clock = Clock::new(budget);
    let mut sums = vec![0i64; m];
    for k in 1..=n {
        for cs in (0..n).combinations(k) {
            // x starts at all +1; the first component stays +1
            for s in sums.iter_mut() {
                *s = 0;
            }
            for &j in &cs {
                for i in 0..m {
                    sums[i] += cols[j][i];
                }
            }
            let mut x = vec![1i64; k];
            let mut found = sums.iter().all(|s| s.abs() <= 1);
            let mut g: u64 = 0;
            let total: u64 = 1u64 << (k - 1);
            while !found && g + 1 < total {
                if clock.expired() {
                    return OracleVerdict::Timeout { order: k };
                }
                g += 1;
                // Gray code step over components 1..k
                let bit = g.trailing_zeros() as usize + 1;
                let j = cs[bit];
                x[bit] = -x[bit];
                let f = 2 * x[bit];
                for i in 0..m {
                    sums[i] += f * cols[j][i];
                }
                found = sums.iter().all(|s| s.abs() <= 1);
            }
            if clock.expired() {
                return OracleVerdict::Timeout { order: k };
            }
            if !found {
                return OracleVerdict::NotTu(Witness {
                    rows: Vec::new(),
                    cols: cs.iter().map(|&j| a.col_labels()[j]).collect(),
                    det: None,
                });
            }
        }
    }
    OracleVerdict::Tu
}

pub const GRAPHIC_GUARD: usize = 16;

/// Exhaustive search for a tree on `m + 1` vertices in which every column's support is a path.
pub fn brute_force_graphic(b: &BinaryMatrix) -> Result<Option<RealizationGraph>, Error> {
    if b.length() > GRAPHIC_GUARD {
        return Err(Error::TooLarge(format!("s(B) = {} exceeds {}", b.length(), GRAPHIC_GUARD)));
    }
    let m = b.nrows();
    let n = b.ncols();
    let nv = m + 1;
    // place rows sharing columns close together to prune early
    let mut order: Vec<usize> = Vec::new();
    let mut used = vec![false; m];
    while order.len() < m {
        let next = (0..m)
            .filter(|&i| !used[i])
            .max_by_key(|&i| {
                let shared = order.iter().filter(|&&o| b.row(o).intersects(b.row(i))).count();
                (shared, std::cmp::Reverse(i))
            })
            .unwrap();
        used[next] = true;
        order.push(next);
    }
    let mut st = Search {
        b,
        order: &order,
        ends: vec![(0, 0); m],
        dsu: (0..nv).collect(),
        deg: vec![vec![0u8; nv]; n],
    };
    if !st.place(0, 0) {
        return Ok(None);
    }
    let tree: Vec<GraphEdge> = (0..m)
        .map(|i| GraphEdge { label: b.row_labels()[i], u: st.ends[i].0, v: st.ends[i].1 })
        .collect();
    let mut cotree = Vec::new();
    for j in 0..n {
        let ones: Vec<usize> = (0..nv).filter(|&v| st.deg[j][v] == 1).collect();
        let (u, v) = if ones.is_empty() { (0, 0) } else { (ones[0], ones[1]) };
        cotree.push(GraphEdge { label: b.col_labels()[j], u, v });
    }
    Ok(Some(RealizationGraph { vertices: nv, tree, cotree }))
}

struct Search<'a> {
    b: &'a BinaryMatrix,
    order: &'a [usize],
    ends: Vec<(usize, usize)>,
    dsu: Vec<usize>,
    deg: Vec<Vec<u8>>,
}

impl Search<'_> {
    fn find(&self, mut x: usize) -> usize {
        while self.dsu[x] != x {
            x = self.dsu[x];
        }
        x
    }

    /// `fresh` is the smallest vertex not yet touched.
    fn place(&mut self, k: usize, fresh: usize) -> bool {
        if k == self.order.len() {
            return self.all_paths();
        }
        let row = self.order[k];
        let nv = self.dsu.len();
        let cols: Vec<usize> = self.b.row(row).ones().collect();
        for v in 1..=(fresh + 1).min(nv - 1) {
            for u in 0..v {
                // vertices are numbered in order of first use
                if v == fresh + 1 && u != fresh {
                    continue;
                }
                let (ru, rv) = (self.find(u), self.find(v));
                if ru == rv {
                    continue;
                }
                if cols.iter().any(|&j| self.deg[j][u] >= 2 || self.deg[j][v] >= 2) {
                    continue;
                }
                for &j in &cols {
                    self.deg[j][u] += 1;
                    self.deg[j][v] += 1;
                }
                self.dsu[ru] = rv;
                self.ends[row] = (u, v);
                let nf = fresh.max(v + 1).min(nv);
                if self.place(k + 1, nf) {
                    return true;
                }
                self.dsu[ru] = ru;
                for &j in &cols {
                    self.deg[j][u] -= 1;
                    self.deg[j][v] -= 1;
                }
            }
        }
        false
    }

    fn all_paths(&self) -> bool {
        (0..self.b.ncols()).all(|j| {
            let d = &self.deg[j];
            let leaves = d.iter().filter(|&&x| x == 1).count();
            let touched = d.iter().filter(|&&x| x > 0).count();
            let edges = self.b.col(j).count_ones();
            edges == 0 || (leaves == 2 && touched == edges + 1)
        })
    }
}

/// Rational helper used by several tests: |det| of an integer matrix.
pub fn abs_det(a: &[Vec<i64>]) -> BigInt {
    let rows: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    det_big(&rows).abs()
}
