//! Unimodularity and strong unimodularity through a column basis C: the gcd
//! of the maximal minors of C (via Smith normal form) and total
//! unimodularity of the solution X of CX = A.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::engine::is_totally_unimodular;
use crate::error::Error;
use crate::matrix::TernaryMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    m: usize,
    n: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(m: usize, n: usize) -> Self {
        IntegerMatrix { m, n, data: vec![BigInt::zero(); m * n] }
    }

    pub fn from_rows<T: Clone + Into<BigInt>>(rows: &[Vec<T>]) -> Result<Self, Error> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut out = Self::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Input(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
            }
            for (j, x) in r.iter().enumerate() {
                out.data[i * n + j] = x.clone().into();
            }
        }
        Ok(out)
    }

    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.n + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.m).map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n, self.m);
        for i in 0..self.m {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.m, cols.len());
        for i in 0..self.m {
            for (k, &j) in cols.iter().enumerate() {
                out.set(i, k, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// The ternary matrix with the same entries, if all lie in {0, ±1}.
    pub fn to_ternary(&self) -> Option<TernaryMatrix> {
        let mut t = TernaryMatrix::zeros(self.m, self.n);
        for i in 0..self.m {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v.abs() > BigInt::one() {
                    return None;
                }
                t.set(i, j, if v.is_zero() { 0 } else if v.is_positive() { 1 } else { -1 });
            }
        }
        Some(t)
    }
}

impl From<&TernaryMatrix> for IntegerMatrix {
    fn from(a: &TernaryMatrix) -> Self {
        let mut out = IntegerMatrix::zeros(a.nrows(), a.ncols());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                out.set(i, j, BigInt::from(a.get(i, j)));
            }
        }
        out
    }
}

/// Fraction-free elimination; returns the pivot columns, leftmost first.
fn pivot_columns(a: &IntegerMatrix) -> Vec<usize> {
    let mut w = a.to_rows();
    let m = a.nrows();
    let mut prev = BigInt::one();
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..a.ncols() {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&i| !w[i][col].is_zero()) else {
            continue;
        };
        w.swap(row, p);
        let piv = w[row][col].clone();
        for i in row + 1..m {
            let f = w[i][col].clone();
            for j in col..a.ncols() {
                let v = (&piv * &w[i][j] - &f * &w[row][j]) / &prev;
                w[i][j] = v;
            }
        }
        prev = piv;
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(a: &IntegerMatrix) -> usize {
    pivot_columns(a).len()
}

/// Leftmost maximal set of linearly independent columns; empty for the zero matrix.
pub fn select_column_basis(a: &IntegerMatrix) -> (IntegerMatrix, Vec<usize>) {
    let cols = pivot_columns(a);
    (a.columns(&cols), cols)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// Nonzero invariant factors, each dividing the next.
    pub factors: Vec<BigInt>,
    pub rank: usize,
}

pub fn smith_normal_form(a: &IntegerMatrix) -> SnfResult {
    let mut w = a.to_rows();
    let (m, n) = (a.nrows(), a.ncols());
    let mut factors = Vec::new();
    let mut k = 0;
    while k < m.min(n) {
        // smallest nonzero entry of the trailing block
        let Some((pi, pj)) = (k..m)
            .flat_map(|i| (k..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !w[i][j].is_zero())
            .min_by_key(|&(i, j)| w[i][j].abs())
        else {
            break;
        };
        w.swap(k, pi);
        for r in w.iter_mut() {
            r.swap(k, pj);
        }
        loop {
            let mut dirty = false;
            for i in k + 1..m {
                let q = w[i][k].div_floor(&w[k][k]);
                if !q.is_zero() {
                    for j in k..n {
                        let v = &w[i][j] - &q * &w[k][j];
                        w[i][j] = v;
                    }
                }
                if !w[i][k].is_zero() {
                    dirty = true;
                }
            }
            for j in k + 1..n {
                let q = w[k][j].div_floor(&w[k][k]);
                if !q.is_zero() {
                    for r in w.iter_mut().skip(k) {
                        let v = &r[j] - &q * &r[k];
                        r[j] = v;
                    }
                }
                if !w[k][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // enforce divisibility of the remaining block
                let bad = (k + 1..m).find(|&i| (k + 1..n).any(|j| !(&w[i][j] % &w[k][k]).is_zero()));
                match bad {
                    Some(i) => {
                        for j in k..n {
                            let v = &w[k][j] + &w[i][j];
                            w[k][j] = v;
                        }
                    }
                    None => break,
                }
            }
            // move the smallest nonzero of row k / column k to the corner
            let best_row = (k..m).filter(|&i| !w[i][k].is_zero()).min_by_key(|&i| w[i][k].abs());
            let best_col = (k..n).filter(|&j| !w[k][j].is_zero()).min_by_key(|&j| w[k][j].abs());
            match (best_row, best_col) {
                (Some(i), Some(j)) => {
                    if w[i][k].abs() <= w[k][j].abs() {
                        w.swap(k, i);
                    } else {
                        for r in w.iter_mut() {
                            r.swap(k, j);
                        }
                    }
                }
                (Some(i), None) => w.swap(k, i),
                (None, Some(j)) => {
                    for r in w.iter_mut() {
                        r.swap(k, j);
                    }
                }
                (None, None) => unreachable!("corner entry is nonzero"),
            }
        }
        factors.push(w[k][k].abs());
        k += 1;
    }
    let rank = factors.len();
    SnfResult { factors, rank }
}

/// True iff the gcd of all r×r minors of the full-column-rank matrix `c` is 1.
pub fn gcd_maximal_minors_is_one(c: &IntegerMatrix) -> Result<bool, Error> {
    let snf = smith_normal_form(c);
    if snf.rank != c.ncols() {
        return Err(Error::Precondition("matrix does not have full column rank".into()));
    }
    Ok(snf.factors.iter().all(|f| f.is_one()))
}

/// Exact solution X of CX = A for a full-column-rank C spanning A's columns.
pub fn solve_basis_system(c: &IntegerMatrix, a: &IntegerMatrix) -> Result<Vec<Vec<BigRational>>, Error> {
    if c.nrows() != a.nrows() {
        return Err(Error::Input("C and A have different row counts".into()));
    }
    let r = c.ncols();
    // independent rows of C
    let rows = pivot_columns(&c.transpose());
    if rows.len() != r {
        return Err(Error::Precondition("C does not have full column rank".into()));
    }
    let q = |x: &BigInt| BigRational::from_integer(x.clone());
    // augmented [C_R | A_R], Gauss-Jordan over the rationals
    let mut w: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|&i| (0..r).map(|j| q(c.get(i, j))).chain((0..a.ncols()).map(|j| q(a.get(i, j)))).collect())
        .collect();
    for k in 0..r {
        let p = (k..r).find(|&i| !w[i][k].is_zero()).expect("nonsingular");
        w.swap(k, p);
        let inv = w[k][k].recip();
        for x in w[k].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..r {
            if i != k && !w[i][k].is_zero() {
                let f = w[i][k].clone();
                let pivot_row = w[k].clone();
                for (x, y) in w[i].iter_mut().zip(pivot_row.iter()) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    let x: Vec<Vec<BigRational>> = w.into_iter().map(|row| row[r..].to_vec()).collect();
    // check C X = A on all rows
    for i in 0..c.nrows() {
        for j in 0..a.ncols() {
            let s: BigRational = (0..r).map(|k| q(c.get(i, k)) * &x[k][j]).sum();
            if s != q(a.get(i, j)) {
                return Err(Error::Precondition("columns of A are not spanned by C".into()));
            }
        }
    }
    Ok(x)
}

pub fn is_unimodular(a: &IntegerMatrix) -> Result<bool, Error> {
    let (c, _) = select_column_basis(a);
    if c.ncols() == 0 {
        return Ok(true);
    }
    if !gcd_maximal_minors_is_one(&c)? {
        return Ok(false);
    }
    let x = solve_basis_system(&c, a)?;
    let mut t = TernaryMatrix::zeros(x.len(), a.ncols());
    for (i, row) in x.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_integer() || v.numer().abs() > BigInt::one() {
                return Ok(false);
            }
            t.set(i, j, if v.is_zero() { 0 } else if v.is_positive() { 1 } else { -1 });
        }
    }
    Ok(is_totally_unimodular(&t, false)?.tu)
}

pub fn is_strongly_unimodular(a: &IntegerMatrix) -> Result<bool, Error> {
    Ok(is_unimodular(a)? && is_unimodular(&a.transpose())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use proptest::prelude::*;

    fn im(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn det(a: &IntegerMatrix, rows: &[usize], cols: &[usize]) -> BigInt {
        let sub: Vec<Vec<BigInt>> = rows.iter().map(|&i| cols.iter().map(|&j| a.get(i, j).clone()).collect()).collect();
        crate::oracles::det_big(&sub)
    }

    /// Definition: every column basis has maximal minors with gcd 1 (or all in {0, ±1} when strong).
    fn definition_oracle(a: &IntegerMatrix, strong: bool) -> bool {
        let r = rank(a);
        if r == 0 {
            return true;
        }
        for cols in (0..a.ncols()).combinations(r) {
            let minors: Vec<BigInt> = (0..a.nrows()).combinations(r).map(|rows| det(a, &rows, &cols)).collect();
            if minors.iter().all(|d| d.is_zero()) {
                continue;
            }
            if strong {
                if minors.iter().any(|d| d.abs() > BigInt::one()) {
                    return false;
                }
            } else {
                let g = minors.iter().fold(BigInt::zero(), |g, d| g.gcd(d));
                if !g.is_one() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn basis_examples() {
        let id = im(&[&[1, 0], &[0, 1]]);
        assert_eq!(select_column_basis(&id).1, vec![0, 1]);
        assert_eq!(select_column_basis(&im(&[&[1, 2], &[2, 4]])).1, vec![0]);
        assert_eq!(select_column_basis(&im(&[&[2, 1], &[1, 1]])).1, vec![0, 1]);
        assert!(select_column_basis(&IntegerMatrix::zeros(2, 3)).1.is_empty());
    }

    #[test]
    fn snf_examples() {
        assert_eq!(smith_normal_form(&im(&[&[1, 0], &[0, 1]])).factors, big(&[1, 1]));
        assert_eq!(smith_normal_form(&im(&[&[2, 0], &[0, 3]])).factors, big(&[1, 6]));
        let s = smith_normal_form(&im(&[&[2, 4], &[2, 4]]));
        assert_eq!((s.factors, s.rank), (big(&[2]), 1));
    }

    #[test]
    fn minor_gcd_examples() {
        assert!(gcd_maximal_minors_is_one(&im(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!gcd_maximal_minors_is_one(&im(&[&[2]])).unwrap());
        assert!(gcd_maximal_minors_is_one(&im(&[&[1, 0], &[0, 2], &[0, 1]])).unwrap());
        assert!(gcd_maximal_minors_is_one(&im(&[&[1, 2], &[2, 4]])).is_err());
    }

    #[test]
    fn solve_examples() {
        let a = im(&[&[2, 1, 1], &[1, 1, 0]]);
        let (c, cols) = select_column_basis(&a);
        assert_eq!(cols, vec![0, 1]);
        let x = solve_basis_system(&c, &a).unwrap();
        let want = [[1, 0, 1], [0, 1, -1]];
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(x[i][j], BigRational::from_integer(BigInt::from(want[i][j])));
            }
        }
        let id = im(&[&[1, 0], &[0, 1]]);
        let x = solve_basis_system(&id, &a).unwrap();
        assert_eq!(x[0][0], BigRational::from_integer(BigInt::from(2)));
    }

    #[test]
    fn unimodular_examples() {
        assert!(is_unimodular(&im(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!is_unimodular(&im(&[&[2]])).unwrap());
        assert!(is_unimodular(&im(&[&[2, 1], &[1, 1]])).unwrap());
        assert!(is_strongly_unimodular(&im(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!is_strongly_unimodular(&im(&[&[2]])).unwrap());
        assert!(is_unimodular(&IntegerMatrix::zeros(2, 2)).unwrap());
    }

    fn arb_int(max_sum: usize) -> impl Strategy<Value = IntegerMatrix> {
        (1..max_sum, 1..max_sum)
            .prop_filter("size", move |(m, n)| m + n <= max_sum)
            .prop_flat_map(|(m, n)| {
                proptest::collection::vec(proptest::collection::vec(-3i64..=3, n), m)
                    .prop_map(|rows| IntegerMatrix::from_rows(&rows).unwrap())
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_definition(a in arb_int(8)) {
            prop_assert_eq!(is_unimodular(&a).unwrap(), definition_oracle(&a, false));
            prop_assert_eq!(is_strongly_unimodular(&a).unwrap(), definition_oracle(&a, true));
        }

        #[test]
        fn snf_matches_minor_gcds(a in arb_int(8)) {
            let s = smith_normal_form(&a);
            prop_assert_eq!(s.rank, rank(&a));
            let mut prod = BigInt::one();
            for (i, f) in s.factors.iter().enumerate() {
                if i > 0 {
                    prop_assert!((f % &s.factors[i - 1]).is_zero());
                }
                prod *= f;
                let k = i + 1;
                let g = (0..a.nrows()).combinations(k)
                    .flat_map(|r| (0..a.ncols()).combinations(k).map(move |c| (r.clone(), c)))
                    .fold(BigInt::zero(), |g, (r, c)| g.gcd(&det(&a, &r, &c)));
                prop_assert_eq!(&prod, &g);
            }
        }

        #[test]
        fn strong_implies_unimodular(a in arb_int(8)) {
            if is_strongly_unimodular(&a).unwrap() {
                prop_assert!(is_unimodular(&a).unwrap());
            }
        }
    }
}
