//! Labeled ternary and binary matrices, GF(2) pivots, rank, and simplification.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{rank_of, Bits};
use crate::error::Error;

const COL_BIT: u32 = 1 << 31;

/// Ground-set element id. Rows of an input matrix are `r1..rm`, columns `c1..cn`.
/// A label keeps its identity when a pivot moves it between rows and columns.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u32);

impl Label {
    pub fn row(i: usize) -> Label {
        Label(i as u32)
    }

    pub fn col(j: usize) -> Label {
        Label(COL_BIT | j as u32)
    }

    /// True if the label originated as a column of the input.
    pub fn is_original_col(self) -> bool {
        self.0 & COL_BIT != 0
    }

    /// Zero-based index within the original rows or columns.
    pub fn index(self) -> usize {
        (self.0 & !COL_BIT) as usize
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_original_col() {
            write!(f, "c{}", self.index() + 1)
        } else {
            write!(f, "r{}", self.index() + 1)
        }
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Input(format!("bad label {s:?}"));
        let (kind, num) = s.split_at_checked(1).ok_or_else(bad)?;
        let k: usize = num.parse().map_err(|_| bad())?;
        if k == 0 || k > (COL_BIT - 1) as usize {
            return Err(bad());
        }
        match kind {
            "r" => Ok(Label::row(k - 1)),
            "c" => Ok(Label::col(k - 1)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn default_row_labels(m: usize) -> Vec<Label> {
    (0..m).map(Label::row).collect()
}

fn default_col_labels(n: usize) -> Vec<Label> {
    (0..n).map(Label::col).collect()
}

/// Read access shared by ternary and binary matrices.
pub trait Entries {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn entry(&self, i: usize, j: usize) -> i8;
}

/// Dense {0, ±1} matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TernaryMatrix {
    m: usize,
    n: usize,
    data: Vec<i8>,
    row_labels: Vec<Label>,
    col_labels: Vec<Label>,
}

impl TernaryMatrix {
    pub fn zeros(m: usize, n: usize) -> Self {
        TernaryMatrix {
            m,
            n,
            data: vec![0; m * n],
            row_labels: default_row_labels(m),
            col_labels: default_col_labels(n),
        }
    }

    /// Builds from integer rows; fails on ragged rows or entries outside {0, ±1}.
    pub fn from_rows<T: Copy + Into<i64>>(rows: &[Vec<T>]) -> Result<Self, Error> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut a = TernaryMatrix::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Input(format!(
                    "row {} has {} entries, expected {}",
                    i + 1,
                    r.len(),
                    n
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                let v: i64 = v.into();
                if !(-1..=1).contains(&v) {
                    return Err(Error::EntryOutOfRange {
                        row: i,
                        col: j,
                        value: v.to_string(),
                    });
                }
                a.data[i * n + j] = v as i8;
            }
        }
        Ok(a)
    }

    pub fn with_labels(mut self, rows: Vec<Label>, cols: Vec<Label>) -> Self {
        assert_eq!(rows.len(), self.m);
        assert_eq!(cols.len(), self.n);
        self.row_labels = rows;
        self.col_labels = cols;
        self
    }

    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i8) {
        debug_assert!((-1..=1).contains(&v));
        self.data[i * self.n + j] = v;
    }

    pub fn row_labels(&self) -> &[Label] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[Label] {
        &self.col_labels
    }

    pub fn row_index(&self, l: Label) -> Option<usize> {
        self.row_labels.iter().position(|&x| x == l)
    }

    pub fn col_index(&self, l: Label) -> Option<usize> {
        self.col_labels.iter().position(|&x| x == l)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.m)
            .map(|i| (0..self.n).map(|j| self.get(i, j) as i64).collect())
            .collect()
    }

    pub fn transpose(&self) -> TernaryMatrix {
        let mut t = TernaryMatrix::zeros(self.n, self.m);
        for i in 0..self.m {
            for j in 0..self.n {
                t.data[j * self.m + i] = self.get(i, j);
            }
        }
        t.row_labels = self.col_labels.clone();
        t.col_labels = self.row_labels.clone();
        t
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> TernaryMatrix {
        let mut s = TernaryMatrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                s.data[a * cols.len() + b] = self.get(i, j);
            }
        }
        s.row_labels = rows.iter().map(|&i| self.row_labels[i]).collect();
        s.col_labels = cols.iter().map(|&j| self.col_labels[j]).collect();
        s
    }

    /// Submatrix by labels; panics if a label is absent.
    pub fn submatrix_by_labels(&self, rows: &[Label], cols: &[Label]) -> TernaryMatrix {
        let ri: Vec<usize> = rows.iter().map(|&l| self.row_index(l).expect("row label")).collect();
        let ci: Vec<usize> = cols.iter().map(|&l| self.col_index(l).expect("col label")).collect();
        self.submatrix(&ri, &ci)
    }

    /// Binary support: every ±1 becomes 1.
    pub fn support(&self) -> BinaryMatrix {
        let mut b = BinaryMatrix::zeros_labeled(self.row_labels.clone(), self.col_labels.clone());
        for i in 0..self.m {
            for j in 0..self.n {
                if self.get(i, j) != 0 {
                    b.set(i, j, true);
                }
            }
        }
        b
    }

    pub fn nonzeros(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }
}

impl Entries for TernaryMatrix {
    fn nrows(&self) -> usize {
        self.m
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn entry(&self, i: usize, j: usize) -> i8 {
        self.get(i, j)
    }
}

impl fmt::Debug for TernaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "TernaryMatrix {}x{} rows={:?} cols={:?}", self.m, self.n, self.row_labels, self.col_labels)?;
        for i in 0..self.m {
            let row: Vec<String> = (0..self.n).map(|j| format!("{:>2}", self.get(i, j))).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Dense GF(2) matrix with row bitsets and column bitsets kept in sync.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: Vec<Bits>,
    cols: Vec<Bits>,
    row_labels: Vec<Label>,
    col_labels: Vec<Label>,
}

impl BinaryMatrix {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self::zeros_labeled(default_row_labels(m), default_col_labels(n))
    }

    pub fn zeros_labeled(row_labels: Vec<Label>, col_labels: Vec<Label>) -> Self {
        let m = row_labels.len();
        let n = col_labels.len();
        BinaryMatrix {
            rows: vec![Bits::zeros(n); m],
            cols: vec![Bits::zeros(m); n],
            row_labels,
            col_labels,
        }
    }

    /// Builds from 0/1 rows with default labels. Nonzero entries count as 1.
    pub fn from_rows<T: Copy + Into<i64>>(rows: &[Vec<T>]) -> Self {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        let mut b = BinaryMatrix::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                if v.into() != 0 {
                    b.set(i, j, true);
                }
            }
        }
        b
    }

    pub fn with_labels(mut self, rows: Vec<Label>, cols: Vec<Label>) -> Self {
        assert_eq!(rows.len(), self.nrows());
        assert_eq!(cols.len(), self.ncols());
        self.row_labels = rows;
        self.col_labels = cols;
        self
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    /// Length s(B) = m + n.
    pub fn length(&self) -> usize {
        self.nrows() + self.ncols()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.rows[i].set(j, v);
        self.cols[j].set(i, v);
    }

    #[inline]
    pub fn row(&self, i: usize) -> &Bits {
        &self.rows[i]
    }

    #[inline]
    pub fn col(&self, j: usize) -> &Bits {
        &self.cols[j]
    }

    pub fn row_labels(&self) -> &[Label] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[Label] {
        &self.col_labels
    }

    pub fn row_index(&self, l: Label) -> Option<usize> {
        self.row_labels.iter().position(|&x| x == l)
    }

    pub fn col_index(&self, l: Label) -> Option<usize> {
        self.col_labels.iter().position(|&x| x == l)
    }

    /// Label to (is_row, index) map.
    pub fn label_positions(&self) -> HashMap<Label, (bool, usize)> {
        let mut map = HashMap::with_capacity(self.length());
        for (i, &l) in self.row_labels.iter().enumerate() {
            map.insert(l, (true, i));
        }
        for (j, &l) in self.col_labels.iter().enumerate() {
            map.insert(l, (false, j));
        }
        map
    }

    pub fn count_ones(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    pub fn transpose(&self) -> BinaryMatrix {
        BinaryMatrix {
            rows: self.cols.clone(),
            cols: self.rows.clone(),
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> BinaryMatrix {
        let new_rows: Vec<Bits> = rows.iter().map(|&i| self.rows[i].select(cols)).collect();
        let new_cols: Vec<Bits> = cols.iter().map(|&j| self.cols[j].select(rows)).collect();
        BinaryMatrix {
            rows: new_rows,
            cols: new_cols,
            row_labels: rows.iter().map(|&i| self.row_labels[i]).collect(),
            col_labels: cols.iter().map(|&j| self.col_labels[j]).collect(),
        }
    }

    /// Submatrix by labels; `None` if some label is not a row (resp. column).
    pub fn submatrix_by_labels(&self, rows: &[Label], cols: &[Label]) -> Option<BinaryMatrix> {
        let pos = self.label_positions();
        let mut ri = Vec::with_capacity(rows.len());
        for l in rows {
            match pos.get(l) {
                Some(&(true, i)) => ri.push(i),
                _ => return None,
            }
        }
        let mut ci = Vec::with_capacity(cols.len());
        for l in cols {
            match pos.get(l) {
                Some(&(false, j)) => ci.push(j),
                _ => return None,
            }
        }
        Some(self.submatrix(&ri, &ci))
    }

    /// In-place GF(2) pivot on the 1-entry at (x, y) by index.
    pub fn pivot_at(&mut self, x: usize, y: usize) -> Result<(), Error> {
        if !self.get(x, y) {
            return Err(Error::Precondition(format!(
                "pivot on zero entry ({}, {})",
                self.row_labels[x], self.col_labels[y]
            )));
        }
        let rx = self.rows[x].clone();
        let cy = self.cols[y].clone();
        for i in cy.ones() {
            if i != x {
                self.rows[i].xor_assign(&rx);
                self.rows[i].set(y, true);
            }
        }
        for j in rx.ones() {
            if j != y {
                self.cols[j].xor_assign(&cy);
                self.cols[j].set(x, true);
            }
        }
        std::mem::swap(&mut self.row_labels[x], &mut self.col_labels[y]);
        Ok(())
    }

    /// Pivot by labels, returning a new matrix.
    pub fn pivot_binary(&self, x: Label, y: Label) -> Result<BinaryMatrix, Error> {
        let i = self
            .row_index(x)
            .ok_or_else(|| Error::Precondition(format!("{x} is not a row label")))?;
        let j = self
            .col_index(y)
            .ok_or_else(|| Error::Precondition(format!("{y} is not a column label")))?;
        let mut b = self.clone();
        b.pivot_at(i, j)?;
        Ok(b)
    }

    pub fn rank(&self) -> usize {
        if self.nrows() <= self.ncols() {
            rank_of(self.rows.clone())
        } else {
            rank_of(self.cols.clone())
        }
    }

    /// Rank of the submatrix on the given row indices restricted to a column mask.
    pub fn rank_masked(&self, rows: impl IntoIterator<Item = usize>, col_mask: &Bits) -> usize {
        rank_of(rows.into_iter().map(|i| self.rows[i].and(col_mask)).collect())
    }

    /// Deletes the listed rows and columns (indices), keeping order.
    pub fn delete(&self, del_rows: &[usize], del_cols: &[usize]) -> BinaryMatrix {
        let mut dr = vec![false; self.nrows()];
        for &i in del_rows {
            dr[i] = true;
        }
        let mut dc = vec![false; self.ncols()];
        for &j in del_cols {
            dc[j] = true;
        }
        let keep_r: Vec<usize> = (0..self.nrows()).filter(|&i| !dr[i]).collect();
        let keep_c: Vec<usize> = (0..self.ncols()).filter(|&j| !dc[j]).collect();
        self.submatrix(&keep_r, &keep_c)
    }
}

impl Entries for BinaryMatrix {
    fn nrows(&self) -> usize {
        self.rows.len()
    }
    fn ncols(&self) -> usize {
        self.cols.len()
    }
    fn entry(&self, i: usize, j: usize) -> i8 {
        self.get(i, j) as i8
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BinaryMatrix {}x{} rows={:?} cols={:?}",
            self.nrows(),
            self.ncols(),
            self.row_labels,
            self.col_labels
        )?;
        for r in &self.rows {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

/// GF(2) rank of a matrix or of a selection of it.
pub fn rank_gf2(b: &BinaryMatrix, rows: Option<&[usize]>, cols: Option<&[usize]>) -> usize {
    match (rows, cols) {
        (None, None) => b.rank(),
        _ => {
            let all_r: Vec<usize>;
            let r = match rows {
                Some(r) => r,
                None => {
                    all_r = (0..b.nrows()).collect();
                    &all_r
                }
            };
            let mask = match cols {
                Some(c) => Bits::from_indices(b.ncols(), c.iter().copied()),
                None => Bits::from_indices(b.ncols(), 0..b.ncols()),
            };
            b.rank_masked(r.iter().copied(), &mask)
        }
    }
}

/// Row and column permutation proxy; swaps touch only the permutation arrays.
#[derive(Clone, Debug)]
pub struct PermutedView<'a, M: Entries> {
    target: &'a M,
    row_perm: Vec<usize>,
    col_perm: Vec<usize>,
    transposed: bool,
}

impl<'a, M: Entries> PermutedView<'a, M> {
    pub fn new(target: &'a M) -> Self {
        PermutedView {
            target,
            row_perm: (0..target.nrows()).collect(),
            col_perm: (0..target.ncols()).collect(),
            transposed: false,
        }
    }

    pub fn nrows(&self) -> usize {
        if self.transposed {
            self.col_perm.len()
        } else {
            self.row_perm.len()
        }
    }

    pub fn ncols(&self) -> usize {
        if self.transposed {
            self.row_perm.len()
        } else {
            self.col_perm.len()
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        if self.transposed {
            self.target.entry(self.row_perm[j], self.col_perm[i])
        } else {
            self.target.entry(self.row_perm[i], self.col_perm[j])
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if self.transposed {
            self.col_perm.swap(a, b);
        } else {
            self.row_perm.swap(a, b);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if self.transposed {
            self.row_perm.swap(a, b);
        } else {
            self.col_perm.swap(a, b);
        }
    }

    pub fn transpose(&mut self) {
        self.transposed = !self.transposed;
    }

    pub fn materialize(&self) -> Vec<Vec<i8>> {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

/// Partition (X1, Y1 | X2, Y2) with D = B[X2, Y1] and E = B[X1, Y2].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separation {
    pub x1: Vec<Label>,
    pub y1: Vec<Label>,
    pub x2: Vec<Label>,
    pub y2: Vec<Label>,
    pub rank_d: usize,
    pub rank_e: usize,
}

impl Separation {
    /// Builds the separation of `b` with side 1 given by a predicate on labels.
    pub fn from_side(b: &BinaryMatrix, in_side1: impl Fn(Label) -> bool) -> Separation {
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        let mut c1 = Bits::zeros(b.ncols());
        let mut c2 = Bits::zeros(b.ncols());
        let (mut y1, mut y2) = (Vec::new(), Vec::new());
        for (i, &l) in b.row_labels().iter().enumerate() {
            if in_side1(l) {
                r1.push(i);
            } else {
                r2.push(i);
            }
        }
        for (j, &l) in b.col_labels().iter().enumerate() {
            if in_side1(l) {
                c1.set(j, true);
                y1.push(l);
            } else {
                c2.set(j, true);
                y2.push(l);
            }
        }
        let rank_d = b.rank_masked(r2.iter().copied(), &c1);
        let rank_e = b.rank_masked(r1.iter().copied(), &c2);
        Separation {
            x1: r1.iter().map(|&i| b.row_labels()[i]).collect(),
            y1,
            x2: r2.iter().map(|&i| b.row_labels()[i]).collect(),
            y2,
            rank_d,
            rank_e,
        }
    }

    pub fn k(&self) -> usize {
        self.rank_d + self.rank_e + 1
    }

    pub fn len1(&self) -> usize {
        self.x1.len() + self.y1.len()
    }

    pub fn len2(&self) -> usize {
        self.x2.len() + self.y2.len()
    }

    pub fn is_k_separation(&self, k: usize) -> bool {
        self.k() == k && self.len1() >= k && self.len2() >= k
    }

    pub fn is_deficient(&self, k: usize) -> bool {
        let (a, b) = (self.len1(), self.len2());
        self.k() == k && ((a + 1 == k && b >= k) || (b + 1 == k && a >= k))
    }

    /// (k|l)-separation: connectivity k with both sides of length at least l.
    pub fn is_kl(&self, k: usize, l: usize) -> bool {
        self.k() == k && self.len1() >= l && self.len2() >= l
    }

    /// Exchanges the two sides.
    pub fn swapped(&self) -> Separation {
        Separation {
            x1: self.x2.clone(),
            y1: self.y2.clone(),
            x2: self.x1.clone(),
            y2: self.y1.clone(),
            rank_d: self.rank_e,
            rank_e: self.rank_d,
        }
    }

    pub fn side1_contains(&self, l: Label) -> bool {
        self.x1.contains(&l) || self.y1.contains(&l)
    }
}

/// Components of BG(B) as (row indices, column indices), ordered by smallest member.
pub fn components_idx(b: &BinaryMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let m = b.nrows();
    let n = b.ncols();
    let mut row_seen = vec![false; m];
    let mut col_unseen = Bits::from_indices(n, 0..n);
    let mut out = Vec::new();
    let mut start_rows = 0..m;
    loop {
        let start = start_rows.by_ref().find(|&i| !row_seen[i]);
        let Some(s) = start else { break };
        let mut rs = vec![s];
        let mut cs = Vec::new();
        row_seen[s] = true;
        let mut k = 0;
        while k < rs.len() {
            let i = rs[k];
            k += 1;
            let fresh = b.row(i).and(&col_unseen);
            for j in fresh.ones() {
                col_unseen.set(j, false);
                cs.push(j);
                for i2 in b.col(j).ones() {
                    if !row_seen[i2] {
                        row_seen[i2] = true;
                        rs.push(i2);
                    }
                }
            }
        }
        rs.sort_unstable();
        cs.sort_unstable();
        out.push((rs, cs));
    }
    for j in col_unseen.ones() {
        out.push((Vec::new(), vec![j]));
    }
    out
}

/// Components of BG(B); zero rows and columns are singletons.
pub fn connected_components_bg(b: &BinaryMatrix) -> Vec<(Vec<Label>, Vec<Label>)> {
    components_idx(b)
        .into_iter()
        .map(|(r, c)| {
            (
                r.iter().map(|&i| b.row_labels()[i]).collect(),
                c.iter().map(|&j| b.col_labels()[j]).collect(),
            )
        })
        .collect()
}

pub fn is_connected(b: &BinaryMatrix) -> bool {
    components_idx(b).len() <= 1
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    Zero,
    Unit,
    DupRow,
    DupCol,
}

/// One deletion performed by [`make_simple`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reduction {
    pub kind: ReductionKind,
    pub is_row: bool,
    pub label: Label,
    /// The unit entry's partner or the kept duplicate.
    pub representative: Option<Label>,
}

/// Deletes zero, unit and duplicate lines until none remain.
pub fn make_simple(b: &BinaryMatrix) -> (BinaryMatrix, Vec<Reduction>) {
    make_simple_protected(b, &|_| false)
}

/// As [`make_simple`], but among duplicates a protected line is kept.
pub fn make_simple_protected(
    b: &BinaryMatrix,
    protected: &dyn Fn(Label) -> bool,
) -> (BinaryMatrix, Vec<Reduction>) {
    let mut cur = b.clone();
    let mut log = Vec::new();
    loop {
        let mut changed = false;
        for rows_phase in [true, false] {
            let work = if rows_phase { cur.clone() } else { cur.transpose() };
            let (del, mut entries) = reducible_rows(&work, protected, rows_phase);
            if !del.is_empty() {
                changed = true;
                log.append(&mut entries);
                let reduced = work.delete(&del, &[]);
                cur = if rows_phase { reduced } else { reduced.transpose() };
            }
        }
        if !changed {
            break;
        }
    }
    (cur, log)
}

fn reducible_rows(
    w: &BinaryMatrix,
    protected: &dyn Fn(Label) -> bool,
    is_row: bool,
) -> (Vec<usize>, Vec<Reduction>) {
    let mut del = Vec::new();
    let mut log = Vec::new();
    let mut seen: HashMap<&Bits, usize> = HashMap::new();
    for i in 0..w.nrows() {
        let r = w.row(i);
        let label = w.row_labels()[i];
        match r.count_ones() {
            0 => {
                del.push(i);
                log.push(Reduction { kind: ReductionKind::Zero, is_row, label, representative: None });
            }
            1 => {
                let j = r.first_one().unwrap();
                del.push(i);
                log.push(Reduction {
                    kind: ReductionKind::Unit,
                    is_row,
                    label,
                    representative: Some(w.col_labels()[j]),
                });
            }
            _ => {
                let kind = if is_row { ReductionKind::DupRow } else { ReductionKind::DupCol };
                match seen.get(r) {
                    None => {
                        seen.insert(r, i);
                    }
                    Some(&k) => {
                        let kl = w.row_labels()[k];
                        if protected(label) && !protected(kl) {
                            // keep the protected line as representative
                            seen.insert(r, i);
                            del.push(k);
                            log.push(Reduction { kind, is_row, label: kl, representative: Some(label) });
                        } else {
                            del.push(i);
                            log.push(Reduction { kind, is_row, label, representative: Some(kl) });
                        }
                    }
                }
            }
        }
    }
    del.sort_unstable();
    (del, log)
}

pub fn is_simple(b: &BinaryMatrix) -> bool {
    make_simple(b).1.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bm(rows: &[&[u8]]) -> BinaryMatrix {
        BinaryMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn identity(n: usize) -> BinaryMatrix {
        let mut b = BinaryMatrix::zeros(n, n);
        for i in 0..n {
            b.set(i, i, true);
        }
        b
    }

    #[test]
    fn rank_examples() {
        assert_eq!(identity(2).rank(), 2);
        assert_eq!(bm(&[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]]).rank(), 1);
        assert_eq!(bm(&[&[1, 1, 0], &[1, 0, 1], &[0, 1, 1]]).rank(), 2);
    }

    #[test]
    fn pivot_examples() {
        let b = bm(&[&[1, 1], &[1, 1]]);
        let p = b.pivot_binary(Label::row(0), Label::col(0)).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1, 1], vec![1, 0]]);
        assert_eq!(p.row_labels()[0], Label::col(0));
        assert_eq!(p.col_labels()[0], Label::row(0));

        let i = identity(3);
        let p = i.pivot_binary(Label::row(0), Label::col(0)).unwrap();
        assert_eq!(p.to_rows(), i.to_rows());
        assert_eq!(p.row_labels()[0], Label::col(0));

        let z = bm(&[&[0, 1], &[1, 1]]);
        assert!(z.pivot_binary(Label::row(0), Label::col(0)).is_err());
    }

    #[test]
    fn component_examples() {
        let b = bm(&[&[1, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 1, 1], &[0, 0, 0, 1]]);
        assert_eq!(connected_components_bg(&b).len(), 2);
        assert_eq!(connected_components_bg(&bm(&[&[1, 1], &[1, 1]])).len(), 1);
        assert_eq!(connected_components_bg(&BinaryMatrix::zeros(2, 2)).len(), 4);
    }

    #[test]
    fn make_simple_examples() {
        let (s, log) = make_simple(&identity(4));
        assert_eq!(s.length(), 0);
        assert_eq!(log.iter().filter(|r| r.kind == ReductionKind::Unit && r.is_row).count(), 4);

        let (s, _) = make_simple(&bm(&[&[1, 1], &[1, 1]]));
        assert_eq!(s.length(), 0);

        let w3 = bm(&[&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1, 1, 0]]);
        let (s, log) = make_simple(&w3);
        assert_eq!(s.to_rows(), vec![vec![1, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].kind, ReductionKind::Zero);
        assert_eq!(log[0].label, Label::col(3));
    }

    #[test]
    fn protected_duplicate_is_kept() {
        let b = bm(&[&[1, 1, 0], &[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        let (s, _) = make_simple_protected(&b, &|l| l == Label::row(1));
        assert!(s.row_labels().contains(&Label::row(1)) || s.nrows() == 0);
    }

    #[test]
    fn separation_ranks() {
        let b = bm(&[&[1, 1, 0, 0], &[1, 0, 0, 0], &[1, 1, 1, 1], &[0, 0, 1, 0]]);
        let sep = Separation::from_side(&b, |l| {
            [Label::row(0), Label::row(1), Label::col(0), Label::col(1)].contains(&l)
        });
        assert_eq!(sep.rank_e, 0);
        assert_eq!(sep.rank_d, 1);
        assert!(sep.is_k_separation(2));
    }

    fn arb_matrix(max: usize) -> impl Strategy<Value = BinaryMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(0u8..2, n), m)
                .prop_map(|rows| BinaryMatrix::from_rows(&rows))
        })
    }

    proptest! {
        #[test]
        fn pivot_is_involution(b in arb_matrix(9), seed in 0usize..1000) {
            let ones: Vec<(usize, usize)> = (0..b.nrows())
                .flat_map(|i| (0..b.ncols()).map(move |j| (i, j)))
                .filter(|&(i, j)| b.get(i, j))
                .collect();
            prop_assume!(!ones.is_empty());
            let (i, j) = ones[seed % ones.len()];
            let mut p = b.clone();
            p.pivot_at(i, j).unwrap();
            prop_assert_eq!(p.col(j).clone(), b.col(j).clone());
            for jj in 0..p.ncols() {
                for ii in 0..p.nrows() {
                    prop_assert_eq!(p.get(ii, jj), p.col(jj).get(ii));
                }
            }
            p.pivot_at(i, j).unwrap();
            prop_assert_eq!(p, b);
        }

        #[test]
        fn rank_transpose_and_permutation(b in arb_matrix(10), s in 0u64..1000) {
            let r = b.rank();
            prop_assert_eq!(b.transpose().rank(), r);
            let mut v = PermutedView::new(&b);
            let (m, n) = (b.nrows(), b.ncols());
            for k in 0..8u64 {
                v.swap_rows(((s + k) as usize) % m, ((s * 7 + k) as usize) % m);
                v.swap_cols(((s * 3 + k) as usize) % n, ((s * 5 + k) as usize) % n);
            }
            let mat = BinaryMatrix::from_rows(&v.materialize());
            prop_assert_eq!(mat.rank(), r);
        }

        #[test]
        fn permuted_view_matches_copy(b in arb_matrix(8), s in 0usize..1000) {
            let mut v = PermutedView::new(&b);
            let mut copy = b.to_rows();
            let (m, n) = (b.nrows(), b.ncols());
            let (a1, a2) = (s % m, (s / 3) % m);
            let (c1, c2) = ((s / 5) % n, (s / 11) % n);
            v.swap_rows(a1, a2);
            copy.swap(a1, a2);
            v.swap_cols(c1, c2);
            for r in copy.iter_mut() { r.swap(c1, c2); }
            let expect: Vec<Vec<i8>> = copy.iter().map(|r| r.iter().map(|&x| x as i8).collect()).collect();
            prop_assert_eq!(v.materialize(), expect.clone());
            v.transpose();
            let t: Vec<Vec<i8>> = (0..n).map(|j| (0..m).map(|i| expect[i][j]).collect()).collect();
            prop_assert_eq!(v.materialize(), t);
        }

        #[test]
        fn make_simple_fixed_point(b in arb_matrix(9)) {
            let (s, _) = make_simple(&b);
            let (s2, log2) = make_simple(&s);
            prop_assert!(log2.is_empty());
            prop_assert_eq!(s2, s);
        }

        #[test]
        fn components_partition(b in arb_matrix(10)) {
            let comps = components_idx(&b);
            let mut rows: Vec<usize> = comps.iter().flat_map(|c| c.0.clone()).collect();
            let mut cols: Vec<usize> = comps.iter().flat_map(|c| c.1.clone()).collect();
            rows.sort_unstable();
            cols.sort_unstable();
            prop_assert_eq!(rows, (0..b.nrows()).collect::<Vec<_>>());
            prop_assert_eq!(cols, (0..b.ncols()).collect::<Vec<_>>());
        }
    }
}
