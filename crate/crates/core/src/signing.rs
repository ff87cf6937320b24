//! Camion signing of a {0, ±1} matrix.
//!
//! Columns are absorbed one at a time into a growing block `A[X, Y]`. For each
//! new column `y`, a breadth-first search on `BG(A[X, Y])` from the first
//! nonzero row `x0` of `A[X, y]` yields a chordless cycle per other nonzero
//! row. Whenever a cycle's entries sum to 2 (mod 4) the entry at the cycle's
//! far row is negated.

use std::collections::VecDeque;

use crate::matrix::{Label, TernaryMatrix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigningOutcome {
    pub modified: bool,
    pub result: TernaryMatrix,
    /// Row and column labels of the first cycle submatrix that forced a change.
    pub first_violator: Option<(Vec<Label>, Vec<Label>)>,
}

const NONE: usize = usize::MAX;

pub fn sign_matrix(a: &TernaryMatrix, stop_on_first_change: bool) -> SigningOutcome {
    let m = a.nrows();
    let n = a.ncols();
    let mut out = a.clone();
    let mut modified = false;

    let mut in_x = vec![false; m];
    let mut in_y = vec![false; n];
    // touched[y]: column y has a nonzero in some row of X
    let mut touched = vec![false; n];
    let mut x_rows: Vec<usize> = Vec::new();
    let mut y_cols: Vec<usize> = Vec::new();

    let Some(first) = (0..n).find(|&j| (0..m).any(|i| a.get(i, j) != 0)) else {
        return SigningOutcome { modified: false, result: out, first_violator: None };
    };

    let mut next = Some(first);
    while let Some(y) = next {
        let mut nz: Vec<usize> = x_rows.iter().copied().filter(|&i| out.get(i, y) != 0).collect();
        nz.sort_unstable();
        if nz.len() >= 2 {
            if let Some(v) = sign_column(&mut out, &in_x, &y_cols, y, &nz, stop_on_first_change) {
                let rows = v.0.iter().map(|&i| a.row_labels()[i]).collect();
                let cols = v.1.iter().map(|&j| a.col_labels()[j]).collect();
                return SigningOutcome { modified: true, result: out, first_violator: Some((rows, cols)) };
            }
            if (0..m).any(|i| out.get(i, y) != a.get(i, y)) {
                modified = true;
            }
        }
        in_y[y] = true;
        y_cols.push(y);
        for i in 0..m {
            if out.get(i, y) != 0 && !in_x[i] {
                in_x[i] = true;
                x_rows.push(i);
                for (j, t) in touched.iter_mut().enumerate() {
                    if out.get(i, j) != 0 {
                        *t = true;
                    }
                }
            }
        }
        next = (0..n)
            .find(|&j| !in_y[j] && touched[j])
            .or_else(|| (0..n).find(|&j| !in_y[j]));
    }
    SigningOutcome { modified, result: out, first_violator: None }
}

/// Signs column `y` against the block; on a required flip with `stop` set,
/// returns the cycle submatrix as (row indices, column indices).
fn sign_column(
    a: &mut TernaryMatrix,
    in_x: &[bool],
    y_cols: &[usize],
    y: usize,
    nz: &[usize],
    stop: bool,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = a.nrows();
    let n = a.ncols();
    let mut sorted_y: Vec<usize> = y_cols.to_vec();
    sorted_y.sort_unstable();

    // BFS over rows and columns of BG(A[X, Y]); parents encode the path tree.
    let x0 = nz[0];
    let mut row_dist = vec![NONE; m];
    let mut row_parent = vec![NONE; m];
    let mut col_dist = vec![NONE; n];
    let mut col_parent = vec![NONE; n];
    row_dist[x0] = 0;
    let mut queue: VecDeque<(bool, usize)> = VecDeque::new();
    queue.push_back((true, x0));
    while let Some((is_row, v)) = queue.pop_front() {
        if is_row {
            for &j in &sorted_y {
                if col_dist[j] == NONE && a.get(v, j) != 0 {
                    col_dist[j] = row_dist[v] + 1;
                    col_parent[j] = v;
                    queue.push_back((false, j));
                }
            }
        } else {
            for i in 0..m {
                if in_x[i] && row_dist[i] == NONE && a.get(i, v) != 0 {
                    row_dist[i] = col_dist[v] + 1;
                    row_parent[i] = v;
                    queue.push_back((true, i));
                }
            }
        }
    }

    let mut is_target = vec![false; m];
    for &i in nz {
        is_target[i] = true;
    }
    let mut order: Vec<usize> = nz[1..].iter().copied().filter(|&i| row_dist[i] != NONE).collect();
    order.sort_by_key(|&i| (row_dist[i], i));

    for xi in order {
        let mut rows = vec![xi];
        let mut cols = vec![];
        let mut cur = xi;
        loop {
            let c = row_parent[cur];
            cols.push(c);
            let r = col_parent[c];
            rows.push(r);
            if is_target[r] {
                break;
            }
            cur = r;
        }
        let xp = *rows.last().unwrap();
        let mut sum: i64 = a.get(xi, y) as i64 + a.get(xp, y) as i64;
        for k in 0..cols.len() {
            sum += a.get(rows[k], cols[k]) as i64 + a.get(rows[k + 1], cols[k]) as i64;
        }
        if sum.rem_euclid(4) == 2 {
            if stop {
                let mut cs = cols;
                cs.push(y);
                return Some((rows, cs));
            }
            let v = a.get(xi, y);
            a.set(xi, y, -v);
        }
    }
    None
}
