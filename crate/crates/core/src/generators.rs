//! Instance families: signed random matrices, network matrices of random
//! graphs, and odd-cycle violators.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::matrix::TernaryMatrix;
use crate::signing::sign_matrix;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_p(p: f64) -> Result<(), Error> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Input(format!("probability {p} is not in (0, 1)")));
    }
    Ok(())
}

/// n×n Bernoulli(p) support, signed.
pub fn gen_random_signed(n: usize, p: f64, seed: u64) -> Result<TernaryMatrix, Error> {
    check_p(p)?;
    let mut r = rng(seed);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| r.gen_bool(p) as i64).collect())
        .collect();
    let a = TernaryMatrix::from_rows(&rows)?;
    Ok(sign_matrix(&a, false).result)
}

/// Oriented graph with a chosen spanning tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceGraph {
    pub vertices: usize,
    /// (tail, head)
    pub edges: Vec<(usize, usize)>,
    /// Indices into `edges`, one per matrix row.
    pub tree: Vec<usize>,
    /// Indices into `edges`, one per matrix column.
    pub cotree: Vec<usize>,
}

const NETWORK_ATTEMPTS: usize = 1000;

/// Network matrix of a connected G(n, p): rows are spanning tree edges, column
/// e holds the signed tree path from the tail to the head of e.
pub fn gen_network_matrix(n_vertices: usize, p: f64, seed: u64) -> Result<(TernaryMatrix, SourceGraph), Error> {
    check_p(p)?;
    if n_vertices < 2 {
        return Err(Error::Input("need at least two vertices".into()));
    }
    let mut r = rng(seed);
    for _ in 0..NETWORK_ATTEMPTS {
        let mut edges = Vec::new();
        for u in 0..n_vertices {
            for v in u + 1..n_vertices {
                if r.gen_bool(p) {
                    edges.push(if r.gen_bool(0.5) { (u, v) } else { (v, u) });
                }
            }
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
        for (k, &(u, v)) in edges.iter().enumerate() {
            adj[u].push((v, k));
            adj[v].push((u, k));
        }
        for a in adj.iter_mut() {
            a.shuffle(&mut r);
        }
        // BFS tree from a random root
        let root = r.gen_range(0..n_vertices);
        let mut parent = vec![usize::MAX; n_vertices];
        let mut parent_edge = vec![usize::MAX; n_vertices];
        let mut depth = vec![0usize; n_vertices];
        let mut seen = vec![false; n_vertices];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        let mut in_tree = vec![false; edges.len()];
        while let Some(u) = q.pop_front() {
            for &(v, k) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = u;
                    parent_edge[v] = k;
                    depth[v] = depth[u] + 1;
                    in_tree[k] = true;
                    q.push_back(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            continue;
        }
        let tree: Vec<usize> = (0..edges.len()).filter(|&k| in_tree[k]).collect();
        let cotree: Vec<usize> = (0..edges.len()).filter(|&k| !in_tree[k]).collect();
        let mut row_of = vec![usize::MAX; edges.len()];
        for (i, &k) in tree.iter().enumerate() {
            row_of[k] = i;
        }
        let mut a = TernaryMatrix::zeros(tree.len(), cotree.len());
        for (j, &k) in cotree.iter().enumerate() {
            let (mut x, mut y) = edges[k];
            // walk x and y up to their meeting point; the path runs x -> y
            while x != y {
                if depth[x] >= depth[y] {
                    let e = parent_edge[x];
                    // traversed from x towards its parent
                    let sign = if edges[e].0 == x { 1 } else { -1 };
                    a.set(row_of[e], j, sign);
                    x = parent[x];
                } else {
                    let e = parent_edge[y];
                    // traversed from y's parent towards y
                    let sign = if edges[e].1 == y { 1 } else { -1 };
                    a.set(row_of[e], j, sign);
                    y = parent[y];
                }
            }
        }
        return Ok((a, SourceGraph { vertices: n_vertices, edges, tree, cotree }));
    }
    Err(Error::Input(format!("no connected G({n_vertices}, {p}) after {NETWORK_ATTEMPTS} attempts")))
}

/// Cycle matrix with the two first rows filled where both are zero; with
/// `apply_pivots`, pivots on the first (n+1)/2 diagonal entries.
pub fn gen_odd_cycle_violator(n: usize, apply_pivots: bool, _seed: u64) -> Result<TernaryMatrix, Error> {
    if n < 5 || n % 2 == 0 {
        return Err(Error::Input(format!("n = {n} must be odd and at least 5")));
    }
    let mut rows = vec![vec![0i64; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1;
        row[(i + 1) % n] = 1;
    }
    for j in 0..n {
        if rows[0][j] == 0 && rows[1][j] == 0 {
            rows[0][j] = 1;
            rows[1][j] = 1;
        }
    }
    if apply_pivots {
        for k in 0..n.div_ceil(2) {
            real_pivot(&mut rows, k, k)?;
        }
    }
    TernaryMatrix::from_rows(&rows)
}

/// Pivot over the reals on a ±1 entry.
fn real_pivot(a: &mut [Vec<i64>], r: usize, s: usize) -> Result<(), Error> {
    let p = a[r][s];
    if p.abs() != 1 {
        return Err(Error::Internal(format!("pivot entry ({r}, {s}) is {p}")));
    }
    let old: Vec<Vec<i64>> = a.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = match (i == r, j == s) {
                (true, true) => p,
                (true, false) => old[r][j] * p,
                (false, true) => -old[i][s] * p,
                (false, false) => old[i][j] - old[i][s] * old[r][j] * p,
            };
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{brute_force_graphic, det_i64};

    #[test]
    fn odd_cycle_base_n5() {
        let a = gen_odd_cycle_violator(5, false, 0).unwrap();
        assert_eq!(
            a.to_rows(),
            vec![
                vec![1, 1, 0, 1, 1],
                vec![0, 1, 1, 1, 1],
                vec![0, 0, 1, 1, 0],
                vec![0, 0, 0, 1, 1],
                vec![1, 0, 0, 0, 1],
            ]
        );
        assert_eq!(det_i64(&a.to_rows()).abs(), 2);
    }

    #[test]
    fn odd_cycle_rejects_bad_n() {
        assert!(gen_odd_cycle_violator(4, false, 0).is_err());
        assert!(gen_odd_cycle_violator(3, false, 0).is_err());
    }

    /// Square submatrices with |det| >= 2 containing no smaller such submatrix.
    fn minimal_violators(a: &TernaryMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
        use itertools::Itertools;
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for k in 1..=a.nrows().min(a.ncols()) {
            for r in (0..a.nrows()).combinations(k) {
                for c in (0..a.ncols()).combinations(k) {
                    if det_i64(&a.submatrix(&r, &c).to_rows()).abs() < 2 {
                        continue;
                    }
                    let contains_smaller = out
                        .iter()
                        .any(|(r2, c2)| r2.iter().all(|x| r.contains(x)) && c2.iter().all(|x| c.contains(x)));
                    if !contains_smaller {
                        out.push((r.clone(), c.clone()));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn pivoted_odd_cycle_has_one_violator() {
        let a = gen_odd_cycle_violator(9, true, 0).unwrap();
        let v = minimal_violators(&a);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].0.len(), 4);
    }

    #[test]
    fn base_odd_cycle_is_minimal() {
        let a = gen_odd_cycle_violator(7, false, 0).unwrap();
        let v = minimal_violators(&a);
        assert_eq!(v, vec![((0..7).collect(), (0..7).collect())]);
    }

    #[test]
    fn random_signed_is_deterministic_and_signed() {
        let a = gen_random_signed(12, 0.5, 3).unwrap();
        assert_eq!(a, gen_random_signed(12, 0.5, 3).unwrap());
        assert!(!sign_matrix(&a, false).modified);
    }

    #[test]
    fn random_density() {
        let n = 60;
        let p = 0.25;
        let a = gen_random_signed(n, p, 9).unwrap();
        let mean = p * (n * n) as f64;
        let sd = (mean * (1.0 - p)).sqrt();
        assert!((a.nonzeros() as f64 - mean).abs() <= 3.0 * sd);
    }

    #[test]
    fn network_matrix_is_graphic() {
        for seed in 0..10 {
            let (a, g) = gen_network_matrix(7, 0.5, seed).unwrap();
            assert_eq!(a.nrows(), 6);
            assert_eq!(a.ncols(), g.cotree.len());
            if a.ncols() + a.nrows() <= 16 {
                assert!(brute_force_graphic(&a.support()).unwrap().is_some());
            }
            assert!(crate::oracles::brute_force_tu(&a).unwrap().is_tu());
        }
    }

    #[test]
    fn k4_network_matrix() {
        let (a, _) = gen_network_matrix(4, 0.999_999, 1).unwrap();
        assert_eq!((a.nrows(), a.ncols()), (3, 3));
        assert!(crate::oracles::brute_force_tu(&a).unwrap().is_tu());
    }
}
