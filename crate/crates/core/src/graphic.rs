//! Graph realizations of binary matrices and incremental graphicness testing.
//!
//! A realization is a graph whose tree edges carry the row labels and whose
//! remaining edges carry the column labels, such that the fundamental cycle of
//! each column edge uses exactly the rows holding a 1 in that column.
//!
//! Extension by at most three elements works in two stages. New columns are
//! first placed as chords between the ends of their tree path (the graph of
//! the matrix with the new rows contracted). Each new row then reverses a
//! contraction by splitting one vertex in two; the split is dictated by the
//! fundamental cycles through that vertex.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::Error;
use crate::matrix::{BinaryMatrix, Label};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub label: Label,
    pub u: usize,
    pub v: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationGraph {
    pub vertices: usize,
    pub tree: Vec<GraphEdge>,
    pub cotree: Vec<GraphEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphicnessReport {
    pub graphic: bool,
    pub graph: Option<RealizationGraph>,
    /// 1-based index of the largest graphic member of the sequence.
    pub largest_graphic_index: usize,
}

/// Spanning tree rooted at vertex 0.
struct Rooted {
    parent: Vec<usize>,
    parent_edge: Vec<usize>,
    depth: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl RealizationGraph {
    fn rooted(&self) -> Option<Rooted> {
        let nv = self.vertices;
        if nv == 0 || self.tree.len() + 1 != nv {
            return None;
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for (k, e) in self.tree.iter().enumerate() {
            if e.u >= nv || e.v >= nv || e.u == e.v {
                return None;
            }
            adj[e.u].push((e.v, k));
            adj[e.v].push((e.u, k));
        }
        let mut parent = vec![NONE; nv];
        let mut parent_edge = vec![NONE; nv];
        let mut depth = vec![NONE; nv];
        depth[0] = 0;
        let mut stack = vec![0];
        let mut seen = 1;
        while let Some(x) = stack.pop() {
            for &(y, k) in &adj[x] {
                if depth[y] == NONE {
                    depth[y] = depth[x] + 1;
                    parent[y] = x;
                    parent_edge[y] = k;
                    seen += 1;
                    stack.push(y);
                }
            }
        }
        (seen == nv).then_some(Rooted { parent, parent_edge, depth })
    }

    /// Vertex sequence and tree-edge sequence of the tree path from `a` to `b`.
    fn path(r: &Rooted, a: usize, b: usize) -> (Vec<usize>, Vec<usize>) {
        let (mut x, mut y) = (a, b);
        let mut left_v = vec![x];
        let mut left_e = vec![];
        let mut right_v = vec![y];
        let mut right_e = vec![];
        while r.depth[x] > r.depth[y] {
            left_e.push(r.parent_edge[x]);
            x = r.parent[x];
            left_v.push(x);
        }
        while r.depth[y] > r.depth[x] {
            right_e.push(r.parent_edge[y]);
            y = r.parent[y];
            right_v.push(y);
        }
        while x != y {
            left_e.push(r.parent_edge[x]);
            x = r.parent[x];
            left_v.push(x);
            right_e.push(r.parent_edge[y]);
            y = r.parent[y];
            right_v.push(y);
        }
        right_v.pop();
        left_v.extend(right_v.into_iter().rev());
        left_e.extend(right_e.into_iter().rev());
        (left_v, left_e)
    }

    /// Fundamental-circuit matrix with rows in tree order and columns in cotree order.
    pub fn fundamental_matrix(&self) -> Option<BinaryMatrix> {
        let r = self.rooted()?;
        let mut b = BinaryMatrix::zeros_labeled(
            self.tree.iter().map(|e| e.label).collect(),
            self.cotree.iter().map(|e| e.label).collect(),
        );
        for (j, e) in self.cotree.iter().enumerate() {
            if e.u >= self.vertices || e.v >= self.vertices {
                return None;
            }
            for k in Self::path(&r, e.u, e.v).1 {
                b.set(k, j, true);
            }
        }
        Some(b)
    }

    /// True if this graph realizes `b` with matching labels.
    pub fn realizes(&self, b: &BinaryMatrix) -> bool {
        if self.tree.len() != b.nrows() || self.cotree.len() != b.ncols() {
            return false;
        }
        let Some(f) = self.fundamental_matrix() else {
            return false;
        };
        let Some(ri) = b
            .row_labels()
            .iter()
            .map(|&l| f.row_index(l))
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        let Some(ci) = b
            .col_labels()
            .iter()
            .map(|&l| f.col_index(l))
            .collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        f.submatrix(&ri, &ci) == *b
    }
}

/// Star realization of a 3×3 matrix whose columns each hold two 1s.
pub fn w3_realization() -> RealizationGraph {
    let b = BinaryMatrix::from_rows(&[vec![1u8, 1, 0], vec![1, 0, 1], vec![0, 1, 1]]);
    star_realization(&b).expect("canonical W3")
}

/// Realizes a 3×3 matrix with two 1s in each (distinct) column by K4 with a star tree.
pub fn star_realization(b: &BinaryMatrix) -> Option<RealizationGraph> {
    if b.nrows() != 3 || b.ncols() != 3 {
        return None;
    }
    let tree = (0..3)
        .map(|i| GraphEdge { label: b.row_labels()[i], u: 0, v: i + 1 })
        .collect();
    let mut cotree = Vec::new();
    let mut seen = HashSet::new();
    for j in 0..3 {
        let ones: Vec<usize> = b.col(j).ones().collect();
        if ones.len() != 2 || !seen.insert((ones[0], ones[1])) {
            return None;
        }
        cotree.push(GraphEdge { label: b.col_labels()[j], u: ones[0] + 1, v: ones[1] + 1 });
    }
    Some(RealizationGraph { vertices: 4, tree, cotree })
}

/// End of an edge at a vertex: (is_tree, edge index, which end).
type End = (bool, usize, u8);

fn end_vertex(g: &RealizationGraph, e: End) -> usize {
    let edge = if e.0 { &g.tree[e.1] } else { &g.cotree[e.1] };
    if e.2 == 0 {
        edge.u
    } else {
        edge.v
    }
}

fn set_end_vertex(g: &mut RealizationGraph, e: End, to: usize) {
    let edge = if e.0 { &mut g.tree[e.1] } else { &mut g.cotree[e.1] };
    if e.2 == 0 {
        edge.u = to;
    } else {
        edge.v = to;
    }
}

/// Union-find with parity for the side constraints at a split vertex.
struct ParityDsu {
    parent: Vec<usize>,
    parity: Vec<u8>,
}

impl ParityDsu {
    fn new(n: usize) -> Self {
        ParityDsu { parent: (0..n).collect(), parity: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, u8) {
        let mut p = 0;
        let mut y = x;
        while self.parent[y] != y {
            p ^= self.parity[y];
            y = self.parent[y];
        }
        // path compression
        let root = y;
        let mut y = x;
        let mut acc = p;
        while self.parent[y] != y {
            let next = self.parent[y];
            let py = self.parity[y];
            self.parent[y] = root;
            self.parity[y] = acc;
            acc ^= py;
            y = next;
        }
        (root, p)
    }

    fn union(&mut self, a: usize, b: usize, diff: u8) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == diff;
        }
        self.parent[ra] = rb;
        self.parity[ra] = pa ^ pb ^ diff;
        true
    }
}

const MAX_FREE_COMPONENTS: usize = 12;

/// Extends a realization of `n_i` to one of `n_next`, or reports that none exists.
pub fn test_c_extend(
    g: &RealizationGraph,
    n_i: &BinaryMatrix,
    n_next: &BinaryMatrix,
) -> Result<Option<RealizationGraph>, Error> {
    let pos = n_next.label_positions();
    for (i, &l) in n_i.row_labels().iter().enumerate() {
        for (j, &c) in n_i.col_labels().iter().enumerate() {
            match (pos.get(&l), pos.get(&c)) {
                (Some(&(true, a)), Some(&(false, b))) => {
                    if n_next.get(a, b) != n_i.get(i, j) {
                        return Err(Error::Input(format!("entry ({l}, {c}) differs between members")));
                    }
                }
                _ => return Err(Error::Input(format!("member does not contain ({l}, {c})"))),
            }
        }
    }
    if n_next.length() > n_i.length() + 3 {
        return Err(Error::Input(format!(
            "length grows from {} to {}",
            n_i.length(),
            n_next.length()
        )));
    }
    if !g.realizes(n_i) {
        return Err(Error::Input("graph does not realize the smaller member".into()));
    }
    let old_rows: HashSet<Label> = n_i.row_labels().iter().copied().collect();
    let old_cols: HashSet<Label> = n_i.col_labels().iter().copied().collect();
    let new_rows: Vec<usize> = (0..n_next.nrows())
        .filter(|&i| !old_rows.contains(&n_next.row_labels()[i]))
        .collect();
    let new_cols: Vec<usize> = (0..n_next.ncols())
        .filter(|&j| !old_cols.contains(&n_next.col_labels()[j]))
        .collect();
    if new_rows.is_empty() && new_cols.is_empty() {
        return Ok(Some(g.clone()));
    }

    // Stage 1: new columns as chords of their tree path over the old rows.
    let mut work = g.clone();
    let mut col_index: Vec<usize> = work.cotree.iter().map(|e| pos[&e.label].1).collect();
    let mut unplaced: Vec<usize> = Vec::new();
    {
        let tree_row: Vec<usize> = work.tree.iter().map(|e| pos[&e.label].1).collect();
        let mut deg = vec![0u32; work.vertices];
        for &j in &new_cols {
            let edges: Vec<usize> = (0..work.tree.len())
                .filter(|&k| n_next.get(tree_row[k], j))
                .collect();
            if edges.is_empty() {
                unplaced.push(j);
                continue;
            }
            let mut touched = Vec::new();
            for &k in &edges {
                for v in [work.tree[k].u, work.tree[k].v] {
                    if deg[v] == 0 {
                        touched.push(v);
                    }
                    deg[v] += 1;
                }
            }
            let ends: Vec<usize> = touched.iter().copied().filter(|&v| deg[v] == 1).collect();
            let is_path = touched.iter().all(|&v| deg[v] <= 2)
                && ends.len() == 2
                && touched.len() == edges.len() + 1;
            for &v in &touched {
                deg[v] = 0;
            }
            if !is_path {
                return Ok(None);
            }
            work.cotree.push(GraphEdge { label: n_next.col_labels()[j], u: ends[0], v: ends[1] });
            col_index.push(j);
        }
    }

    // Stage 2: new rows by vertex splits, with backtracking over choices.
    let result = insert_rows(work, &col_index, &unplaced, &new_rows, n_next);
    match result {
        Some(g2) if g2.realizes(n_next) => Ok(Some(g2)),
        Some(_) => Err(Error::Internal("extension produced an inconsistent graph".into())),
        None => Ok(None),
    }
}

fn insert_rows(
    g: RealizationGraph,
    col_index: &[usize],
    unplaced: &[usize],
    rows: &[usize],
    b: &BinaryMatrix,
) -> Option<RealizationGraph> {
    let Some((&r, rest)) = rows.split_first() else {
        return unplaced.is_empty().then_some(g);
    };
    let rooted = g.rooted()?;
    let nv = g.vertices;

    // cycle of each placed column: vertex list and tree edges
    let cycles: Vec<(Vec<usize>, Vec<usize>)> = g
        .cotree
        .iter()
        .map(|e| RealizationGraph::path(&rooted, e.u, e.v))
        .collect();
    let in_s: Vec<bool> = col_index.iter().map(|&j| b.get(r, j)).collect();

    let mut cand = Bits::from_indices(nv, 0..nv);
    for (k, (verts, _)) in cycles.iter().enumerate() {
        if in_s[k] {
            cand.and_assign(&Bits::from_indices(nv, verts.iter().copied()));
        }
    }

    let place_now: Vec<usize> = unplaced.iter().copied().filter(|&j| b.get(r, j)).collect();
    let still_unplaced: Vec<usize> = unplaced.iter().copied().filter(|&j| !b.get(r, j)).collect();

    for v in cand.ones() {
        // ends at v
        let mut ends: Vec<End> = Vec::new();
        for (k, e) in g.tree.iter().enumerate() {
            if e.u == v {
                ends.push((true, k, 0));
            }
            if e.v == v {
                ends.push((true, k, 1));
            }
        }
        for (k, e) in g.cotree.iter().enumerate() {
            if e.u == v {
                ends.push((false, k, 0));
            }
            if e.v == v {
                ends.push((false, k, 1));
            }
        }
        let end_id = |e: End| ends.iter().position(|&x| x == e);
        let tree_end_at = |k: usize| -> End {
            if g.tree[k].u == v {
                (true, k, 0)
            } else {
                (true, k, 1)
            }
        };
        let mut dsu = ParityDsu::new(ends.len());
        let mut ok = true;
        for (k, (verts, edges)) in cycles.iter().enumerate() {
            let Some(p) = verts.iter().position(|&x| x == v) else {
                continue;
            };
            let last = verts.len() - 1;
            let (a, bb): (End, End) = if last == 0 {
                // chord whose ends coincide cannot occur in a realization
                ok = false;
                break;
            } else if p == 0 {
                let ce = if g.cotree[k].u == v { (false, k, 0) } else { (false, k, 1) };
                (ce, tree_end_at(edges[0]))
            } else if p == last {
                let ce = if g.cotree[k].v == v { (false, k, 1) } else { (false, k, 0) };
                (ce, tree_end_at(edges[last - 1]))
            } else {
                (tree_end_at(edges[p - 1]), tree_end_at(edges[p]))
            };
            let (ia, ib) = (end_id(a).unwrap(), end_id(bb).unwrap());
            if !dsu.union(ia, ib, in_s[k] as u8) {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut roots: Vec<usize> = Vec::new();
        for i in 0..ends.len() {
            let (rt, _) = dsu.find(i);
            if !roots.contains(&rt) {
                roots.push(rt);
            }
        }
        let free = roots.len().saturating_sub(1).min(MAX_FREE_COMPONENTS);
        for mask in 0u32..(1u32 << free) {
            let mut h = g.clone();
            let v2 = nv;
            h.vertices += 1;
            let mut side1 = 0usize;
            for (i, &e) in ends.iter().enumerate() {
                let (rt, p) = dsu.find(i);
                let ci = roots.iter().position(|&x| x == rt).unwrap();
                let flip = if ci == 0 || ci > free { 0 } else { ((mask >> (ci - 1)) & 1) as u8 };
                if p ^ flip == 1 {
                    debug_assert_eq!(end_vertex(&h, e), v);
                    set_end_vertex(&mut h, e, v2);
                    side1 += 1;
                }
            }
            if side1 == 0 && place_now.is_empty() && in_s.iter().any(|&s| s) {
                continue;
            }
            h.tree.push(GraphEdge { label: b.row_labels()[r], u: v, v: v2 });
            let mut cols = col_index.to_vec();
            for &j in &place_now {
                h.cotree.push(GraphEdge { label: b.col_labels()[j], u: v, v: v2 });
                cols.push(j);
            }
            if let Some(done) = insert_rows(h, &cols, &still_unplaced, rest, b) {
                return Some(done);
            }
        }
    }
    None
}

/// Runs graph extension along the sequence of (rows, cols) members of `b`.
pub fn test_graphicness(
    b: &BinaryMatrix,
    members: &[(Vec<Label>, Vec<Label>)],
) -> Result<GraphicnessReport, Error> {
    let Some(first) = members.first() else {
        return Err(Error::Input("empty sequence".into()));
    };
    let sub = |m: &(Vec<Label>, Vec<Label>)| {
        b.submatrix_by_labels(&m.0, &m.1)
            .ok_or_else(|| Error::Input("sequence member is not a submatrix".into()))
    };
    let last = members.last().unwrap();
    if last.0.len() != b.nrows() || last.1.len() != b.ncols() {
        return Err(Error::Input("last sequence member must be the whole matrix".into()));
    }
    let mut cur = sub(first)?;
    let Some(mut g) = star_realization(&cur) else {
        return Err(Error::Input("first sequence member is not a W3 matrix".into()));
    };
    for (i, m) in members.iter().enumerate().skip(1) {
        let next = sub(m)?;
        match test_c_extend(&g, &cur, &next)? {
            Some(g2) => {
                g = g2;
                cur = next;
            }
            None => {
                return Ok(GraphicnessReport { graphic: false, graph: None, largest_graphic_index: i });
            }
        }
    }
    Ok(GraphicnessReport { graphic: true, graph: Some(g), largest_graphic_index: members.len() })
}

/// Sequence members transposed, for the cographic test.
pub fn transpose_members(members: &[(Vec<Label>, Vec<Label>)]) -> Vec<(Vec<Label>, Vec<Label>)> {
    members.iter().map(|(r, c)| (c.clone(), r.clone())).collect()
}
