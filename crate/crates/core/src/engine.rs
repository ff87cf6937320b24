//! Total unimodularity test: signing, the decomposition recursion, certificate
//! trees with an independent checker, and minimal violator extraction.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{
    candidate_pairs, decompose_2sum, decompose_3sum, extend_b, find_b, is_r10, overlay_2sum,
    overlay_3sum, partition, same_by_labels, Connector, ExtendB, FindB, NestedSequence,
};
use crate::error::Error;
use crate::graphic::{test_graphicness, transpose_members, RealizationGraph};
use crate::matrix::{
    components_idx, make_simple_protected, BinaryMatrix, Label, Reduction, ReductionKind,
    TernaryMatrix,
};
use crate::oracles::det_ternary;
use crate::signing::sign_matrix;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    OneSum,
    TwoSum,
    ThreeSum,
    LeafGraphic,
    LeafCographic,
    LeafR10,
    LeafSmall,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pivot {
    pub row: Label,
    pub col: Label,
}

/// One node of a decomposition certificate.
///
/// The node's matrix is the support of the input restricted to `rows` x `cols`
/// (for the root) or the corresponding submatrix of the parent's processed
/// matrix. Processing deletes `reductions` in order, then applies `pivots`.
/// Leaves hold evidence for the processed matrix; for `leaf_cographic` the
/// graph realizes its transpose.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateTree {
    pub kind: NodeKind,
    pub rows: Vec<Label>,
    pub cols: Vec<Label>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reductions: Vec<Reduction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pivots: Vec<Pivot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connector: Option<Connector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<RealizationGraph>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<CertificateTree>,
}

impl CertificateTree {
    fn new(rows: Vec<Label>, cols: Vec<Label>) -> Self {
        CertificateTree {
            kind: NodeKind::LeafSmall,
            rows,
            cols,
            reductions: Vec::new(),
            pivots: Vec::new(),
            connector: None,
            graph: None,
            children: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Input(format!("certificate: {e}")))
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Nodes in depth-first order.
    pub fn nodes(&self) -> Vec<&CertificateTree> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.nodes());
        }
        out
    }

    /// Child-index paths of all nodes in depth-first order.
    pub fn node_paths(&self) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for (k, c) in self.children.iter().enumerate() {
            for mut p in c.node_paths() {
                p.insert(0, k);
                out.push(p);
            }
        }
        out
    }

    pub fn node_at_mut(&mut self, path: &[usize]) -> &mut CertificateTree {
        path.iter().fold(self, |n, &k| &mut n.children[k])
    }
}

/// Where a failed regularity test stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Failure {
    /// Signing had to change an entry; the cycle submatrix is a minimal violator.
    Signing { rows: Vec<Label>, cols: Vec<Label> },
    /// A node admitted no decomposition. `pivoted` holds every label involved
    /// in a pivot on the way from the root to that node.
    Decomposition { rows: Vec<Label>, cols: Vec<Label>, pivoted: Vec<Label> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violator {
    /// Labels into the original matrix, in original order.
    pub rows: Vec<Label>,
    pub cols: Vec<Label>,
    pub det: BigInt,
    pub minimal: bool,
}

#[derive(Clone, Debug)]
pub enum Regularity {
    Regular(CertificateTree),
    NotRegular(Failure),
}

#[derive(Clone, Debug)]
pub struct TuResult {
    pub tu: bool,
    pub certificate: Option<CertificateTree>,
    pub violator: Option<Violator>,
    pub failure: Option<Failure>,
}

const STACK_BYTES: usize = 512 << 20;

/// Decides regularity of `b`, resuming from `seq` if it is non-empty.
pub fn decompose_matrix(b: &BinaryMatrix, seq: &NestedSequence) -> Result<Regularity, Error> {
    let b = b.clone();
    let seq = seq.clone();
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, move || {
                let mut path = Vec::new();
                build(b, seq, &mut path)
            })
            .expect("spawn decomposition thread")
            .join()
            .unwrap_or_else(|_| Err(Error::Internal("decomposition panicked".into())))
    })
    .map(|r| match r {
        Ok(t) => Regularity::Regular(t),
        Err(f) => Regularity::NotRegular(f),
    })
}

type Built = Result<Result<CertificateTree, Failure>, Error>;

fn small(b: &BinaryMatrix) -> bool {
    b.nrows() < 3 || b.ncols() < 3
}

fn seq_for(child: &BinaryMatrix, seq: &NestedSequence) -> NestedSequence {
    let pos = child.label_positions();
    match seq.last() {
        Some((r, c))
            if r.iter().all(|l| matches!(pos.get(l), Some((true, _))))
                && c.iter().all(|l| matches!(pos.get(l), Some((false, _)))) =>
        {
            NestedSequence { members: seq.members.clone(), pivots: Vec::new() }
        }
        _ => NestedSequence::default(),
    }
}

fn build(b: BinaryMatrix, seq: NestedSequence, path: &mut Vec<Label>) -> Built {
    let mut node = CertificateTree::new(b.row_labels().to_vec(), b.col_labels().to_vec());
    if small(&b) {
        return Ok(Ok(node));
    }
    let protect = seq.labels();
    let (m0, reductions) = make_simple_protected(&b, &|l| protect.contains(&l));
    node.reductions = reductions;
    if small(&m0) {
        return Ok(Ok(node));
    }
    let comps = components_idx(&m0);
    if comps.len() > 1 {
        node.kind = NodeKind::OneSum;
        for (r, c) in comps {
            let sub = m0.submatrix(&r, &c);
            let child_seq = seq_for(&sub, &seq);
            match build(sub, child_seq, path)? {
                Ok(t) => node.children.push(t),
                Err(f) => return Ok(Err(f)),
            }
        }
        return Ok(Ok(node));
    }

    let (mut m, mut seq) = if seq.is_empty() {
        match find_b(&m0)? {
            FindB::W3 { matrix, seq } => (matrix, seq),
            FindB::Separation(_) => return Err(Error::Internal("connected matrix split by find_b".into())),
        }
    } else {
        (m0, NestedSequence { members: seq.members, pivots: Vec::new() })
    };
    let base = path.len();
    let result = grow_and_split(&mut node, &mut m, &mut seq, path);
    path.truncate(base);
    result
}

fn record_pivots(node: &mut CertificateTree, pivots: &[(Label, Label)], path: &mut Vec<Label>) {
    for &(r, c) in pivots {
        node.pivots.push(Pivot { row: r, col: c });
        path.push(r);
        path.push(c);
    }
}

fn failure_at(m: &BinaryMatrix, path: &[Label]) -> Failure {
    let mut pivoted: Vec<Label> = path.to_vec();
    pivoted.sort_unstable();
    pivoted.dedup();
    Failure::Decomposition {
        rows: m.row_labels().to_vec(),
        cols: m.col_labels().to_vec(),
        pivoted,
    }
}

fn grow_and_split(
    node: &mut CertificateTree,
    m: &mut BinaryMatrix,
    seq: &mut NestedSequence,
    path: &mut Vec<Label>,
) -> Built {
    loop {
        let (r, c) = seq.last().expect("non-empty sequence");
        if r.len() == m.nrows() && c.len() == m.ncols() {
            break;
        }
        match extend_b(m, seq)? {
            ExtendB::Extended { matrix, seq: s } => {
                *m = matrix;
                *seq = s;
            }
            ExtendB::Separation { matrix, seq: s, sep } => {
                *m = matrix;
                *seq = s;
                record_pivots(node, &seq.pivots, path);
                let keep = seq.labels();
                let d = decompose_2sum(m, &sep, &|l| keep.contains(&l))?;
                node.kind = NodeKind::TwoSum;
                node.connector = Some(d.connector.clone());
                for child in [d.b1, d.b2] {
                    let cs = seq_for(&child, seq);
                    match build(child, cs, path)? {
                        Ok(t) => node.children.push(t),
                        Err(f) => return Ok(Err(f)),
                    }
                }
                return Ok(Ok(take_node(node)));
            }
        }
    }
    record_pivots(node, &seq.pivots, path);

    if m.nrows() == 5 && m.ncols() == 5 && is_r10(m) {
        node.kind = NodeKind::LeafR10;
        return Ok(Ok(take_node(node)));
    }
    let g = test_graphicness(m, &seq.members)?;
    if g.graphic {
        node.kind = NodeKind::LeafGraphic;
        node.graph = g.graph;
        return Ok(Ok(take_node(node)));
    }
    let mt = m.transpose();
    let cg = test_graphicness(&mt, &transpose_members(&seq.members))?;
    if cg.graphic {
        node.kind = NodeKind::LeafCographic;
        node.graph = cg.graph;
        return Ok(Ok(take_node(node)));
    }
    let j_last = g.largest_graphic_index.max(cg.largest_graphic_index).saturating_sub(1);
    for pair in candidate_pairs(m, seq, j_last) {
        let Some(sep) = partition(m, &pair.t, &pair.complement, 3, 4) else {
            continue;
        };
        if sep.k() != 3 {
            continue;
        }
        let Ok(d) = decompose_3sum(m, &sep) else {
            continue;
        };
        record_pivots(node, &d.pivots, path);
        node.kind = NodeKind::ThreeSum;
        node.connector = Some(d.connector.clone());
        for child in [d.b1, d.b2] {
            match build(child, NestedSequence::default(), path)? {
                Ok(t) => node.children.push(t),
                Err(f) => return Ok(Err(f)),
            }
        }
        return Ok(Ok(take_node(node)));
    }
    Ok(Err(failure_at(m, path)))
}

fn take_node(n: &mut CertificateTree) -> CertificateTree {
    std::mem::replace(n, CertificateTree::new(vec![], vec![]))
}

/// Decides total unimodularity. With `want_certificate`, a failed
/// decomposition is followed by a minimal violator search.
pub fn is_totally_unimodular(a: &TernaryMatrix, want_certificate: bool) -> Result<TuResult, Error> {
    let s = sign_matrix(a, true);
    if let Some((rows, cols)) = s.first_violator {
        let v = violator_from(a, &rows, &cols, true);
        return Ok(TuResult {
            tu: false,
            certificate: None,
            violator: Some(v),
            failure: Some(Failure::Signing { rows, cols }),
        });
    }
    match decompose_matrix(&a.support(), &NestedSequence::default())? {
        Regularity::Regular(t) => Ok(TuResult { tu: true, certificate: Some(t), violator: None, failure: None }),
        Regularity::NotRegular(f) => {
            let violator = if want_certificate {
                Some(find_minimal_violator(a, Some(&f), 0)?)
            } else {
                None
            };
            Ok(TuResult { tu: false, certificate: None, violator, failure: Some(f) })
        }
    }
}

fn sorted_by_position(a: &TernaryMatrix, rows: &[Label], cols: &[Label]) -> (Vec<Label>, Vec<Label>) {
    let mut r: Vec<Label> = rows.to_vec();
    let mut c: Vec<Label> = cols.to_vec();
    r.sort_by_key(|&l| a.row_index(l));
    c.sort_by_key(|&l| a.col_index(l));
    (r, c)
}

fn violator_from(a: &TernaryMatrix, rows: &[Label], cols: &[Label], minimal: bool) -> Violator {
    let (rows, cols) = sorted_by_position(a, rows, cols);
    let det = det_ternary(&a.submatrix_by_labels(&rows, &cols));
    Violator { rows, cols, det, minimal }
}

/// Restricts `a` to the lines that can matter for a failure.
fn restrict_by_failure(a: &TernaryMatrix, f: &Failure) -> TernaryMatrix {
    match f {
        Failure::Signing { rows, cols } => {
            let (r, c) = sorted_by_position(a, rows, cols);
            a.submatrix_by_labels(&r, &c)
        }
        Failure::Decomposition { rows, cols, pivoted } => {
            let keep: HashSet<Label> = rows.iter().chain(cols).chain(pivoted).copied().collect();
            let r: Vec<Label> = a.row_labels().iter().copied().filter(|l| keep.contains(l)).collect();
            let c: Vec<Label> = a.col_labels().iter().copied().filter(|l| keep.contains(l)).collect();
            a.submatrix_by_labels(&r, &c)
        }
    }
}

/// None if `a` is t.u., otherwise where the test failed.
fn failure_of(a: &TernaryMatrix) -> Result<Option<Failure>, Error> {
    let s = sign_matrix(a, true);
    if let Some((rows, cols)) = s.first_violator {
        return Ok(Some(Failure::Signing { rows, cols }));
    }
    Ok(match decompose_matrix(&a.support(), &NestedSequence::default())? {
        Regularity::Regular(_) => None,
        Regularity::NotRegular(f) => Some(f),
    })
}

const SHRINK_START: f64 = 0.8;
const SHRINK_MIN_FRACTION: f64 = 0.05;
const SHRINK_MIN_LINES: usize = 4;

/// Finds a minimal non-t.u. square submatrix of `a`.
pub fn find_minimal_violator(a: &TernaryMatrix, failure: Option<&Failure>, seed: u64) -> Result<Violator, Error> {
    let f = match failure {
        Some(f) => f.clone(),
        None => failure_of(a)?.ok_or_else(|| Error::Precondition("matrix is totally unimodular".into()))?,
    };
    if let Failure::Signing { rows, cols } = &f {
        return Ok(violator_from(a, rows, cols, true));
    }
    let mut cur = restrict_by_failure(a, &f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // shrink by removing random fractions of rows or columns
    let mut frac = SHRINK_START;
    let mut rows_turn = cur.nrows() >= cur.ncols();
    loop {
        let side = if rows_turn { cur.nrows() } else { cur.ncols() };
        let count = (frac * side as f64).floor() as usize;
        if frac < SHRINK_MIN_FRACTION || count < SHRINK_MIN_LINES {
            break;
        }
        let mut idx: Vec<usize> = (0..side).collect();
        idx.shuffle(&mut rng);
        let mut keep: Vec<usize> = idx[count..].to_vec();
        keep.sort_unstable();
        let trial = if rows_turn {
            cur.submatrix(&keep, &(0..cur.ncols()).collect::<Vec<_>>())
        } else {
            cur.submatrix(&(0..cur.nrows()).collect::<Vec<_>>(), &keep)
        };
        match failure_of(&trial)? {
            Some(Failure::Signing { rows, cols }) => return Ok(violator_from(a, &rows, &cols, true)),
            Some(g) => {
                cur = restrict_by_failure(&trial, &g);
                frac = SHRINK_START;
            }
            None => frac /= 2.0,
        }
        rows_turn = !rows_turn;
    }

    // one line at a time
    for is_row in [true, false] {
        let labels: Vec<Label> = if is_row { cur.row_labels().to_vec() } else { cur.col_labels().to_vec() };
        for l in labels {
            let (r, c): (Vec<Label>, Vec<Label>) = if is_row {
                (cur.row_labels().iter().copied().filter(|&x| x != l).collect(), cur.col_labels().to_vec())
            } else {
                (cur.row_labels().to_vec(), cur.col_labels().iter().copied().filter(|&x| x != l).collect())
            };
            if r.is_empty() || c.is_empty() || (is_row && cur.row_index(l).is_none()) || (!is_row && cur.col_index(l).is_none()) {
                continue;
            }
            let trial = cur.submatrix_by_labels(&r, &c);
            match failure_of(&trial)? {
                Some(Failure::Signing { rows, cols }) => return Ok(violator_from(a, &rows, &cols, true)),
                Some(g) => cur = restrict_by_failure(&trial, &g),
                None => {}
            }
        }
    }
    if cur.nrows() != cur.ncols() {
        return Err(Error::Internal("violator search ended on a non-square matrix".into()));
    }
    Ok(violator_from(a, cur.row_labels(), cur.col_labels(), true))
}

/// Checks a violator against `a`: square, |det| >= 2 and, if flagged, minimal.
pub fn check_violator(a: &TernaryMatrix, v: &Violator) -> Result<(), Error> {
    if v.rows.len() != v.cols.len() || v.rows.is_empty() {
        return Err(Error::Input("violator is not square".into()));
    }
    let pos_ok = v.rows.iter().all(|&l| a.row_index(l).is_some()) && v.cols.iter().all(|&l| a.col_index(l).is_some());
    if !pos_ok {
        return Err(Error::Input("violator labels are not lines of the matrix".into()));
    }
    let sub = a.submatrix_by_labels(&v.rows, &v.cols);
    let d = det_ternary(&sub);
    if d.abs() < BigInt::from(2) || d != v.det {
        return Err(Error::Input(format!("violator determinant is {d}")));
    }
    if v.minimal && v.rows.len() > 1 {
        // every proper square submatrix lies in some single-line deletion
        let k = v.rows.len();
        let all: Vec<usize> = (0..k).collect();
        for i in 0..k {
            let rest: Vec<usize> = (0..k).filter(|&x| x != i).collect();
            for d in [sub.submatrix(&rest, &all), sub.submatrix(&all, &rest)] {
                if failure_of(&d)?.is_some() {
                    return Err(Error::Input("violator is not minimal".into()));
                }
            }
        }
    }
    Ok(())
}

/// Verifies a certificate against `a`; errors name the failing node path.
pub fn check_certificate(a: &TernaryMatrix, tree: &CertificateTree) -> Result<(), Error> {
    if sign_matrix(a, true).modified {
        return Err(Error::Input("root: matrix is not signed".into()));
    }
    let b = a.support();
    if tree.rows != b.row_labels() || tree.cols != b.col_labels() {
        return Err(Error::Input("root: labels differ from the matrix".into()));
    }
    check_node(&b, tree, "root")
}

pub fn verify_certificate(a: &TernaryMatrix, tree: &CertificateTree) -> bool {
    check_certificate(a, tree).is_ok()
}

fn check_node(b: &BinaryMatrix, node: &CertificateTree, at: &str) -> Result<(), Error> {
    let fail = |msg: &str| Err(Error::Input(format!("{at}: {msg}")));
    if node.rows != b.row_labels() || node.cols != b.col_labels() {
        return fail("labels differ from the derived matrix");
    }
    let mut m = b.clone();
    for red in &node.reductions {
        m = match apply_reduction(&m, red) {
            Some(x) => x,
            None => return fail(&format!("invalid reduction of {}", red.label)),
        };
    }
    for p in &node.pivots {
        match (m.row_index(p.row), m.col_index(p.col)) {
            (Some(i), Some(j)) if m.get(i, j) => m.pivot_at(i, j)?,
            _ => return fail(&format!("invalid pivot ({}, {})", p.row, p.col)),
        }
    }
    let leaf = matches!(
        node.kind,
        NodeKind::LeafGraphic | NodeKind::LeafCographic | NodeKind::LeafR10 | NodeKind::LeafSmall
    );
    if leaf && !node.children.is_empty() {
        return fail("leaf with children");
    }
    let needs_graph = matches!(node.kind, NodeKind::LeafGraphic | NodeKind::LeafCographic);
    if needs_graph != node.graph.is_some() {
        return fail("graph present on the wrong kind of node");
    }
    let needs_conn = matches!(node.kind, NodeKind::TwoSum | NodeKind::ThreeSum);
    if needs_conn != node.connector.is_some() {
        return fail("connector present on the wrong kind of node");
    }
    let subs = |want: usize| -> Result<Vec<BinaryMatrix>, Error> {
        if node.children.len() != want && want != 0 {
            return Err(Error::Input(format!("{at}: expected {want} children")));
        }
        node.children
            .iter()
            .enumerate()
            .map(|(k, c)| {
                m.submatrix_by_labels(&c.rows, &c.cols)
                    .ok_or_else(|| Error::Input(format!("{at}/{k}: child labels not in parent")))
            })
            .collect()
    };
    let children_ok = |subs: &[BinaryMatrix]| -> Result<(), Error> {
        for (k, (c, s)) in node.children.iter().zip(subs).enumerate() {
            check_node(s, c, &format!("{at}/{k}"))?;
        }
        Ok(())
    };
    match node.kind {
        NodeKind::LeafSmall => {
            if !small(&m) {
                return fail("small leaf has at least 3 rows and columns");
            }
        }
        NodeKind::LeafR10 => {
            if !is_r10(&m) {
                return fail("not an R10 matrix");
            }
        }
        NodeKind::LeafGraphic => {
            if !node.graph.as_ref().unwrap().realizes(&m) {
                return fail("graph does not realize the matrix");
            }
        }
        NodeKind::LeafCographic => {
            if !node.graph.as_ref().unwrap().realizes(&m.transpose()) {
                return fail("graph does not realize the transpose");
            }
        }
        NodeKind::OneSum => {
            if node.children.len() < 2 {
                return fail("1-sum needs at least two children");
            }
            let s = subs(0)?;
            let mut seen: HashSet<Label> = HashSet::new();
            let mut ones = 0;
            for c in &s {
                for &l in c.row_labels().iter().chain(c.col_labels()) {
                    if !seen.insert(l) {
                        return fail(&format!("label {l} in two children"));
                    }
                }
                ones += c.count_ones();
            }
            if seen.len() != m.nrows() + m.ncols() || ones != m.count_ones() {
                return fail("children do not form a block decomposition");
            }
            children_ok(&s)?;
        }
        NodeKind::TwoSum => {
            let s = subs(2)?;
            let Some(Connector::Two { x, y }) = node.connector else {
                return fail("2-sum needs a two-label connector");
            };
            match overlay_2sum(&s[0], &s[1], x, y) {
                Some(o) if same_by_labels(&m, &o) => {}
                _ => return fail("2-sum overlay does not reproduce the matrix"),
            }
            if s.iter().any(|c| c.length() >= m.length()) {
                return fail("2-sum component is not smaller");
            }
            children_ok(&s)?;
        }
        NodeKind::ThreeSum => {
            let s = subs(2)?;
            let conn = node.connector.as_ref().unwrap();
            if !matches!(conn, Connector::Three { .. }) {
                return fail("3-sum needs a three-part connector");
            }
            match overlay_3sum(&s[0], &s[1], conn) {
                Some(o) if same_by_labels(&m, &o) => {}
                _ => return fail("3-sum overlay does not reproduce the matrix"),
            }
            if s.iter().any(|c| c.length() >= m.length()) {
                return fail("3-sum component is not smaller");
            }
            children_ok(&s)?;
        }
    }
    Ok(())
}

fn apply_reduction(m: &BinaryMatrix, r: &Reduction) -> Option<BinaryMatrix> {
    let w = if r.is_row { m.clone() } else { m.transpose() };
    let i = w.row_index(r.label)?;
    let row = w.row(i);
    let ok = match r.kind {
        ReductionKind::Zero => row.is_zero() && r.representative.is_none(),
        ReductionKind::Unit => {
            row.count_ones() == 1
                && r.representative.and_then(|p| w.col_index(p)) == row.first_one()
        }
        ReductionKind::DupRow | ReductionKind::DupCol => {
            (r.kind == ReductionKind::DupRow) == r.is_row
                && match r.representative.and_then(|p| w.row_index(p)) {
                    Some(k) => k != i && w.row(k) == row,
                    None => false,
                }
        }
    };
    if !ok {
        return None;
    }
    let d = w.delete(&[i], &[]);
    Some(if r.is_row { d } else { d.transpose() })
}

/// A copy of `tree` with one field changed so that the certificate becomes
/// invalid. `k` selects the mutation deterministically.
pub fn mutate_certificate(tree: &CertificateTree, k: u64) -> Option<CertificateTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(k);
    let mut t = tree.clone();
    let paths = t.node_paths();
    let count = paths.len();
    for _ in 0..64 {
        let which = rand::Rng::gen_range(&mut rng, 0..count);
        let kind = rand::Rng::gen_range(&mut rng, 0..6u8);
        let foreign = Label::row(1 << 30);
        let n = t.node_at_mut(&paths[which]);
        let changed = match kind {
            // an extra label no matrix has
            0 => {
                n.rows.push(foreign);
                true
            }
            // duplicated label
            1 if !n.cols.is_empty() => {
                let c = n.cols[0];
                n.cols.push(c);
                true
            }
            // graph: extra isolated vertex, or a cotree endpoint moved
            2 if n.graph.is_some() => {
                n.graph.as_mut().unwrap().vertices += 1;
                true
            }
            3 if n.graph.as_ref().is_some_and(|g| !g.cotree.is_empty() && g.vertices >= 3) => {
                let g = n.graph.as_mut().unwrap();
                let e = &mut g.cotree[0];
                let third = (0..g.vertices).find(|&v| v != e.u && v != e.v).unwrap();
                e.v = third;
                true
            }
            // wrong leaf type
            4 if matches!(n.kind, NodeKind::LeafGraphic | NodeKind::LeafCographic) => {
                n.kind = if n.kind == NodeKind::LeafGraphic { NodeKind::LeafCographic } else { NodeKind::LeafGraphic };
                true
            }
            // connector label replaced
            5 if n.connector.is_some() => {
                match n.connector.as_mut().unwrap() {
                    Connector::Two { x, .. } => *x = foreign,
                    Connector::Three { xbar1, .. } => *xbar1 = foreign,
                }
                true
            }
            _ => false,
        };
        if changed {
            return Some(t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::brute_force_tu;
    use proptest::prelude::*;

    fn tm(rows: &[&[i64]]) -> TernaryMatrix {
        TernaryMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn identity(n: usize) -> TernaryMatrix {
        let mut a = TernaryMatrix::zeros(n, n);
        for i in 0..n {
            a.set(i, i, 1);
        }
        a
    }

    #[test]
    fn identity_is_tu() {
        let a = identity(6);
        let r = is_totally_unimodular(&a, true).unwrap();
        assert!(r.tu);
        assert!(verify_certificate(&a, r.certificate.as_ref().unwrap()));
    }

    #[test]
    fn det_two_detected_by_signing() {
        let a = tm(&[&[1, 1], &[1, -1]]);
        let r = is_totally_unimodular(&a, false).unwrap();
        assert!(!r.tu);
        let v = r.violator.unwrap();
        assert_eq!(v.det.abs(), BigInt::from(2));
        assert_eq!(v.rows.len(), 2);
    }

    #[test]
    fn small_binary_is_regular() {
        let b = BinaryMatrix::from_rows(&[vec![1u8, 1, 0, 1, 1], vec![0, 1, 1, 1, 0]]);
        match decompose_matrix(&b, &NestedSequence::default()).unwrap() {
            Regularity::Regular(t) => assert_eq!(t.kind, NodeKind::LeafSmall),
            _ => panic!(),
        }
    }

    #[test]
    fn r10_is_a_leaf() {
        let [c, _] = crate::decomposition::r10_canonical();
        match decompose_matrix(&c, &NestedSequence::default()).unwrap() {
            Regularity::Regular(t) => assert_eq!(t.kind, NodeKind::LeafR10),
            _ => panic!(),
        }
    }

    #[test]
    fn block_diagonal_is_one_sum_of_graphic_leaves() {
        let w = [[1i64, 1, 0], [1, 0, 1], [0, 1, 1]];
        let mut rows = vec![vec![0i64; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                rows[i][j] = w[i][j];
                rows[i + 3][j + 3] = w[i][j];
            }
        }
        let a = sign_matrix(&TernaryMatrix::from_rows(&rows).unwrap(), false).result;
        let r = is_totally_unimodular(&a, true).unwrap();
        let t = r.certificate.unwrap();
        assert_eq!(t.kind, NodeKind::OneSum);
        assert_eq!(t.children.len(), 2);
        assert!(t.children.iter().all(|c| c.kind == NodeKind::LeafGraphic));
        assert!(verify_certificate(&a, &t));
    }

    #[test]
    fn fano_is_not_regular() {
        let f7 = BinaryMatrix::from_rows(&[vec![1u8, 1, 0, 1], vec![1, 0, 1, 1], vec![0, 1, 1, 1]]);
        assert!(matches!(
            decompose_matrix(&f7, &NestedSequence::default()).unwrap(),
            Regularity::NotRegular(_)
        ));
    }

    #[test]
    fn json_round_trip() {
        let a = sign_matrix(&tm(&[&[1, 1, 0, 1], &[1, 0, 1, 1], &[0, 1, 1, 0], &[1, 1, 1, 1]]), false).result;
        let r = is_totally_unimodular(&a, true).unwrap();
        if let Some(t) = r.certificate {
            let j = t.to_json();
            let back = CertificateTree::from_json(&j).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_json(), j);
        }
    }

    #[test]
    fn tampered_graph_rejected() {
        let a = tm(&[&[1, 1, 1, 0, 0], &[0, 1, 1, 1, 0], &[0, 0, 1, 1, 1], &[1, 1, 0, 0, 0], &[0, 1, 1, 1, 1]]);
        let r = is_totally_unimodular(&a, true).unwrap();
        let t = r.certificate.unwrap();
        assert!(verify_certificate(&a, &t));
        for k in 0..20 {
            if let Some(bad) = mutate_certificate(&t, k) {
                assert!(!verify_certificate(&a, &bad), "mutation {k} accepted");
            }
        }
    }

    #[test]
    fn violator_of_odd_cycle() {
        let a = tm(&[
            &[1, 1, 0, 1, 1],
            &[0, 1, 1, 1, 1],
            &[0, 0, 1, 1, 0],
            &[0, 0, 0, 1, 1],
            &[1, 0, 0, 0, 1],
        ]);
        let r = is_totally_unimodular(&a, true).unwrap();
        assert!(!r.tu);
        let v = r.violator.unwrap();
        check_violator(&a, &v).unwrap();
    }

    fn arb_ternary(max: usize) -> impl Strategy<Value = TernaryMatrix> {
        (1..=max, 1..=max).prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::collection::vec(-1i64..=1, n), m)
                .prop_map(|rows| TernaryMatrix::from_rows(&rows).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn agrees_with_brute_force(a in arb_ternary(6)) {
            let r = is_totally_unimodular(&a, true).unwrap();
            prop_assert_eq!(r.tu, brute_force_tu(&a).unwrap().is_tu());
            if let Some(t) = &r.certificate {
                prop_assert!(verify_certificate(&a, t));
            }
            if let Some(v) = &r.violator {
                prop_assert!(check_violator(&a, v).is_ok());
            }
        }

        #[test]
        fn transpose_invariant(a in arb_ternary(6)) {
            let x = is_totally_unimodular(&a, false).unwrap().tu;
            let y = is_totally_unimodular(&a.transpose(), false).unwrap().tu;
            prop_assert_eq!(x, y);
        }

        #[test]
        fn negation_invariant(a in arb_ternary(6), i in 0usize..6) {
            let mut b = a.clone();
            let r = i % b.nrows();
            for j in 0..b.ncols() {
                let v = b.get(r, j);
                b.set(r, j, -v);
            }
            prop_assert_eq!(
                is_totally_unimodular(&a, false).unwrap().tu,
                is_totally_unimodular(&b, false).unwrap().tu
            );
        }
    }
}
