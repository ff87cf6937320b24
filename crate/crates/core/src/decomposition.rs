//! Structure discovery for the regularity test: W3 search, growth of nested
//! 3-connected submatrices, separation search, sum decompositions and R10.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::bits::{rank_of, Bits, EchelonBasis};
use crate::error::Error;
use crate::graphic::star_realization;
use crate::matrix::{components_idx, BinaryMatrix, Label, Separation};

/// Nested submatrices `N^1 ⊂ … ⊂ N^k` of an ambient matrix, each given by
/// (row labels, column labels), and the pivots applied to reach them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NestedSequence {
    pub members: Vec<(Vec<Label>, Vec<Label>)>,
    pub pivots: Vec<(Label, Label)>,
}

impl NestedSequence {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn last(&self) -> Option<&(Vec<Label>, Vec<Label>)> {
        self.members.last()
    }

    /// Length s(N^i) for the 0-based member index.
    pub fn length(&self, i: usize) -> usize {
        self.members[i].0.len() + self.members[i].1.len()
    }

    pub fn elements(&self, i: usize) -> Vec<Label> {
        let (r, c) = &self.members[i];
        r.iter().chain(c.iter()).copied().collect()
    }

    pub fn labels(&self) -> HashSet<Label> {
        self.members.last().map_or_else(HashSet::new, |(r, c)| {
            r.iter().chain(c.iter()).copied().collect()
        })
    }

    pub fn submatrix(&self, b: &BinaryMatrix, i: usize) -> Option<BinaryMatrix> {
        b.submatrix_by_labels(&self.members[i].0, &self.members[i].1)
    }
}

/// Pivots at positions and records the label pair (row label before the pivot first).
fn pivot_record(b: &mut BinaryMatrix, i: usize, j: usize, log: &mut Vec<(Label, Label)>) {
    let (x, y) = (b.row_labels()[i], b.col_labels()[j]);
    b.pivot_at(i, j).expect("pivot on a 1-entry");
    log.push((x, y));
}

#[derive(Clone, Debug)]
pub enum FindB {
    Separation(Separation),
    W3 { matrix: BinaryMatrix, seq: NestedSequence },
}

/// Locates a W3 submatrix, pivoting as needed, or a 1-separation if `b` is disconnected.
pub fn find_b(b: &BinaryMatrix) -> Result<FindB, Error> {
    if b.nrows() < 3 || b.ncols() < 3 {
        return Err(Error::Precondition("matrix needs at least 3 rows and 3 columns".into()));
    }
    let comps = components_idx(b);
    if comps.len() > 1 {
        let (r, c) = &comps[0];
        let side: HashSet<Label> = r
            .iter()
            .map(|&i| b.row_labels()[i])
            .chain(c.iter().map(|&j| b.col_labels()[j]))
            .collect();
        return Ok(FindB::Separation(Separation::from_side(b, |l| side.contains(&l))));
    }
    if !crate::matrix::is_simple(b) {
        return Err(Error::Precondition("matrix is not simple".into()));
    }
    let mut m = b.clone();
    let mut pivots = Vec::new();
    let (rows, cols) = if let Some((r1, a, bb, c1, c2, c3)) = seven_ones(&m) {
        // rows r1,a,bb and cols c1,c2,c3 hold [[1,1,1],[1,1,0],[1,0,1]]
        pivot_record(&mut m, a, c2, &mut pivots);
        (vec![r1, a, bb], vec![c1, c2, c3])
    } else if let Some((mut rs, mut cs)) = hole(&m) {
        while rs.len() > 3 {
            pivot_record(&mut m, rs[1], cs[1], &mut pivots);
            rs.remove(1);
            cs.remove(1);
        }
        (rs, cs)
    } else {
        return Err(Error::Internal("no W3 submatrix found in a simple connected matrix".into()));
    };
    let w3 = m.submatrix(&rows, &cols);
    if star_realization(&w3).is_none() {
        return Err(Error::Internal("W3 normalization failed".into()));
    }
    let member = (w3.row_labels().to_vec(), w3.col_labels().to_vec());
    Ok(FindB::W3 { matrix: m, seq: NestedSequence { members: vec![member], pivots } })
}

/// Finds a 1-entry (r1, c1) whose column neighbours, restricted to the row's
/// other support, are not a chain. Returns positions (r1, a, b, c1, c2, c3).
fn seven_ones(b: &BinaryMatrix) -> Option<(usize, usize, usize, usize, usize, usize)> {
    for r1 in 0..b.nrows() {
        for c1 in b.row(r1).ones() {
            let mut s = b.row(r1).clone();
            s.set(c1, false);
            if s.count_ones() < 2 {
                continue;
            }
            let mut t: Vec<(usize, usize)> = b
                .col(c1)
                .ones()
                .filter(|&i| i != r1)
                .map(|i| (b.row(i).count_ones_masked(&s), i))
                .collect();
            t.sort_unstable();
            for w in t.windows(2) {
                let (a, bb) = (w[0].1, w[1].1);
                let ra = b.row(a).and(&s);
                let rb = b.row(bb).and(&s);
                let only_a = ra.ones().find(|&j| !rb.get(j));
                let only_b = rb.ones().find(|&j| !ra.get(j));
                if let (Some(c2), Some(c3)) = (only_a, only_b) {
                    return Some((r1, a, bb, c1, c2, c3));
                }
            }
        }
    }
    None
}

/// Finds a chordless cycle of length at least 6 in BG(B) as rows r_1..r_k and
/// columns c_1..c_k with B[r_i, c_i] = B[r_{i+1}, c_i] = 1 (cyclically).
fn hole(b: &BinaryMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let (m, n) = (b.nrows(), b.ncols());
    for ry in 0..m {
        for cz in b.row(ry).ones() {
            let ny = b.row(ry);
            let nz = b.col(cz);
            for w in nz.ones().filter(|&w| w != ry) {
                // BFS from row w; interior avoids N(ry) ∪ N(cz)
                let mut row_par = vec![usize::MAX; m];
                let mut col_par = vec![usize::MAX; n];
                let mut row_seen = vec![false; m];
                let mut col_seen = vec![false; n];
                row_seen[w] = true;
                let mut q: VecDeque<usize> = VecDeque::from([w]);
                let mut found: Option<(usize, usize)> = None;
                'bfs: while let Some(v) = q.pop_front() {
                    for c in b.row(v).ones() {
                        if c == cz || col_seen[c] {
                            continue;
                        }
                        if ny.get(c) {
                            if v != w && !b.get(w, c) {
                                found = Some((v, c));
                                break 'bfs;
                            }
                            continue;
                        }
                        col_seen[c] = true;
                        col_par[c] = v;
                        for u in b.col(c).ones() {
                            if u == ry || nz.get(u) || row_seen[u] {
                                continue;
                            }
                            row_seen[u] = true;
                            row_par[u] = c;
                            q.push_back(u);
                        }
                    }
                }
                if let Some((v, x)) = found {
                    // path w .. v, then x
                    let mut path_rows = vec![v];
                    let mut path_cols = vec![];
                    let mut cur = v;
                    while cur != w {
                        let c = row_par[cur];
                        path_cols.push(c);
                        cur = col_par[c];
                        path_rows.push(cur);
                    }
                    path_rows.reverse();
                    path_cols.reverse();
                    let mut rs = vec![ry];
                    let mut cs = vec![cz];
                    rs.extend(path_rows);
                    cs.extend(path_cols);
                    cs.push(x);
                    return Some((rs, cs));
                }
            }
        }
    }
    None
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum LineType {
    Zero,
    Unit,
    Dup,
    Other,
}

#[derive(Clone, Debug)]
pub enum ExtendB {
    Extended { matrix: BinaryMatrix, seq: NestedSequence },
    Separation { matrix: BinaryMatrix, seq: NestedSequence, sep: Separation },
}

/// Grows the sequence by a 3-connected submatrix at most three longer, or returns a 1- or 2-separation.
pub fn extend_b(b: &BinaryMatrix, seq: &NestedSequence) -> Result<ExtendB, Error> {
    let Some((nr, nc)) = seq.last() else {
        return Err(Error::Input("empty sequence".into()));
    };
    if nr.len() == b.nrows() && nc.len() == b.ncols() {
        return Err(Error::Precondition("sequence already spans the matrix".into()));
    }
    let pos = b.label_positions();
    let mut in_r = vec![false; b.nrows()];
    let mut in_c = vec![false; b.ncols()];
    for l in nr {
        match pos.get(l) {
            Some(&(true, i)) => in_r[i] = true,
            _ => return Err(Error::Input(format!("{l} is not a row of the matrix"))),
        }
    }
    for l in nc {
        match pos.get(l) {
            Some(&(false, j)) => in_c[j] = true,
            _ => return Err(Error::Input(format!("{l} is not a column of the matrix"))),
        }
    }
    let comps = components_idx(b);
    if comps.len() > 1 {
        let (r, c) = comps
            .iter()
            .find(|(r, c)| r.iter().any(|&i| in_r[i]) || c.iter().any(|&j| in_c[j]))
            .expect("sequence component");
        let side: HashSet<Label> = r
            .iter()
            .map(|&i| b.row_labels()[i])
            .chain(c.iter().map(|&j| b.col_labels()[j]))
            .collect();
        let sep = Separation::from_side(b, |l| side.contains(&l));
        return Ok(ExtendB::Separation { matrix: b.clone(), seq: seq.clone(), sep });
    }

    let m = b.clone();
    let mut seq = seq.clone();
    let rmask = Bits::from_indices(m.nrows(), (0..m.nrows()).filter(|&i| in_r[i]));
    let cmask = Bits::from_indices(m.ncols(), (0..m.ncols()).filter(|&j| in_c[j]));
    let row_types = classify(&m, &in_r, &cmask, false);
    let col_types = classify(&m, &in_c, &rmask, true);

    // a single non-degenerate line always extends
    let mut singles: Vec<(Label, bool, usize)> = Vec::new();
    for (i, t) in row_types.iter().enumerate() {
        if *t == Some(LineType::Other) {
            singles.push((m.row_labels()[i], true, i));
        }
    }
    for (j, t) in col_types.iter().enumerate() {
        if *t == Some(LineType::Other) {
            singles.push((m.col_labels()[j], false, j));
        }
    }
    if let Some(&(_, is_row, k)) = singles.iter().min() {
        let (rows, cols) = if is_row { (vec![k], vec![]) } else { (vec![], vec![k]) };
        push_member(&m, &mut seq, &rows, &cols);
        return Ok(ExtendB::Extended { matrix: m, seq });
    }

    let attached = |t: Option<LineType>| matches!(t, Some(LineType::Unit) | Some(LineType::Dup));
    // attached row and attached column meeting in a 1
    let mut pairs: Vec<(Label, usize, usize)> = Vec::new();
    for i in (0..m.nrows()).filter(|&i| attached(row_types[i])) {
        for j in m.row(i).ones().filter(|&j| attached(col_types[j])) {
            pairs.push((m.row_labels()[i].min(m.col_labels()[j]), i, j));
        }
    }
    pairs.sort_unstable();
    for &(_, i, j) in &pairs {
        if is_3connected_extension(&m, &in_r, &in_c, &[i], &[j]) {
            push_member(&m, &mut seq, &[i], &[j]);
            return Ok(ExtendB::Extended { matrix: m, seq });
        }
    }

    // shortest paths between attached lines through zero-type lines, shortened by pivots
    let mut starts: Vec<(Label, bool, usize)> = Vec::new();
    for (i, t) in row_types.iter().enumerate() {
        if attached(*t) {
            starts.push((m.row_labels()[i], true, i));
        }
    }
    for (j, t) in col_types.iter().enumerate() {
        if attached(*t) {
            starts.push((m.col_labels()[j], false, j));
        }
    }
    starts.sort_unstable();
    let mut tried: HashSet<([(bool, usize); 2], usize)> = HashSet::new();
    for &(_, is_row, k) in &starts {
        let mut paths = attached_paths(&m, &row_types, &col_types, is_row, k, false);
        paths.extend(attached_paths(&m, &row_types, &col_types, is_row, k, true));
        for path in paths {
            let mut key = [path[0], path[path.len() - 1]];
            key.sort_unstable();
            if path.len() == 2 || !tried.insert((key, path.len())) {
                continue;
            }
            // pivot on interior pairs of a scratch copy until three lines remain
            let mut mm = m.clone();
            let mut piv = Vec::new();
            let mut path = path;
            while path.len() > 3 {
                let (a_row, a) = path[path.len() - 3];
                let (_, c) = path[path.len() - 2];
                let (pi, pj) = if a_row { (a, c) } else { (c, a) };
                if !mm.get(pi, pj) {
                    break;
                }
                pivot_record(&mut mm, pi, pj, &mut piv);
                let n = path.len();
                path.drain(n - 3..n - 1);
            }
            if path.len() > 3 {
                continue;
            }
            let rows: Vec<usize> = path.iter().filter(|e| e.0).map(|e| e.1).collect();
            let cols: Vec<usize> = path.iter().filter(|e| !e.0).map(|e| e.1).collect();
            if is_3connected_extension(&mm, &in_r, &in_c, &rows, &cols) {
                seq.pivots.extend(piv);
                push_member(&mm, &mut seq, &rows, &cols);
                return Ok(ExtendB::Extended { matrix: mm, seq });
            }
        }
    }

    // duplicate row and duplicate column meeting in a 0 break both parallel pairs
    for i in (0..m.nrows()).filter(|&i| row_types[i] == Some(LineType::Dup)) {
        for j in (0..m.ncols()).filter(|&j| col_types[j] == Some(LineType::Dup) && !m.get(i, j)) {
            if is_3connected_extension(&m, &in_r, &in_c, &[i], &[j]) {
                push_member(&m, &mut seq, &[i], &[j]);
                return Ok(ExtendB::Extended { matrix: m, seq });
            }
        }
    }

    // no extension: a 2-separation must exist
    match two_separation(&m, &in_r, &in_c, &row_types, &col_types) {
        Some(sep) => Ok(ExtendB::Separation { matrix: m, seq, sep }),
        None => Err(Error::Internal("extension search incomplete".into())),
    }
}

fn push_member(m: &BinaryMatrix, seq: &mut NestedSequence, rows: &[usize], cols: &[usize]) {
    let (mut r, mut c) = seq.members.last().cloned().unwrap_or_default();
    let mut rows = rows.to_vec();
    let mut cols = cols.to_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    r.extend(rows.iter().map(|&i| m.row_labels()[i]));
    c.extend(cols.iter().map(|&j| m.col_labels()[j]));
    seq.members.push((r, c));
}

/// Type of each line outside N (None for lines of N), by its restriction to N.
fn classify(m: &BinaryMatrix, in_n: &[bool], mask: &Bits, cols: bool) -> Vec<Option<LineType>> {
    let count = if cols { m.ncols() } else { m.nrows() };
    let line = |k: usize| if cols { m.col(k) } else { m.row(k) };
    let mut seen: HashSet<Bits> = HashSet::new();
    for k in (0..count).filter(|&k| in_n[k]) {
        seen.insert(line(k).and(mask));
    }
    (0..count)
        .map(|k| {
            if in_n[k] {
                return None;
            }
            let v = line(k).and(mask);
            Some(match v.count_ones() {
                0 => LineType::Zero,
                1 => LineType::Unit,
                _ if seen.contains(&v) => LineType::Dup,
                _ => LineType::Other,
            })
        })
        .collect()
}

/// Shortest paths in BG of the complement from an attached line to every
/// other attached line, with all interior lines zero-type. Entries are (is_row, index).
fn attached_paths(
    m: &BinaryMatrix,
    row_types: &[Option<LineType>],
    col_types: &[Option<LineType>],
    start_row: bool,
    start: usize,
    via_interior: bool,
) -> Vec<Vec<(bool, usize)>> {
    let mut row_par: Vec<Option<usize>> = vec![None; m.nrows()];
    let mut col_par: Vec<Option<usize>> = vec![None; m.ncols()];
    let mut row_seen = vec![false; m.nrows()];
    let mut col_seen = vec![false; m.ncols()];
    if start_row {
        row_seen[start] = true;
    } else {
        col_seen[start] = true;
    }
    let mut q: VecDeque<(bool, usize)> = VecDeque::from([(start_row, start)]);
    let attached = |t: Option<LineType>| matches!(t, Some(LineType::Unit) | Some(LineType::Dup));
    let mut out = Vec::new();
    while let Some((is_row, v)) = q.pop_front() {
        let (nbrs, types): (Vec<usize>, &[Option<LineType>]) = if is_row {
            (m.row(v).ones().collect(), col_types)
        } else {
            (m.col(v).ones().collect(), row_types)
        };
        for u in nbrs {
            let seen = if is_row { &mut col_seen } else { &mut row_seen };
            if seen[u] || types[u].is_none() {
                continue;
            }
            let from_start = (is_row, v) == (start_row, start);
            if via_interior && from_start && attached(types[u]) {
                continue;
            }
            seen[u] = true;
            if is_row {
                col_par[u] = Some(v);
            } else {
                row_par[u] = Some(v);
            }
            if attached(types[u]) {
                let mut path = vec![(!is_row, u)];
                let (mut cr, mut cv) = (!is_row, u);
                while !(cr == start_row && cv == start) {
                    cv = if cr { row_par[cv] } else { col_par[cv] }.unwrap();
                    cr = !cr;
                    path.push((cr, cv));
                }
                path.reverse();
                out.push(path);
            } else if types[u] == Some(LineType::Zero) {
                q.push_back((!is_row, u));
            }
        }
    }
    out
}

/// λ(Z) = rank B[X \ X1, Y1] + rank B[X1, Y \ Y1] inside the submatrix given by masks.
fn lambda(m: &BinaryMatrix, rmask: &Bits, cmask: &Bits, zr: &[usize], zc: &[usize]) -> usize {
    let mut rows_out = rmask.clone();
    for &i in zr {
        rows_out.set(i, false);
    }
    let mut cols_out = cmask.clone();
    for &j in zc {
        cols_out.set(j, false);
    }
    let a = rank_of(zc.iter().map(|&j| m.col(j).and(&rows_out)).collect());
    let b = rank_of(zr.iter().map(|&i| m.row(i).and(&cols_out)).collect());
    a + b
}

/// Checks 3-connectivity of N plus the given lines, assuming N is 3-connected.
fn is_3connected_extension(
    m: &BinaryMatrix,
    in_r: &[bool],
    in_c: &[bool],
    new_rows: &[usize],
    new_cols: &[usize],
) -> bool {
    let mut rmask = Bits::from_indices(m.nrows(), (0..m.nrows()).filter(|&i| in_r[i]));
    let mut cmask = Bits::from_indices(m.ncols(), (0..m.ncols()).filter(|&j| in_c[j]));
    for &i in new_rows {
        rmask.set(i, true);
    }
    for &j in new_cols {
        cmask.set(j, true);
    }
    let total = rmask.count_ones() + cmask.count_ones();
    let new: Vec<(bool, usize)> = new_rows
        .iter()
        .map(|&i| (true, i))
        .chain(new_cols.iter().map(|&j| (false, j)))
        .collect();
    let olds: Vec<(bool, usize)> = (0..m.nrows())
        .filter(|&i| in_r[i])
        .map(|i| (true, i))
        .chain((0..m.ncols()).filter(|&j| in_c[j]).map(|j| (false, j)))
        .collect();
    for mask in 1u32..(1 << new.len()) {
        let mut zr = Vec::new();
        let mut zc = Vec::new();
        for (k, &(r, x)) in new.iter().enumerate() {
            if mask >> k & 1 == 1 {
                if r {
                    zr.push(x);
                } else {
                    zc.push(x);
                }
            }
        }
        for e in std::iter::once(None).chain(olds.iter().map(Some)) {
            let (mut r2, mut c2) = (zr.clone(), zc.clone());
            if let Some(&(r, x)) = e {
                if r {
                    r2.push(x);
                } else {
                    c2.push(x);
                }
            }
            let size = r2.len() + c2.len();
            let lam = lambda(m, &rmask, &cmask, &r2, &c2);
            if size < total && lam == 0 {
                return false;
            }
            if size >= 2 && total - size >= 2 && lam <= 1 {
                return false;
            }
        }
    }
    true
}

/// Searches for a 2-separation of `m` one side of which holds at most one element of N.
fn two_separation(
    m: &BinaryMatrix,
    in_r: &[bool],
    in_c: &[bool],
    row_types: &[Option<LineType>],
    col_types: &[Option<LineType>],
) -> Option<Separation> {
    let n_elems: Vec<Label> = (0..m.nrows())
        .filter(|&i| in_r[i])
        .map(|i| m.row_labels()[i])
        .chain((0..m.ncols()).filter(|&j| in_c[j]).map(|j| m.col_labels()[j]))
        .collect();
    let attached = |t: Option<LineType>| matches!(t, Some(LineType::Unit) | Some(LineType::Dup));
    for i in (0..m.nrows()).filter(|&i| attached(row_types[i])) {
        if let Some(s) = partition(m, &[m.row_labels()[i]], &n_elems, 2, 2) {
            return Some(s);
        }
    }
    for j in (0..m.ncols()).filter(|&j| attached(col_types[j])) {
        if let Some(s) = partition(m, &[m.col_labels()[j]], &n_elems, 2, 2) {
            return Some(s);
        }
    }
    for i in 0..m.nrows() {
        for j in m.row(i).ones() {
            let (ri, cj) = (m.row_labels()[i], m.col_labels()[j]);
            let pairs = [
                (row_types[i] == Some(LineType::Zero), ri, cj),
                (col_types[j] == Some(LineType::Zero), cj, ri),
            ];
            for (zero, f, g) in pairs {
                if !zero {
                    continue;
                }
                let mut p2 = n_elems.clone();
                p2.push(g);
                if let Some(s) = partition(m, &[f], &p2, 2, 2) {
                    return Some(s);
                }
            }
        }
    }
    for &e in &n_elems {
        let p2: Vec<Label> = n_elems.iter().copied().filter(|&x| x != e).collect();
        if let Some(s) = partition(m, &[e], &p2, 2, 2) {
            return Some(s);
        }
    }
    None
}

/// Extends the partial separation (P1 | P2) to all lines keeping the
/// off-diagonal rank sum at most `k - 1`, with both sides of length at least `min_side`.
pub fn partition(
    b: &BinaryMatrix,
    p1: &[Label],
    p2: &[Label],
    k: usize,
    min_side: usize,
) -> Option<Separation> {
    let (mr, nc) = (b.nrows(), b.ncols());
    let pos = b.label_positions();
    // 0 = unassigned, 1, 2 = side
    let mut ra = vec![0u8; mr];
    let mut ca = vec![0u8; nc];
    for (side, set) in [(1u8, p1), (2u8, p2)] {
        for l in set {
            match pos.get(l)? {
                &(true, i) => {
                    if ra[i] != 0 {
                        return None;
                    }
                    ra[i] = side;
                }
                &(false, j) => {
                    if ca[j] != 0 {
                        return None;
                    }
                    ca[j] = side;
                }
            }
        }
    }
    loop {
        let x1 = Bits::from_indices(mr, (0..mr).filter(|&i| ra[i] == 1));
        let x2 = Bits::from_indices(mr, (0..mr).filter(|&i| ra[i] == 2));
        let y1 = Bits::from_indices(nc, (0..nc).filter(|&j| ca[j] == 1));
        let y2 = Bits::from_indices(nc, (0..nc).filter(|&j| ca[j] == 2));
        let mut d_rows = EchelonBasis::new();
        let mut e_rows = EchelonBasis::new();
        let mut d_cols = EchelonBasis::new();
        let mut e_cols = EchelonBasis::new();
        for i in x2.ones() {
            d_rows.insert(b.row(i).and(&y1));
        }
        for i in x1.ones() {
            e_rows.insert(b.row(i).and(&y2));
        }
        if d_rows.rank() + e_rows.rank() > k - 1 {
            return None;
        }
        for j in y1.ones() {
            d_cols.insert(b.col(j).and(&x2));
        }
        for j in y2.ones() {
            e_cols.insert(b.col(j).and(&x1));
        }
        let mut forced_r: Vec<(usize, u8)> = Vec::new();
        let mut forced_c: Vec<(usize, u8)> = Vec::new();
        for i in (0..mr).filter(|&i| ra[i] == 0) {
            let can2 = d_rows.contains(&b.row(i).and(&y1));
            let can1 = e_rows.contains(&b.row(i).and(&y2));
            match (can1, can2) {
                (false, false) => return None,
                (true, false) => forced_r.push((i, 1)),
                (false, true) => forced_r.push((i, 2)),
                _ => {}
            }
        }
        for j in (0..nc).filter(|&j| ca[j] == 0) {
            let can1 = d_cols.contains(&b.col(j).and(&x2));
            let can2 = e_cols.contains(&b.col(j).and(&x1));
            match (can1, can2) {
                (false, false) => return None,
                (true, false) => forced_c.push((j, 1)),
                (false, true) => forced_c.push((j, 2)),
                _ => {}
            }
        }
        if forced_r.is_empty() && forced_c.is_empty() {
            break;
        }
        for (i, s) in forced_r {
            ra[i] = s;
        }
        for (j, s) in forced_c {
            ca[j] = s;
        }
    }
    let len1 = ra.iter().filter(|&&s| s == 1).count() + ca.iter().filter(|&&s| s == 1).count();
    let neutral_side = if len1 < min_side { 1 } else { 2 };
    for s in ra.iter_mut().chain(ca.iter_mut()) {
        if *s == 0 {
            *s = neutral_side;
        }
    }
    let side1: HashSet<Label> = (0..mr)
        .filter(|&i| ra[i] == 1)
        .map(|i| b.row_labels()[i])
        .chain((0..nc).filter(|&j| ca[j] == 1).map(|j| b.col_labels()[j]))
        .collect();
    let sep = Separation::from_side(b, |l| side1.contains(&l));
    (sep.k() <= k && sep.len1() >= min_side && sep.len2() >= min_side).then_some(sep)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumKind {
    TwoSum,
    ThreeSum,
}

/// Labels tying the two components of a sum together.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Connector {
    /// Row `x` of D copied into the first component, column `y` of D into the second.
    Two { x: Label, y: Label },
    /// Shared W3 block on rows {xbar1} ∪ xbar2 and columns ybar1 ∪ {ybar2}.
    Three {
        xbar1: Label,
        xbar2: [Label; 2],
        ybar1: [Label; 2],
        ybar2: Label,
    },
}

#[derive(Clone, Debug)]
pub struct SumDecomposition {
    pub kind: SumKind,
    /// The matrix actually split, after `pivots`.
    pub matrix: BinaryMatrix,
    pub pivots: Vec<(Label, Label)>,
    pub separation: Separation,
    pub connector: Connector,
    pub b1: BinaryMatrix,
    pub b2: BinaryMatrix,
}

fn index_lists(b: &BinaryMatrix, side1: &HashSet<Label>) -> (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>) {
    let x1 = (0..b.nrows()).filter(|&i| side1.contains(&b.row_labels()[i])).collect();
    let x2 = (0..b.nrows()).filter(|&i| !side1.contains(&b.row_labels()[i])).collect();
    let y1 = (0..b.ncols()).filter(|&j| side1.contains(&b.col_labels()[j])).collect();
    let y2 = (0..b.ncols()).filter(|&j| !side1.contains(&b.col_labels()[j])).collect();
    (x1, x2, y1, y2)
}

fn side_set(sep: &Separation) -> HashSet<Label> {
    sep.x1.iter().chain(sep.y1.iter()).copied().collect()
}

/// 2-sum along a 2-separation. `prefer` marks labels to use as connectors when possible.
pub fn decompose_2sum(
    b: &BinaryMatrix,
    sep: &Separation,
    prefer: &dyn Fn(Label) -> bool,
) -> Result<SumDecomposition, Error> {
    let fresh = Separation::from_side(b, |l| sep.side1_contains(l));
    if fresh.k() != 2 || fresh.len1() < 2 || fresh.len2() < 2 {
        return Err(Error::Input("not a 2-separation".into()));
    }
    let sep = if fresh.rank_e == 0 { fresh } else { fresh.swapped() };
    let side1 = side_set(&sep);
    let (x1, x2, y1, y2) = index_lists(b, &side1);
    let ones: Vec<(usize, usize)> = x2
        .iter()
        .flat_map(|&i| y1.iter().filter(move |&&j| b.get(i, j)).map(move |&j| (i, j)))
        .collect();
    let score = |&(i, j): &(usize, usize)| {
        (!prefer(b.row_labels()[i]) as u8 + !prefer(b.col_labels()[j]) as u8, i, j)
    };
    let &(x, y) = ones.iter().min_by_key(|p| score(p)).expect("rank-1 block has a 1");
    let mut r1 = x1.clone();
    r1.push(x);
    r1.sort_unstable();
    let mut c2 = y2.clone();
    c2.push(y);
    c2.sort_unstable();
    let b1 = b.submatrix(&r1, &y1);
    let b2 = b.submatrix(&x2, &c2);
    Ok(SumDecomposition {
        kind: SumKind::TwoSum,
        matrix: b.clone(),
        pivots: Vec::new(),
        separation: sep,
        connector: Connector::Two { x: b.row_labels()[x], y: b.col_labels()[y] },
        b1,
        b2,
    })
}

/// Rebuilds the parent of a 2-sum from its components.
pub fn overlay_2sum(b1: &BinaryMatrix, b2: &BinaryMatrix, x: Label, y: Label) -> Option<BinaryMatrix> {
    let xi = b1.row_index(x)?;
    let yj = b2.col_index(y)?;
    let rows: Vec<Label> = b1
        .row_labels()
        .iter()
        .copied()
        .filter(|&l| l != x)
        .chain(b2.row_labels().iter().copied())
        .collect();
    let cols: Vec<Label> = b1
        .col_labels()
        .iter()
        .copied()
        .chain(b2.col_labels().iter().copied().filter(|&l| l != y))
        .collect();
    let mut out = BinaryMatrix::zeros_labeled(rows, cols);
    let r1 = b1.nrows() - 1;
    let c1 = b1.ncols();
    for (oi, i) in (0..b1.nrows()).filter(|&i| i != xi).enumerate() {
        for j in b1.row(i).ones() {
            out.set(oi, j, true);
        }
    }
    for i in 0..b2.nrows() {
        for (oj, j) in (0..b2.ncols()).filter(|&j| j != yj).enumerate() {
            if b2.get(i, j) {
                out.set(r1 + i, c1 + oj, true);
            }
        }
        if b2.get(i, yj) {
            for j in b1.row(xi).ones() {
                out.set(r1 + i, j, true);
            }
        }
    }
    Some(out)
}

/// 3-sum along a (3|4)-separation, pivoting into the normalized layout first.
pub fn decompose_3sum(b: &BinaryMatrix, sep: &Separation) -> Result<SumDecomposition, Error> {
    let mut m = b.clone();
    let mut pivots = Vec::new();
    let side1 = side_set(sep);
    let mut cur = Separation::from_side(&m, |l| side1.contains(&l));
    if cur.k() != 3 || cur.len1() < 4 || cur.len2() < 4 {
        return Err(Error::Input("not a (3|4)-separation".into()));
    }
    if cur.rank_d == 1 && cur.rank_e == 1 {
        let (x1, _, _, y2) = index_lists(&m, &side1);
        let (i, j) = x1
            .iter()
            .flat_map(|&i| y2.iter().map(move |&j| (i, j)))
            .find(|&(i, j)| m.get(i, j))
            .expect("rank-1 block has a 1");
        pivot_record(&mut m, i, j, &mut pivots);
        cur = Separation::from_side(&m, |l| side1.contains(&l));
    }
    let flipped = cur.rank_e == 2;
    if flipped {
        cur = cur.swapped();
    }
    debug_assert!(cur.rank_d == 2 && cur.rank_e == 0);
    let s1 = side_set(&cur);
    let (xbar1, ybar1) = normalize_side(&mut m, &s1, false, &mut pivots)
        .ok_or_else(|| Error::Internal("3-sum normalization failed on the first side".into()))?;
    let (ybar2, xbar2) = normalize_side(&mut m, &s1, true, &mut pivots)
        .ok_or_else(|| Error::Internal("3-sum normalization failed on the second side".into()))?;
    let cur = Separation::from_side(&m, |l| s1.contains(&l));
    let (x1, x2, y1, y2) = index_lists(&m, &s1);
    let xb2: Vec<usize> = xbar2.iter().map(|&l| m.row_index(l).unwrap()).collect();
    let yb1: Vec<usize> = ybar1.iter().map(|&l| m.col_index(l).unwrap()).collect();
    let xb1 = m.row_index(xbar1).unwrap();
    let yb2 = m.col_index(ybar2).unwrap();
    let mut r1: Vec<usize> = x1.iter().copied().chain(xb2.iter().copied()).collect();
    r1.sort_unstable();
    let mut c1: Vec<usize> = y1.clone();
    c1.push(yb2);
    c1.sort_unstable();
    let mut r2: Vec<usize> = x2.clone();
    r2.push(xb1);
    r2.sort_unstable();
    let mut c2: Vec<usize> = y2.iter().copied().chain(yb1.iter().copied()).collect();
    c2.sort_unstable();
    let b1 = m.submatrix(&r1, &c1);
    let b2 = m.submatrix(&r2, &c2);
    let _ = flipped;
    Ok(SumDecomposition {
        kind: SumKind::ThreeSum,
        matrix: m,
        pivots,
        separation: cur,
        connector: Connector::Three { xbar1, xbar2, ybar1, ybar2 },
        b1,
        b2,
    })
}

/// For the first side (`second == false`): finds a row of X1 meeting two
/// columns of Y1 whose D-columns are distinct and nonzero, returning the row
/// and the two columns. For the second side, the same on the transpose: a
/// column of Y2 meeting two rows of X2 with distinct nonzero D-rows.
/// Pivots inside A1 (resp. A2) on lines with zero D-part shorten connecting paths.
fn normalize_side(
    m: &mut BinaryMatrix,
    side1: &HashSet<Label>,
    second: bool,
    pivots: &mut Vec<(Label, Label)>,
) -> Option<(Label, [Label; 2])> {
    loop {
        let (x1, x2, y1, y2) = index_lists(m, side1);
        // "lines" are the candidate pair members, "hubs" the lines meeting them
        let (lines, hubs, cross) = if second { (x2, y2, y1) } else { (y1, x1, x2) };
        let line_vec = |k: usize| -> Bits {
            if second {
                m.row(k).clone()
            } else {
                m.col(k).clone()
            }
        };
        let hub_vec = |k: usize| -> Bits {
            if second {
                m.col(k).clone()
            } else {
                m.row(k).clone()
            }
        };
        let cross_mask = Bits::from_indices(if second { m.ncols() } else { m.nrows() }, cross.iter().copied());
        // colour each line by its D-part
        let mut classes: Vec<Bits> = Vec::new();
        let mut colour: HashMap<usize, usize> = HashMap::new();
        for &k in &lines {
            let v = line_vec(k).and(&cross_mask);
            if v.is_zero() {
                colour.insert(k, 0);
            } else {
                let c = match classes.iter().position(|x| *x == v) {
                    Some(p) => p + 1,
                    None => {
                        classes.push(v);
                        classes.len()
                    }
                };
                colour.insert(k, c);
            }
        }
        let line_set = Bits::from_indices(if second { m.nrows() } else { m.ncols() }, lines.iter().copied());
        for &h in &hubs {
            let nb: Vec<usize> = hub_vec(h).and(&line_set).ones().collect();
            for (a, &p) in nb.iter().enumerate() {
                for &q in &nb[a + 1..] {
                    if colour[&p] != 0 && colour[&q] != 0 && colour[&p] != colour[&q] {
                        let lab = |k: usize| if second { m.row_labels()[k] } else { m.col_labels()[k] };
                        let hl = if second { m.col_labels()[h] } else { m.row_labels()[h] };
                        return Some((hl, [lab(p), lab(q)]));
                    }
                }
            }
        }
        // BFS in the side's bipartite graph from coloured lines through zero-coloured lines
        let hub_set = Bits::from_indices(if second { m.ncols() } else { m.nrows() }, hubs.iter().copied());
        let path = colour_path(&lines, &colour, |k| line_vec(k).and(&hub_set), |h| hub_vec(h).and(&line_set))?;
        // path: line, hub, line(zero), hub, ..., line ; pivot on (hub1, line2)
        let (h, l) = (path[1], path[2]);
        let (pi, pj) = if second { (l, h) } else { (h, l) };
        pivot_record(m, pi, pj, pivots);
    }
}

/// Shortest path line-hub-line-...-line from a coloured line to a line of a
/// different non-zero colour, with interior lines of colour zero.
fn colour_path(
    lines: &[usize],
    colour: &HashMap<usize, usize>,
    hubs_of: impl Fn(usize) -> Bits,
    lines_of: impl Fn(usize) -> Bits,
) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for &s in lines.iter().filter(|&&k| colour[&k] != 0) {
        let mut line_par: HashMap<usize, usize> = HashMap::new();
        let mut hub_par: HashMap<usize, usize> = HashMap::new();
        let mut q: VecDeque<usize> = VecDeque::from([s]);
        line_par.insert(s, usize::MAX);
        let mut hit = None;
        'bfs: while let Some(l) = q.pop_front() {
            for h in hubs_of(l).ones() {
                if hub_par.contains_key(&h) {
                    continue;
                }
                hub_par.insert(h, l);
                for l2 in lines_of(h).ones() {
                    if line_par.contains_key(&l2) {
                        continue;
                    }
                    line_par.insert(l2, h);
                    let c = colour[&l2];
                    if c != 0 && c != colour[&s] {
                        hit = Some(l2);
                        break 'bfs;
                    }
                    if c == 0 {
                        q.push_back(l2);
                    }
                }
            }
        }
        if let Some(t) = hit {
            let mut path = vec![t];
            let mut l = t;
            while l != s {
                let h = line_par[&l];
                path.push(h);
                l = hub_par[&h];
                path.push(l);
            }
            path.reverse();
            if best.as_ref().is_none_or(|b| path.len() < b.len()) {
                best = Some(path);
            }
        }
    }
    best
}

/// Inverse of a nonsingular 2×2 GF(2) matrix.
fn inv2(d: [[bool; 2]; 2]) -> [[bool; 2]; 2] {
    [[d[1][1], d[0][1]], [d[1][0], d[0][0]]]
}

/// Rebuilds the parent of a 3-sum from its components.
pub fn overlay_3sum(b1: &BinaryMatrix, b2: &BinaryMatrix, conn: &Connector) -> Option<BinaryMatrix> {
    let Connector::Three { xbar1, xbar2, ybar1, ybar2 } = conn else {
        return None;
    };
    // shared block must agree and have W3 shape
    let shared_rows = [*xbar1, xbar2[0], xbar2[1]];
    let shared_cols = [ybar1[0], ybar1[1], *ybar2];
    let s1 = b1.submatrix_by_labels(&shared_rows, &shared_cols)?;
    let s2 = b2.submatrix_by_labels(&shared_rows, &shared_cols)?;
    if s1 != s2 {
        return None;
    }
    let g = |i: usize, j: usize| s1.get(i, j);
    if !(g(0, 0) && g(0, 1) && !g(0, 2) && g(1, 2) && g(2, 2)) {
        return None;
    }
    let dbar = [[g(1, 0), g(1, 1)], [g(2, 0), g(2, 1)]];
    if (dbar[0][0] && dbar[1][1]) == (dbar[0][1] && dbar[1][0]) {
        return None;
    }
    let dinv = inv2(dbar);
    let x1: Vec<Label> = b1.row_labels().iter().copied().filter(|l| !xbar2.contains(l)).collect();
    let y1: Vec<Label> = b1.col_labels().iter().copied().filter(|l| l != ybar2).collect();
    let x2: Vec<Label> = b2.row_labels().iter().copied().filter(|l| l != xbar1).collect();
    let y2: Vec<Label> = b2.col_labels().iter().copied().filter(|l| !ybar1.contains(l)).collect();
    if !x1.contains(xbar1) || !x2.contains(&xbar2[0]) || !x2.contains(&xbar2[1]) {
        return None;
    }
    if !y1.contains(&ybar1[0]) || !y1.contains(&ybar1[1]) || !y2.contains(ybar2) {
        return None;
    }
    let rows: Vec<Label> = x1.iter().chain(x2.iter()).copied().collect();
    let cols: Vec<Label> = y1.iter().chain(y2.iter()).copied().collect();
    let mut out = BinaryMatrix::zeros_labeled(rows, cols);
    let p1 = b1.label_positions();
    let p2 = b2.label_positions();
    for (oi, l) in x1.iter().enumerate() {
        let i = p1[l].1;
        for (oj, c) in y1.iter().enumerate() {
            if b1.get(i, p1[c].1) {
                out.set(oi, oj, true);
            }
        }
    }
    let xb2: [usize; 2] = [p1[&xbar2[0]].1, p1[&xbar2[1]].1];
    let yb1: [usize; 2] = [p2[&ybar1[0]].1, p2[&ybar1[1]].1];
    for (oi, l) in x2.iter().enumerate() {
        let i = p2[l].1;
        for (oj, c) in y2.iter().enumerate() {
            if b2.get(i, p2[c].1) {
                out.set(x1.len() + oi, y1.len() + oj, true);
            }
        }
        // D[i, :] = D[i, Ybar1] · Dbar^{-1} · D[Xbar2, :]
        let left = [b2.get(i, yb1[0]), b2.get(i, yb1[1])];
        let coef = [
            (left[0] && dinv[0][0]) ^ (left[1] && dinv[1][0]),
            (left[0] && dinv[0][1]) ^ (left[1] && dinv[1][1]),
        ];
        for (oj, c) in y1.iter().enumerate() {
            let j = p1[c].1;
            let v = (coef[0] && b1.get(xb2[0], j)) ^ (coef[1] && b1.get(xb2[1], j));
            if v {
                out.set(x1.len() + oi, oj, true);
            }
        }
    }
    Some(out)
}

/// True if `a` and `b` have the same labels and agree entrywise.
pub fn same_by_labels(a: &BinaryMatrix, b: &BinaryMatrix) -> bool {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return false;
    }
    let distinct: HashSet<Label> = b.row_labels().iter().chain(b.col_labels()).copied().collect();
    if distinct.len() != b.nrows() + b.ncols() {
        return false;
    }
    match a.submatrix_by_labels(b.row_labels(), b.col_labels()) {
        Some(s) => s == *b,
        None => false,
    }
}

pub fn r10_canonical() -> [BinaryMatrix; 2] {
    let c = [
        [1u8, 1, 0, 0, 1],
        [1, 1, 1, 0, 0],
        [0, 1, 1, 1, 0],
        [0, 0, 1, 1, 1],
        [1, 0, 0, 1, 1],
    ];
    let f = [
        [1u8, 1, 1, 0, 0],
        [1, 0, 1, 1, 0],
        [1, 1, 1, 1, 1],
        [1, 0, 0, 1, 1],
        [1, 1, 0, 0, 1],
    ];
    let to = |a: [[u8; 5]; 5]| BinaryMatrix::from_rows(&a.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    [to(c), to(f)]
}

/// Sorted multiset of columns after a row permutation; compares BG up to isomorphism fixing sides.
fn same_up_to_permutation(a: &BinaryMatrix, b: &BinaryMatrix) -> bool {
    let key = |m: &BinaryMatrix, perm: &[usize]| -> Vec<u8> {
        let mut cols: Vec<u8> = (0..5)
            .map(|j| perm.iter().enumerate().fold(0u8, |acc, (k, &i)| acc | ((m.get(i, j) as u8) << k)))
            .collect();
        cols.sort_unstable();
        cols
    };
    let target = key(b, &[0, 1, 2, 3, 4]);
    let mut degs_a: Vec<usize> = (0..5).map(|i| a.row(i).count_ones()).collect();
    let mut degs_b: Vec<usize> = (0..5).map(|i| b.row(i).count_ones()).collect();
    degs_a.sort_unstable();
    degs_b.sort_unstable();
    if degs_a != degs_b {
        return false;
    }
    let mut perm = [0usize, 1, 2, 3, 4];
    permutations(&mut perm, 0, &mut |p| key(a, p) == target)
}

fn permutations(p: &mut [usize; 5], k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if k == p.len() {
        return f(p);
    }
    for i in k..p.len() {
        p.swap(k, i);
        if permutations(p, k + 1, f) {
            return true;
        }
        p.swap(k, i);
    }
    false
}

/// True iff `b` is 5×5 and equal, up to row and column permutations (and transposition), to an R10 representation.
pub fn is_r10(b: &BinaryMatrix) -> bool {
    if b.nrows() != 5 || b.ncols() != 5 {
        return false;
    }
    let ones = b.count_ones();
    let bt = b.transpose();
    r10_canonical().iter().any(|c| {
        c.count_ones() == ones && (same_up_to_permutation(b, c) || same_up_to_permutation(&bt, c))
    })
}

/// A candidate (possibly deficient) 3-separation of a sequence member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidatePair {
    pub t: Vec<Label>,
    /// 0-based member index.
    pub source_index: usize,
    pub complement: Vec<Label>,
}

/// Candidate pairs from members `0..=j_last` (0-based), starting at the first member of length at least 8.
pub fn candidate_pairs(b: &BinaryMatrix, seq: &NestedSequence, j_last: usize) -> Vec<CandidatePair> {
    let mut out = Vec::new();
    let Some(i0) = (0..seq.len()).find(|&i| seq.length(i) >= 8) else {
        return out;
    };
    if i0 > j_last {
        return out;
    }
    let lam = |n: &BinaryMatrix, t: &HashSet<Label>| Separation::from_side(n, |l| t.contains(&l));
    {
        let n = seq.submatrix(b, i0).expect("member");
        let e = seq.elements(i0);
        let s = e.len();
        for mask in 1u32..(1u32 << s) {
            let size = mask.count_ones() as usize;
            if size < 2 || size > s - size {
                continue;
            }
            let t: Vec<Label> = (0..s).filter(|&k| mask >> k & 1 == 1).map(|k| e[k]).collect();
            let ts: HashSet<Label> = t.iter().copied().collect();
            if lam(&n, &ts).k() == 3 {
                let comp = e.iter().copied().filter(|l| !ts.contains(l)).collect();
                out.push(CandidatePair { t, source_index: i0, complement: comp });
            }
        }
    }
    for i in i0 + 1..=j_last.min(seq.len() - 1) {
        let n = seq.submatrix(b, i).expect("member");
        let prev: HashSet<Label> = seq.elements(i - 1).into_iter().collect();
        let e = seq.elements(i);
        let new: Vec<Label> = e.iter().copied().filter(|l| !prev.contains(l)).collect();
        let mut olds: Vec<Option<Label>> = vec![None];
        olds.extend(seq.elements(i - 1).into_iter().map(Some));
        for mask in 1u32..(1u32 << new.len()) {
            for old in &olds {
                let mut t: Vec<Label> = (0..new.len()).filter(|&k| mask >> k & 1 == 1).map(|k| new[k]).collect();
                if let Some(o) = old {
                    t.push(*o);
                }
                if t.len() < 2 || t.len() > e.len() - t.len() {
                    continue;
                }
                let ts: HashSet<Label> = t.iter().copied().collect();
                if lam(&n, &ts).k() == 3 {
                    let comp = e.iter().copied().filter(|l| !ts.contains(l)).collect();
                    out.push(CandidatePair { t, source_index: i, complement: comp });
                }
            }
        }
    }
    out
}
