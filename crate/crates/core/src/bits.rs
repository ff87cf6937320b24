//! Word-packed bit vectors used as rows and columns of binary matrices.

use std::fmt;

const WORD: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::zeros(len);
        for i in ones {
            b.set(i, true);
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if v {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn and_assign(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn and(&self, other: &Bits) -> Bits {
        let mut r = self.clone();
        r.and_assign(other);
        r
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Number of ones in `self & mask`.
    pub fn count_ones_masked(&self, mask: &Bits) -> usize {
        self.words
            .iter()
            .zip(&mask.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True if `self & mask == other & mask`.
    pub fn eq_masked(&self, other: &Bits, mask: &Bits) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .all(|((a, b), m)| (a ^ b) & m == 0)
    }

    pub fn is_zero_masked(&self, mask: &Bits) -> bool {
        self.words.iter().zip(&mask.words).all(|(a, m)| a & m == 0)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn ones(&self) -> Ones<'_> {
        Ones {
            bits: self,
            word: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    /// Keeps only the listed positions, in the given order.
    pub fn select(&self, idx: &[usize]) -> Bits {
        let mut out = Bits::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Appends one bit.
    pub fn push(&mut self, v: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, v);
    }
}

pub struct Ones<'a> {
    bits: &'a Bits,
    word: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let t = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.word * WORD + t);
            }
            self.word += 1;
            if self.word >= self.bits.words.len() {
                return None;
            }
            self.cur = self.bits.words[self.word];
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// GF(2) rank of a list of equal-length bit vectors (consumed).
pub fn rank_of(mut vecs: Vec<Bits>) -> usize {
    let mut rank = 0;
    let n = vecs.len();
    for i in 0..n {
        let Some(p) = vecs[i].first_one() else {
            continue;
        };
        rank += 1;
        let (head, tail) = vecs.split_at_mut(i + 1);
        let pivot = &head[i];
        for v in tail.iter_mut() {
            if v.get(p) {
                v.xor_assign(pivot);
            }
        }
    }
    rank
}

/// Incrementally maintained GF(2) basis in echelon form.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<(usize, Bits)>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Bits) -> Bits {
        for (p, r) in &self.rows {
            if v.get(*p) {
                v.xor_assign(r);
            }
        }
        v
    }

    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v.clone()).is_zero()
    }

    /// Inserts `v`; returns true if the rank grew.
    pub fn insert(&mut self, v: Bits) -> bool {
        let r = self.reduce(v);
        match r.first_one() {
            None => false,
            Some(p) => {
                for (_, row) in self.rows.iter_mut() {
                    if row.get(p) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push((p, r));
                true
            }
        }
    }
}
