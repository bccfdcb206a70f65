//! Dense bit-packed linear algebra over GF(2).
//!
//! Vectors are stored as `u64` words, 64 entries per word. Elimination always
//! pivots on the lowest-index nonzero column and processes rows in index
//! order, so kernels and membership witnesses are reproducible bit-for-bit.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.mask_tail();
        v
    }

    /// Vector with only bit `i` set.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Parses a string of `0`/`1` characters, index 0 first.
    pub fn from_bit_str(s: &str) -> Option<Self> {
        let mut v = Self::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                _ => return None,
            }
        }
        Some(v)
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
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// In-place addition over GF(2).
    ///
    /// # Panics
    /// Panics if the lengths differ.
    pub fn xor_assign(&mut self, other: &Self) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "length mismatch in and");
        Self {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
            len: self.len,
        }
    }

    pub fn not(&self) -> Self {
        let mut out = Self {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.mask_tail();
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        let mut acc = 0u32;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= (a & b).count_ones();
        }
        acc & 1 == 1
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }

    /// Copy of bits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = Self::zeros(len);
        for i in self.iter_ones().filter(|&i| i >= start && i < start + len) {
            out.set(i - start, true);
        }
        out
    }

    /// Lowercase hex rendering, bit 0 is the least significant bit of the
    /// last hex digit. Width is `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(u32::from(nibble), 16).unwrap());
        }
        out
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

/// A matrix over GF(2) stored as packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: Vec<BitVector>,
    n_cols: usize,
}

impl BitMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            rows: vec![BitVector::zeros(n_cols); n_rows],
            n_cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: (0..n).map(|i| BitVector::unit(n, i)).collect(),
            n_cols: n,
        }
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: Vec<BitVector>, n_cols: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::Dimension {
                expected: n_cols,
                found: bad.len(),
            });
        }
        Ok(Self { rows, n_cols })
    }

    /// Parses rows given as `0`/`1` strings.
    pub fn from_bit_strs(rows: &[&str]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.len());
        let parsed = rows
            .iter()
            .map(|r| BitVector::from_bit_str(r).ok_or_else(|| Error::Syntax {
                line: 0,
                column: 0,
                message: format!("not a bit string: {r:?}"),
            }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed, n_cols)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::Dimension {
                expected: self.n_cols,
                found: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n_cols, self.n_rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                out.rows[c].set(r, true);
            }
        }
        out
    }

    /// Row-vector times matrix: `Σ_i c_i · row_i`.
    pub fn left_mul(&self, coefficients: &BitVector) -> Result<BitVector> {
        if coefficients.len() != self.n_rows() {
            return Err(Error::Dimension {
                expected: self.n_rows(),
                found: coefficients.len(),
            });
        }
        let mut out = BitVector::zeros(self.n_cols);
        for i in coefficients.iter_ones() {
            out.xor_assign(&self.rows[i]);
        }
        Ok(out)
    }

    /// GF(2) row rank.
    pub fn rank(&self) -> usize {
        Echelon::from_matrix(self).rank()
    }

    /// Basis of the left null space `{v : v·m = 0}`.
    ///
    /// One basis vector per dependent row, in row order. Each vector's
    /// highest set index is the dependent row it closes, so the basis is
    /// independent by construction.
    pub fn kernel_basis(&self) -> Vec<BitVector> {
        Echelon::from_matrix(self).kernel
    }

    /// Finds `c` with `c·m = v`, or `None` if `v` is outside the row space.
    pub fn solve_membership(&self, v: &BitVector) -> Result<Option<BitVector>> {
        if v.len() != self.n_cols {
            return Err(Error::Dimension {
                expected: self.n_cols,
                found: v.len(),
            });
        }
        Ok(Echelon::from_matrix(self).solve(v))
    }
}

/// Incremental row-echelon basis with tracked row combinations.
///
/// Rows are inserted in order; each accepted row is reduced against earlier
/// basis rows, so its pivot (lowest set column) never coincides with an
/// earlier pivot and later rows never touch earlier pivots. That makes a
/// single forward pass sufficient for reduction.
#[derive(Clone, Debug)]
pub struct Echelon {
    n_cols: usize,
    n_sources: usize,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
    combos: Vec<BitVector>,
    independent: Vec<usize>,
    kernel: Vec<BitVector>,
}

impl Echelon {
    /// Empty basis over vectors of length `n_cols`, tracking combinations
    /// over up to `n_sources` inserted rows.
    pub fn new(n_cols: usize, n_sources: usize) -> Self {
        Self {
            n_cols,
            n_sources,
            basis: Vec::new(),
            pivots: Vec::new(),
            combos: Vec::new(),
            independent: Vec::new(),
            kernel: Vec::new(),
        }
    }

    pub fn from_matrix(m: &BitMatrix) -> Self {
        let mut e = Self::new(m.n_cols(), m.n_rows());
        for (i, row) in m.rows().iter().enumerate() {
            e.insert_source(i, row);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Indices of inserted rows that were independent of all earlier rows.
    pub fn independent_rows(&self) -> &[usize] {
        &self.independent
    }

    pub fn kernel(&self) -> &[BitVector] {
        &self.kernel
    }

    /// Inserts row `index` (which must be below `n_sources`). Returns `true`
    /// if it enlarged the span.
    pub fn insert_source(&mut self, index: usize, row: &BitVector) -> bool {
        assert_eq!(row.len(), self.n_cols, "row length mismatch");
        let mut r = row.clone();
        let mut combo = BitVector::unit(self.n_sources, index);
        self.reduce_tracked(&mut r, &mut combo);
        match r.first_one() {
            Some(p) => {
                self.basis.push(r);
                self.pivots.push(p);
                self.combos.push(combo);
                self.independent.push(index);
                true
            }
            None => {
                self.kernel.push(combo);
                false
            }
        }
    }

    /// Inserts an untracked vector; returns `true` if it enlarged the span.
    pub fn insert(&mut self, row: &BitVector) -> bool {
        let mut r = row.clone();
        self.reduce(&mut r);
        match r.first_one() {
            Some(p) => {
                self.basis.push(r);
                self.pivots.push(p);
                self.combos.push(BitVector::zeros(self.n_sources));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut r = v.clone();
        self.reduce(&mut r);
        r.is_zero()
    }

    /// Combination of source rows reproducing `v`, if `v` is in the span.
    pub fn solve(&self, v: &BitVector) -> Option<BitVector> {
        let mut r = v.clone();
        let mut combo = BitVector::zeros(self.n_sources);
        self.reduce_tracked(&mut r, &mut combo);
        r.is_zero().then_some(combo)
    }

    fn reduce(&self, r: &mut BitVector) {
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if r.get(p) {
                r.xor_assign(b);
            }
        }
    }

    fn reduce_tracked(&self, r: &mut BitVector, combo: &mut BitVector) {
        for ((b, &p), c) in self.basis.iter().zip(&self.pivots).zip(&self.combos) {
            if r.get(p) {
                r.xor_assign(b);
                combo.xor_assign(c);
            }
        }
    }
}
