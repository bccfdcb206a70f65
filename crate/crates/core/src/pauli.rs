//! Phase-tracked Pauli operators on a periodic lattice.
//!
//! An operator is `phase · ⊗_s P_s` with letters `P_s ∈ {I, X, Y, Z}` stored
//! as X/Z exponent bits (`Y` is both bits set, with no hidden factor of `i`).
//! Letter products follow `X·Z = -iY`, `Z·X = +iY`, `X·Y = +iZ`, and cyclic.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

/// Periodic `rows × cols` grid of qubits, indexed row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub rows: usize,
    pub cols: usize,
}

impl Lattice {
    pub fn new(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty lattice");
        Self { rows, cols }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.rows * self.cols
    }

    /// Site index with both coordinates taken modulo the lattice size.
    #[inline]
    pub fn site(&self, row: isize, col: isize) -> usize {
        let r = row.rem_euclid(self.rows as isize) as usize;
        let c = col.rem_euclid(self.cols as isize) as usize;
        r * self.cols + c
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.cols, site % self.cols)
    }

    pub fn transposed(&self) -> Self {
        Self::new(self.cols, self.rows)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    /// Letter part of the product, phases dropped.
    pub fn times(self, other: Letter) -> Letter {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        Letter::from_bits(x1 ^ x2, z1 ^ z2)
    }

    pub fn commutes_with(self, other: Letter) -> bool {
        let (x1, z1) = self.bits();
        let (x2, z2) = other.bits();
        !((x1 & z2) ^ (z1 & x2))
    }
}

/// Global phase `i^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    #[inline]
    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, other: Phase) -> Phase {
        Phase((self.0 + other.0) % 4)
    }

    pub fn prefix(self) -> &'static str {
        match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        }
    }
}

/// Pauli operator on a lattice.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    lattice: Lattice,
    x: BitVector,
    z: BitVector,
    phase: Phase,
}

impl PauliOperator {
    pub fn identity(lattice: Lattice) -> Self {
        Self {
            lattice,
            x: BitVector::zeros(lattice.n_sites()),
            z: BitVector::zeros(lattice.n_sites()),
            phase: Phase::ONE,
        }
    }

    pub fn from_parts(lattice: Lattice, x: BitVector, z: BitVector, phase: Phase) -> Result<Self> {
        for v in [&x, &z] {
            if v.len() != lattice.n_sites() {
                return Err(Error::Dimension {
                    expected: lattice.n_sites(),
                    found: v.len(),
                });
            }
        }
        Ok(Self {
            lattice,
            x,
            z,
            phase,
        })
    }

    /// Operator from a concatenated `x ‖ z` exponent vector with phase `+1`.
    pub fn from_exponents(lattice: Lattice, xz: &BitVector) -> Result<Self> {
        let n = lattice.n_sites();
        if xz.len() != 2 * n {
            return Err(Error::Dimension {
                expected: 2 * n,
                found: xz.len(),
            });
        }
        Self::from_parts(lattice, xz.slice(0, n), xz.slice(n, n), Phase::ONE)
    }

    pub fn single(lattice: Lattice, site: usize, letter: Letter) -> Self {
        let mut p = Self::identity(lattice);
        p.set_letter(site, letter);
        p
    }

    /// Operator with `letter` on every listed site.
    pub fn on_sites(lattice: Lattice, sites: impl IntoIterator<Item = usize>, letter: Letter) -> Self {
        let mut p = Self::identity(lattice);
        for s in sites {
            p.set_letter(s, letter);
        }
        p
    }

    #[inline]
    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    #[inline]
    pub fn x_bits(&self) -> &BitVector {
        &self.x
    }

    #[inline]
    pub fn z_bits(&self) -> &BitVector {
        &self.z
    }

    #[inline]
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    /// `x ‖ z` exponent vector.
    pub fn exponents(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    #[inline]
    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x.get(site), self.z.get(site))
    }

    pub fn set_letter(&mut self, site: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.x.set(site, x);
        self.z.set(site, z);
    }

    /// Right-multiplies a single-site letter in place, tracking the phase.
    pub fn apply(&mut self, site: usize, letter: Letter) {
        let mine = self.letter(site);
        let k = site_phase(mine, letter);
        self.phase = self.phase.mul(Phase::from_power(k));
        let (x, z) = letter.bits();
        if x {
            self.x.flip(site);
        }
        if z {
            self.z.flip(site);
        }
    }

    pub fn support_mask(&self) -> BitVector {
        let mut s = self.x.clone();
        for (a, b) in s.words_mut().iter_mut().zip(self.z.words()) {
            *a |= *b;
        }
        s
    }

    pub fn support(&self) -> Vec<usize> {
        self.support_mask().iter_ones().collect()
    }

    pub fn weight(&self) -> usize {
        self.support_mask().count_ones()
    }

    /// True when the letter pattern is all identity (phase ignored).
    pub fn is_pattern_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// True for the operator `+𝟙`.
    pub fn is_identity(&self) -> bool {
        self.is_pattern_identity() && self.phase == Phase::ONE
    }

    /// Same letters, phase ignored.
    pub fn same_pattern(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.x == other.x && self.z == other.z
    }

    fn check_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch {
                left: self.lattice.to_string(),
                right: other.lattice.to_string(),
            });
        }
        Ok(())
    }

    /// Symplectic form: `true` iff the operators anticommute.
    pub fn symplectic_inner(&self, other: &Self) -> Result<bool> {
        self.check_lattice(other)?;
        Ok(self.anticommutes(other))
    }

    /// Unchecked symplectic form for operators known to share a lattice.
    #[inline]
    pub fn anticommutes(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        let (xa, za, xb, zb) = (self.x.words(), self.z.words(), other.x.words(), other.z.words());
        for i in 0..xa.len() {
            acc ^= ((xa[i] & zb[i]) ^ (za[i] & xb[i])).count_ones();
        }
        acc & 1 == 1
    }

    /// Symplectic form restricted to the sites of `area`.
    pub fn anticommutes_on(&self, other: &Self, area: &Area) -> bool {
        let mut acc = 0u32;
        let m = area.mask().words();
        let (xa, za, xb, zb) = (self.x.words(), self.z.words(), other.x.words(), other.z.words());
        for i in 0..xa.len() {
            acc ^= (((xa[i] & zb[i]) ^ (za[i] & xb[i])) & m[i]).count_ones();
        }
        acc & 1 == 1
    }

    /// Product `self · other`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_lattice(other)?;
        let mut out = self.clone();
        out.mul_assign(other);
        Ok(out)
    }

    /// In-place `self ← self · other`; lattices must match.
    pub fn mul_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.lattice, other.lattice);
        let (mut plus, mut minus) = (0u64, 0u64);
        let (xa, za, xb, zb) = (self.x.words(), self.z.words(), other.x.words(), other.z.words());
        for i in 0..xa.len() {
            let (x1, z1, x2, z2) = (xa[i], za[i], xb[i], zb[i]);
            let y1 = x1 & z1;
            let xo1 = x1 & !z1;
            let zo1 = !x1 & z1;
            let y2 = x2 & z2;
            let xo2 = x2 & !z2;
            let zo2 = !x2 & z2;
            // Y·Z = iX, X·Y = iZ, Z·X = iY; the reversed orders give -i.
            let p = (y1 & zo2) | (xo1 & y2) | (zo1 & xo2);
            let m = (y1 & xo2) | (xo1 & zo2) | (zo1 & y2);
            plus += u64::from(p.count_ones());
            minus += u64::from(m.count_ones());
        }
        let k = (plus % 4) as i64 - (minus % 4) as i64;
        self.phase = self.phase.mul(other.phase).mul(Phase::from_power(k));
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Restriction to `area`: letters outside become `I`, phase resets to `+1`.
    pub fn restrict(&self, area: &Area) -> Self {
        Self {
            lattice: self.lattice,
            x: self.x.and(area.mask()),
            z: self.z.and(area.mask()),
            phase: Phase::ONE,
        }
    }

    /// Minimal cyclic row and column intervals covering the support.
    pub fn support_window(&self) -> Result<SupportWindow> {
        let support = self.support_mask();
        if support.is_zero() {
            return Err(Error::EmptySupport);
        }
        let mut rows = vec![false; self.lattice.rows];
        let mut cols = vec![false; self.lattice.cols];
        for s in support.iter_ones() {
            let (r, c) = self.lattice.coords(s);
            rows[r] = true;
            cols[c] = true;
        }
        Ok(SupportWindow {
            rows: CyclicInterval::covering(&rows),
            cols: CyclicInterval::covering(&cols),
        })
    }

    /// The same operator on the transposed lattice (rows and columns swapped).
    pub fn transposed(&self) -> Self {
        let t = self.lattice.transposed();
        let mut out = Self::identity(t);
        for s in self.support() {
            let (r, c) = self.lattice.coords(s);
            out.set_letter(c * t.cols + r, self.letter(s));
        }
        out.phase = self.phase;
        out
    }

    /// Canonical text: phase prefix then rows of letters separated by `/`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.lattice.n_sites() + self.lattice.rows + 2);
        s.push_str(self.phase.prefix());
        for r in 0..self.lattice.rows {
            if r > 0 {
                s.push('/');
            }
            for c in 0..self.lattice.cols {
                s.push(self.letter(r * self.lattice.cols + c).as_char());
            }
        }
        s
    }

    /// Compact rendering listing only non-identity sites, e.g. `+X(0,1)Z(2,3)`.
    pub fn to_sparse_text(&self) -> String {
        let mut s = String::from(self.phase.prefix());
        if self.is_pattern_identity() {
            s.push('I');
        }
        for site in self.support() {
            let (r, c) = self.lattice.coords(site);
            s.push_str(&format!("{}({r},{c})", self.letter(site).as_char()));
        }
        s
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pauli[{}]", self.to_sparse_text())
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Splits a leading phase prefix (`+`, `-`, `+i`, `-i`) off `s`.
pub(crate) fn split_phase(s: &str) -> (Phase, &str) {
    if let Some(rest) = s.strip_prefix("+i") {
        (Phase::I, rest)
    } else if let Some(rest) = s.strip_prefix("-i") {
        (Phase::MINUS_I, rest)
    } else if let Some(rest) = s.strip_prefix('+') {
        (Phase::ONE, rest)
    } else if let Some(rest) = s.strip_prefix('-') {
        (Phase::MINUS_ONE, rest)
    } else {
        (Phase::ONE, s)
    }
}

/// Parses `rows` of letters separated by `/` into a letter grid.
pub(crate) fn parse_letter_rows(body: &str) -> Result<Vec<Vec<Letter>>> {
    let mut grid = Vec::new();
    let mut column = 1;
    for row in body.split('/') {
        let mut letters = Vec::with_capacity(row.len());
        for ch in row.chars() {
            let l = Letter::from_char(ch).ok_or_else(|| Error::Syntax {
                line: 1,
                column,
                message: format!("unexpected character {ch:?} in Pauli pattern"),
            })?;
            letters.push(l);
            column += 1;
        }
        column += 1;
        grid.push(letters);
    }
    let width = grid[0].len();
    if width == 0 || grid.iter().any(|r| r.len() != width) {
        return Err(Error::Syntax {
            line: 1,
            column: 1,
            message: "pattern rows must be non-empty and of equal length".into(),
        });
    }
    Ok(grid)
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = split_phase(s.trim());
        let grid = parse_letter_rows(body)?;
        let lattice = Lattice::new(grid.len(), grid[0].len());
        let mut p = Self::identity(lattice);
        for (r, row) in grid.iter().enumerate() {
            for (c, &l) in row.iter().enumerate() {
                p.set_letter(r * lattice.cols + c, l);
            }
        }
        p.phase = phase;
        Ok(p)
    }
}

/// Exponent of `i` produced by the single-site product `a · b`.
pub fn site_phase(a: Letter, b: Letter) -> i64 {
    use Letter::*;
    match (a, b) {
        (Y, Z) | (X, Y) | (Z, X) => 1,
        (Y, X) | (X, Z) | (Z, Y) => -1,
        _ => 0,
    }
}

/// Contiguous interval on a cycle of length `modulus`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicInterval {
    pub start: usize,
    pub len: usize,
    pub modulus: usize,
}

impl CyclicInterval {
    pub fn new(start: usize, len: usize, modulus: usize) -> Self {
        assert!(len <= modulus && modulus > 0);
        Self {
            start: start % modulus,
            len,
            modulus,
        }
    }

    pub fn full(modulus: usize) -> Self {
        Self::new(0, modulus, modulus)
    }

    /// Last index covered (inclusive).
    pub fn end(&self) -> usize {
        (self.start + self.len.max(1) - 1) % self.modulus
    }

    pub fn is_full(&self) -> bool {
        self.len == self.modulus
    }

    pub fn contains(&self, i: usize) -> bool {
        (i + self.modulus - self.start) % self.modulus < self.len
    }

    /// Offset of `i` from `start` along the cycle.
    pub fn offset(&self, i: usize) -> usize {
        (i + self.modulus - self.start) % self.modulus
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).map(move |d| (self.start + d) % self.modulus)
    }

    /// Shortest cyclic interval covering every `true` entry; ties go to the
    /// smallest start index. All-`true` input gives the full interval.
    fn covering(occupied: &[bool]) -> Self {
        let n = occupied.len();
        if occupied.iter().all(|&b| b) {
            return Self::full(n);
        }
        let mut best: Option<(usize, usize)> = None;
        for start in 0..n {
            let prev = (start + n - 1) % n;
            if !occupied[start] || occupied[prev] {
                continue;
            }
            // `start` begins a run after a gap; the cover is everything up to
            // the last occupied index before returning to the gap.
            let mut len = n;
            while !occupied[(start + len - 1) % n] {
                len -= 1;
            }
            if best.is_none_or(|(_, l)| len < l) {
                best = Some((start, len));
            }
        }
        let (start, len) = best.expect("non-empty, non-full occupancy has a gap");
        Self::new(start, len, n)
    }
}

impl fmt::Display for CyclicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SupportWindow {
    pub rows: CyclicInterval,
    pub cols: CyclicInterval,
}

impl SupportWindow {
    pub fn height(&self) -> usize {
        self.rows.len
    }

    pub fn width(&self) -> usize {
        self.cols.len
    }
}

/// A set of lattice sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Area {
    lattice: Lattice,
    mask: BitVector,
}

impl Area {
    pub fn from_mask(lattice: Lattice, mask: BitVector) -> Result<Self> {
        if mask.len() != lattice.n_sites() {
            return Err(Error::Dimension {
                expected: lattice.n_sites(),
                found: mask.len(),
            });
        }
        Ok(Self { lattice, mask })
    }

    pub fn empty(lattice: Lattice) -> Self {
        Self {
            lattice,
            mask: BitVector::zeros(lattice.n_sites()),
        }
    }

    pub fn full(lattice: Lattice) -> Self {
        Self {
            lattice,
            mask: BitVector::ones(lattice.n_sites()),
        }
    }

    /// Rows `rows` × columns `cols`, both cyclic.
    pub fn rect(lattice: Lattice, rows: CyclicInterval, cols: CyclicInterval) -> Self {
        let mut a = Self::empty(lattice);
        for r in rows.iter() {
            for c in cols.iter() {
                a.mask.set(r * lattice.cols + c, true);
            }
        }
        a
    }

    /// Horizontal band of `height` rows whose top row is `top` (mod rows).
    pub fn horizontal_band(lattice: Lattice, top: usize, height: usize) -> Self {
        let height = height.min(lattice.rows);
        Self::rect(
            lattice,
            CyclicInterval::new(top, height, lattice.rows),
            CyclicInterval::full(lattice.cols),
        )
    }

    /// Vertical band of `width` columns whose left column is `left`.
    pub fn vertical_band(lattice: Lattice, left: usize, width: usize) -> Self {
        let width = width.min(lattice.cols);
        Self::rect(
            lattice,
            CyclicInterval::full(lattice.rows),
            CyclicInterval::new(left, width, lattice.cols),
        )
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn mask(&self) -> &BitVector {
        &self.mask
    }

    pub fn contains(&self, site: usize) -> bool {
        self.mask.get(site)
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_zero()
    }

    pub fn complement(&self) -> Self {
        Self {
            lattice: self.lattice,
            mask: self.mask.not(),
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            lattice: self.lattice,
            mask: self.mask.and(&other.mask),
        }
    }

    /// True when `p` acts as identity everywhere outside this area.
    pub fn contains_support_of(&self, p: &PauliOperator) -> bool {
        let outside = self.mask.not();
        p.x_bits().and(&outside).is_zero() && p.z_bits().and(&outside).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn single_site_products() {
        let l = Lattice::new(1, 1);
        let x = PauliOperator::single(l, 0, Letter::X);
        let z = PauliOperator::single(l, 0, Letter::Z);
        assert!(x.multiply(&x).unwrap().is_identity());
        let xz = x.multiply(&z).unwrap();
        assert_eq!(xz.to_text(), "-iY");
        assert_eq!(z.multiply(&x).unwrap().to_text(), "+iY");
        assert_eq!(op("X").multiply(&op("Y")).unwrap().to_text(), "+iZ");
        assert_eq!(op("Y").multiply(&op("Z")).unwrap().to_text(), "+iX");
        assert_eq!(op("Z").multiply(&op("Y")).unwrap().to_text(), "-iX");
        assert_eq!(op("Y").multiply(&op("Y")).unwrap().to_text(), "+I");
    }

    #[test]
    fn symplectic_examples() {
        let l = Lattice::square(3);
        let x = PauliOperator::single(l, 4, Letter::X);
        assert!(x.symplectic_inner(&PauliOperator::single(l, 4, Letter::Z)).unwrap());
        assert!(!x.symplectic_inner(&PauliOperator::single(l, 5, Letter::Z)).unwrap());
        let other = PauliOperator::identity(Lattice::square(2));
        assert!(x.symplectic_inner(&other).is_err());
    }

    #[test]
    fn ising_ring_product_is_plus_identity() {
        let l = Lattice::new(1, 5);
        let mut acc = PauliOperator::identity(l);
        for i in 0..5 {
            let term = PauliOperator::on_sites(l, [l.site(0, i), l.site(0, i + 1)], Letter::Z);
            acc.mul_assign(&term);
        }
        assert!(acc.is_identity());
    }

    #[test]
    fn restrict_examples() {
        let l = Lattice::square(4);
        let id = PauliOperator::identity(l);
        assert!(id.restrict(&Area::horizontal_band(l, 1, 2)).is_identity());
        // Plaquette-like XXXX on a 2x2 block; the top-row band keeps XX.
        let p = PauliOperator::on_sites(l, [l.site(1, 1), l.site(1, 2), l.site(2, 1), l.site(2, 2)], Letter::X);
        let top = p.restrict(&Area::horizontal_band(l, 1, 1));
        assert_eq!(top, PauliOperator::on_sites(l, [l.site(1, 1), l.site(1, 2)], Letter::X));
        let y = op("-iYX/ZI");
        let full = y.restrict(&Area::full(y.lattice()));
        assert!(full.same_pattern(&y));
        assert_eq!(full.phase(), Phase::ONE);
    }

    #[test]
    fn support_window_examples() {
        let l = Lattice::square(8);
        let p = PauliOperator::single(l, l.site(3, 4), Letter::X);
        let w = p.support_window().unwrap();
        assert_eq!((w.rows.start, w.rows.end(), w.cols.start, w.cols.end()), (3, 3, 4, 4));
        let zz = PauliOperator::on_sites(l, [l.site(0, 0), l.site(0, 1)], Letter::Z);
        let w = zz.support_window().unwrap();
        assert_eq!((w.rows.start, w.rows.end(), w.cols.start, w.cols.end()), (0, 0, 0, 1));
        let wrapped = PauliOperator::on_sites(l, [l.site(0, 7), l.site(0, 0)], Letter::Z);
        let w = wrapped.support_window().unwrap();
        assert_eq!((w.cols.start, w.cols.end(), w.cols.len), (7, 0, 2));
        assert!(matches!(PauliOperator::identity(l).support_window(), Err(Error::EmptySupport)));
        let row = PauliOperator::on_sites(l, (0..8).map(|c| l.site(2, c)), Letter::X);
        let w = row.support_window().unwrap();
        assert!(w.cols.is_full());
        assert_eq!(w.rows.len, 1);
    }

    #[test]
    fn cyclic_cover_matches_enumeration() {
        // Every shortest cover found by exhaustive search over all
        // (start, len) pairs must equal the computed one.
        for n in 1..9usize {
            for mask in 1u32..(1 << n) {
                let occ: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
                let got = CyclicInterval::covering(&occ);
                let mut best = None;
                for len in 1..=n {
                    for start in 0..n {
                        let iv = CyclicInterval::new(start, len, n);
                        if (0..n).all(|i| !occ[i] || iv.contains(i)) {
                            best = Some((start, len));
                            break;
                        }
                    }
                    if best.is_some() {
                        break;
                    }
                }
                let (s, l) = best.unwrap();
                assert_eq!(got.len, l, "n={n} mask={mask:b}");
                if l < n {
                    assert_eq!(got.start, s, "n={n} mask={mask:b}");
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        for s in ["+XIZ/IYI", "-ZZ/II", "+iY", "-iXYZI/IIII"] {
            assert_eq!(op(s).to_text(), s);
        }
        assert_eq!(op("XX").to_text(), "+XX");
        assert!("XQ".parse::<PauliOperator>().is_err());
        assert!("XX/X".parse::<PauliOperator>().is_err());
    }

    #[test]
    fn transpose_is_involution() {
        let p = op("-XYZ/IZX");
        assert_eq!(p.transposed().to_text(), "-XI/YZ/ZX");
        assert_eq!(p.transposed().transposed(), p);
    }

    /// Exhaustive check that a product of letters commutes with
    /// `P` iff the tensor product of those letters commutes with `P^{⊗m}`.
    #[test]
    fn product_vs_tensor_commutation() {
        let letters = [Letter::I, Letter::X, Letter::Y, Letter::Z];
        for m in 1..=3usize {
            let combos = 4usize.pow(m as u32);
            for code in 0..combos {
                let ps: Vec<Letter> = (0..m).map(|i| letters[(code >> (2 * i)) & 3]).collect();
                for &p in &letters {
                    let product = ps.iter().fold(Letter::I, |acc, &l| acc.times(l));
                    let lhs = product.commutes_with(p);
                    let l = Lattice::new(1, m);
                    let mut tensor = PauliOperator::identity(l);
                    let mut power = PauliOperator::identity(l);
                    for (i, &pi) in ps.iter().enumerate() {
                        tensor.set_letter(i, pi);
                        power.set_letter(i, p);
                    }
                    assert_eq!(lhs, !tensor.anticommutes(&power));
                }
            }
        }
    }

    fn arb_op(lattice: Lattice) -> impl Strategy<Value = PauliOperator> {
        let n = lattice.n_sites();
        (proptest::collection::vec(0u8..4, n), 0u8..4).prop_map(move |(ls, ph)| {
            let mut p = PauliOperator::identity(lattice);
            for (s, l) in ls.into_iter().enumerate() {
                p.set_letter(s, [Letter::I, Letter::X, Letter::Y, Letter::Z][l as usize]);
            }
            p.with_phase(Phase::from_power(i64::from(ph)))
        })
    }

    fn arb_area(lattice: Lattice) -> impl Strategy<Value = Area> {
        proptest::collection::vec(any::<bool>(), lattice.n_sites())
            .prop_map(move |b| Area::from_mask(lattice, BitVector::from_bools(&b)).unwrap())
    }

    proptest! {
        #[test]
        fn algebra_properties(
            (p, q, r, a) in Just(Lattice::new(3, 5)).prop_flat_map(|l| (arb_op(l), arb_op(l), arb_op(l), arb_area(l)))
        ) {
            prop_assert_eq!(p.symplectic_inner(&q).unwrap(), q.symplectic_inner(&p).unwrap());
            let lhs = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let rhs = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            prop_assert_eq!(&lhs, &rhs);
            prop_assert!(p.multiply(&p).unwrap().is_pattern_identity());
            prop_assert!(p.multiply(&p).unwrap().phase().is_real());
            let pq = p.multiply(&q).unwrap();
            prop_assert_eq!(pq.x_bits(), &p.x_bits().xor(q.x_bits()));
            // pq = ±qp according to the symplectic form.
            let qp = q.multiply(&p).unwrap();
            let sign = if p.anticommutes(&q) { Phase::MINUS_ONE } else { Phase::ONE };
            prop_assert_eq!(pq.phase(), qp.phase().mul(sign));

            let ra = p.restrict(&a);
            prop_assert_eq!(ra.restrict(&a), ra.clone());
            prop_assert_eq!(a.complement().complement(), a.clone());
            let rebuilt = ra.multiply(&p.restrict(&a.complement())).unwrap();
            prop_assert!(rebuilt.same_pattern(&p));
            // Restricted commutator is the symplectic form summed over the area.
            prop_assert_eq!(ra.anticommutes(&q), p.anticommutes_on(&q, &a));
        }
    }
}
