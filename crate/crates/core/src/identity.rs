//! Identity sets (generator subsets multiplying to `+𝟙`), elementary-set
//! selection, topological classification and localization.

use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::code::{degeneracy_exponent, is_specified, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitVector, Echelon};
use crate::pauli::{Area, CyclicInterval, Lattice, Phase, SupportWindow};

/// Lattice direction. `Vertical` runs down the rows: vertical cuts separate
/// row `t-1` from row `t` and vertical confinement bounds the number of rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Vertical,
    Horizontal,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Vertical, Direction::Horizontal];

    pub fn name(self) -> &'static str {
        match self {
            Direction::Vertical => "vertical",
            Direction::Horizontal => "horizontal",
        }
    }

    pub fn other(self) -> Direction {
        match self {
            Direction::Vertical => Direction::Horizontal,
            Direction::Horizontal => Direction::Vertical,
        }
    }

    /// Number of lattice lines along this direction.
    pub fn extent(self, lattice: Lattice) -> usize {
        match self {
            Direction::Vertical => lattice.rows,
            Direction::Horizontal => lattice.cols,
        }
    }

    /// The window interval along this direction.
    pub fn interval(self, w: &SupportWindow) -> CyclicInterval {
        match self {
            Direction::Vertical => w.rows,
            Direction::Horizontal => w.cols,
        }
    }

    /// Band of `len` lines starting at line `start`: rows for `Vertical`,
    /// columns for `Horizontal`.
    pub fn band(self, lattice: Lattice, start: usize, len: usize) -> Area {
        match self {
            Direction::Vertical => Area::horizontal_band(lattice, start, len),
            Direction::Horizontal => Area::vertical_band(lattice, start, len),
        }
    }

    /// Largest generator window side along this direction.
    pub fn code_k(self, c: &StabilizerCode) -> usize {
        match self {
            Direction::Vertical => c.k_rows(),
            Direction::Horizontal => c.k_cols(),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Support windows of every generator. Codes reaching this module have
/// non-identity generators, so every window exists.
pub fn generator_windows(c: &StabilizerCode) -> Vec<SupportWindow> {
    c.generators()
        .iter()
        .map(|g| g.support_window().expect("generators are never the identity"))
        .collect()
}

/// A subset of generators whose letter product is trivial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IdentitySet {
    indicator: BitVector,
    product_phase: Phase,
}

impl IdentitySet {
    /// Checks that the selected generators multiply to `±𝟙`.
    pub fn new(c: &StabilizerCode, indicator: BitVector) -> Result<Self> {
        if indicator.len() != c.n_generators() {
            return Err(Error::Dimension {
                expected: c.n_generators(),
                found: indicator.len(),
            });
        }
        let product = c.product(&indicator);
        if !product.is_pattern_identity() {
            return Err(Error::NotIdentitySet {
                indicator: indicator.to_hex(),
            });
        }
        Ok(Self {
            indicator,
            product_phase: product.phase(),
        })
    }

    pub fn indicator(&self) -> &BitVector {
        &self.indicator
    }

    pub fn product_phase(&self) -> Phase {
        self.product_phase
    }

    /// True when the product is exactly `+𝟙`.
    pub fn is_identity(&self) -> bool {
        self.product_phase == Phase::ONE
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.indicator.iter_ones()
    }

    pub fn len(&self) -> usize {
        self.indicator.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.indicator.is_zero()
    }

    /// Symmetric difference. Generators square to `𝟙` and commute, so the
    /// product phase is the product of the two phases.
    pub fn combine(&self, other: &Self) -> Self {
        Self {
            indicator: self.indicator.xor(&other.indicator),
            product_phase: self.product_phase.mul(other.product_phase),
        }
    }

    /// Largest member window side along `d`.
    pub fn k_along(&self, windows: &[SupportWindow], d: Direction) -> usize {
        self.members().map(|i| d.interval(&windows[i]).len).max().unwrap_or(0)
    }

    /// Shortest cyclic intervals of rows and columns covering every member.
    pub fn bounding_box(&self, c: &StabilizerCode) -> Option<(CyclicInterval, CyclicInterval)> {
        let mut support = BitVector::zeros(c.n_qubits());
        for i in self.members() {
            let m = c.generator(i).support_mask();
            for (a, b) in support.words_mut().iter_mut().zip(m.words()) {
                *a |= *b;
            }
        }
        let cover = crate::pauli::PauliOperator::from_parts(
            c.lattice(),
            support,
            BitVector::zeros(c.n_qubits()),
            Phase::ONE,
        )
        .ok()?;
        cover.support_window().ok().map(|w| (w.rows, w.cols))
    }
}

/// Basis of the identity-set space: one set per generator that is implied by
/// earlier ones. Fails if any product is `-𝟙`.
pub fn identity_sets_basis(c: &StabilizerCode) -> Result<Vec<IdentitySet>> {
    c.group()
        .kernel()
        .iter()
        .map(|v| {
            let set = IdentitySet::new(c, v.clone())?;
            if !set.is_identity() {
                return Err(Error::Frustrated { indicator: v.to_hex() });
            }
            Ok(set)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Topology {
    pub trivial_vertical: bool,
    pub trivial_horizontal: bool,
}

impl Topology {
    pub fn trivial(&self, d: Direction) -> bool {
        match d {
            Direction::Vertical => self.trivial_vertical,
            Direction::Horizontal => self.trivial_horizontal,
        }
    }

    pub fn is_local(&self) -> bool {
        self.trivial_vertical && self.trivial_horizontal
    }

    pub fn is_global(&self) -> bool {
        !self.trivial_vertical && !self.trivial_horizontal
    }
}

/// Whether interval `iv` crosses the cut between lines `t-1` and `t`.
pub(crate) fn crosses(iv: &CyclicInterval, t: usize) -> bool {
    let off = iv.offset(t);
    off >= 1 && off < iv.len
}

/// Smallest cut `t` along `d` at which `g` splits into two pieces that each
/// multiply to the identity, if any.
pub fn trivial_cut(c: &StabilizerCode, windows: &[SupportWindow], g: &IdentitySet, d: Direction) -> Option<usize> {
    let members: Vec<usize> = g.members().collect();
    let n_bits = 2 * c.n_qubits();
    // The product of the crossing members equals that of the rest, because
    // the whole set multiplies to the identity.
    let cut_ok = |t: usize| {
        let mut acc = BitVector::zeros(n_bits);
        for &i in &members {
            if crosses(&d.interval(&windows[i]), t) {
                let gen = c.generator(i);
                acc.xor_assign(&gen.exponents());
            }
        }
        acc.is_zero()
    };
    let lines = d.extent(c.lattice());
    #[cfg(feature = "parallel")]
    {
        (0..lines).into_par_iter().filter(|&t| cut_ok(t)).min()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..lines).find(|&t| cut_ok(t))
    }
}

/// Topological triviality of an identity set in each direction.
pub fn classify_topology(c: &StabilizerCode, g: &IdentitySet) -> Result<Topology> {
    if !c.product(g.indicator()).is_identity() {
        return Err(Error::NotIdentitySet {
            indicator: g.indicator().to_hex(),
        });
    }
    let windows = generator_windows(c);
    Ok(classify_with(c, &windows, g))
}

fn classify_with(c: &StabilizerCode, windows: &[SupportWindow], g: &IdentitySet) -> Topology {
    Topology {
        trivial_vertical: trivial_cut(c, windows, g, Direction::Vertical).is_some(),
        trivial_horizontal: trivial_cut(c, windows, g, Direction::Horizontal).is_some(),
    }
}

/// How an elementary set was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetOrigin {
    /// Kernel of the generators inside a `k × k` window.
    Local,
    /// Kernel of the generators inside a band of `k` lines along a direction.
    Band(Direction),
    /// Remaining basis vector of the full kernel.
    Global,
}

/// Retained independent generators and the re-based elementary sets.
#[derive(Clone, Debug)]
pub struct ElementarySetFamily {
    /// Indicator of the independent generators `W_R`.
    pub w_r: BitVector,
    /// Raw basis: each set closes exactly one generator outside `W_R`.
    pub closing: Vec<IdentitySet>,
    /// Re-based sets, globally non-trivial first and local last.
    pub sets: Vec<IdentitySet>,
    pub topology: Vec<Topology>,
    pub origin: Vec<SetOrigin>,
    /// Degeneracy exponent `M`.
    pub m: usize,
}

impl ElementarySetFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Kernel vectors of the generator subset `subset`, lifted to indicators
/// over all generators.
fn subset_kernel(c: &StabilizerCode, subset: &[usize]) -> Vec<BitVector> {
    let mut e = Echelon::new(2 * c.n_qubits(), subset.len());
    for (j, &i) in subset.iter().enumerate() {
        e.insert_source(j, &c.generator(i).exponents());
    }
    e.kernel()
        .iter()
        .map(|v| {
            let mut lifted = BitVector::zeros(c.n_generators());
            for j in v.iter_ones() {
                lifted.set(subset[j], true);
            }
            lifted
        })
        .collect()
}

pub(crate) fn fits(iv: &CyclicInterval, start: usize, len: usize, modulus: usize) -> bool {
    let off = (iv.start + modulus - start) % modulus;
    off + iv.len <= len
}

/// Greedily lowers the weight of `v` by adding already chosen sets.
fn reduce_weight(v: &mut BitVector, chosen: &[BitVector]) {
    loop {
        let mut improved = false;
        for w in chosen {
            let cand = v.xor(w);
            if cand.count_ones() < v.count_ones() {
                *v = cand;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
}

/// Elementary sets of a specified code.
///
/// The raw kernel basis is re-based so that as many sets as possible are
/// local: first the kernels of generators inside every `k × k` window, then
/// kernels inside every horizontal and vertical band of `k` lines (weight
/// reduced against earlier choices), and finally any remaining raw basis
/// vectors. Each candidate is kept only if independent of earlier ones.
pub fn elementary_sets(c: &StabilizerCode) -> Result<ElementarySetFamily> {
    if !is_specified(c) {
        return Err(Error::NotSpecified {
            qubits: c.n_qubits(),
            generators: c.n_generators(),
        });
    }
    let m = degeneracy_exponent(c)?;
    let closing = identity_sets_basis(c)?;
    let group = c.group();
    let mut w_r = BitVector::zeros(c.n_generators());
    for &i in group.independent_rows() {
        w_r.set(i, true);
    }

    let lattice = c.lattice();
    let windows = generator_windows(c);
    let (rows, cols) = (lattice.rows, lattice.cols);
    let side = c.k();
    let (wh, ww) = (side.min(rows - 1).max(1), side.min(cols - 1).max(1));

    let mut span = Echelon::new(c.n_generators(), 0);
    let mut chosen: Vec<BitVector> = Vec::new();
    let mut origin = Vec::new();
    let mut offer = |v: BitVector, o: SetOrigin, chosen: &mut Vec<BitVector>, origin: &mut Vec<SetOrigin>| {
        if span.rank() < closing.len() && span.insert(&v) {
            chosen.push(v);
            origin.push(o);
        }
    };

    for r in 0..rows {
        for col in 0..cols {
            let inside: Vec<usize> = (0..c.n_generators())
                .filter(|&i| fits(&windows[i].rows, r, wh, rows) && fits(&windows[i].cols, col, ww, cols))
                .collect();
            for v in subset_kernel(c, &inside) {
                offer(v, SetOrigin::Local, &mut chosen, &mut origin);
            }
        }
    }
    for d in Direction::BOTH {
        let lines = d.extent(lattice);
        let width = side.min(lines - 1).max(1);
        for start in 0..lines {
            let inside: Vec<usize> = (0..c.n_generators())
                .filter(|&i| fits(&d.interval(&windows[i]), start, width, lines))
                .collect();
            for mut v in subset_kernel(c, &inside) {
                reduce_weight(&mut v, &chosen);
                offer(v, SetOrigin::Band(d), &mut chosen, &mut origin);
            }
        }
    }
    for raw in &closing {
        let mut v = raw.indicator().clone();
        reduce_weight(&mut v, &chosen);
        offer(v, SetOrigin::Global, &mut chosen, &mut origin);
    }
    debug_assert_eq!(chosen.len(), closing.len());

    let mut entries: Vec<(IdentitySet, Topology, SetOrigin)> = chosen
        .into_iter()
        .zip(origin)
        .map(|(v, o)| {
            let set = IdentitySet::new(c, v)?;
            let topo = classify_with(c, &windows, &set);
            Ok((set, topo, o))
        })
        .collect::<Result<_>>()?;
    entries.sort_by_key(|(_, t, _)| u8::from(t.trivial_vertical) + u8::from(t.trivial_horizontal));

    let mut family = ElementarySetFamily {
        w_r,
        closing,
        sets: Vec::with_capacity(entries.len()),
        topology: Vec::with_capacity(entries.len()),
        origin: Vec::with_capacity(entries.len()),
        m,
    };
    for (s, t, o) in entries {
        family.sets.push(s);
        family.topology.push(t);
        family.origin.push(o);
    }
    Ok(family)
}

/// Decomposition of an identity set produced by [`localize_pieces`].
#[derive(Clone, Debug)]
pub struct Localization {
    /// The cut at which the set was opened.
    pub cut: usize,
    /// Identity sets each confined to a band of `k` lines.
    pub pieces: Vec<IdentitySet>,
    /// Members crossing the cut; itself an identity set.
    pub crossing: IdentitySet,
}

/// Splits an identity set that is trivial along `d` into identity sets
/// confined to bands of `k` lines (plus the members crossing the cut).
///
/// The set is opened at its first trivial cut. Repeatedly, with `t` the top
/// line of what remains and `T` the members starting on it, the product of
/// `T` lives in the `k-1` lines below `t`; it is rewritten as a product `W`
/// of generators inside those lines, and `T ∪ W` is split off.
pub fn localize_pieces(c: &StabilizerCode, g: &IdentitySet, d: Direction) -> Result<Localization> {
    let windows = generator_windows(c);
    let cut = trivial_cut(c, &windows, g, d).ok_or(Error::DirectionNotTrivial { direction: d.name() })?;
    let lines = d.extent(c.lattice());
    let k = d.code_k(c);
    let opened_start = |i: usize| (d.interval(&windows[i]).start + lines - cut) % lines;

    let mut crossing = BitVector::zeros(c.n_generators());
    let mut rest = BitVector::zeros(c.n_generators());
    for i in g.members() {
        if crosses(&d.interval(&windows[i]), cut) {
            crossing.set(i, true);
        } else {
            rest.set(i, true);
        }
    }
    let mut pieces = Vec::new();
    while !rest.is_zero() {
        let top = rest.iter_ones().map(opened_start).min().expect("non-empty");
        let bottom = rest
            .iter_ones()
            .map(|i| opened_start(i) + d.interval(&windows[i]).len - 1)
            .max()
            .expect("non-empty");
        if bottom + 1 - top <= k {
            pieces.push(IdentitySet::new(c, rest)?);
            break;
        }
        let mut t_set = BitVector::zeros(c.n_generators());
        let mut target = BitVector::zeros(2 * c.n_qubits());
        for i in rest.iter_ones().filter(|&i| opened_start(i) == top) {
            t_set.set(i, true);
            target.xor_assign(&c.generator(i).exponents());
        }
        // Generators inside the k-1 lines below the top line.
        let strip: Vec<usize> = (0..c.n_generators())
            .filter(|&i| fits(&d.interval(&windows[i]), (cut + top + 1) % lines, k - 1, lines))
            .collect();
        let mut e = Echelon::new(2 * c.n_qubits(), strip.len());
        for (j, &i) in strip.iter().enumerate() {
            e.insert_source(j, &c.generator(i).exponents());
        }
        let combo = e.solve(&target).ok_or_else(|| {
            Error::MembershipFailed(format!("product of top-line members at line {} is not generated inside the strip", (cut + top) % lines))
        })?;
        let mut piece = t_set;
        for j in combo.iter_ones() {
            piece.flip(strip[j]);
        }
        let piece = IdentitySet::new(c, piece)?;
        rest.xor_assign(piece.indicator());
        pieces.push(piece);
    }
    Ok(Localization {
        cut,
        pieces,
        crossing: IdentitySet::new(c, crossing)?,
    })
}

/// An identity set confined to a band of `k` lines along `d`, obtained from
/// `g` by the top-line peeling of [`localize_pieces`]. Returns `g` unchanged
/// when it is already confined.
pub fn localize(c: &StabilizerCode, g: &IdentitySet, d: Direction) -> Result<IdentitySet> {
    let loc = localize_pieces(c, g, d)?;
    if loc.crossing.is_empty() && loc.pieces.len() == 1 {
        return Ok(g.clone());
    }
    loc.pieces
        .into_iter()
        .next()
        .ok_or_else(|| Error::MembershipFailed("identity set has no members below the cut".into()))
}

/// Applies [`localize`] vertically and then horizontally, confining the set
/// to a `k × k` region when it is trivial in both directions.
pub fn localize_both(c: &StabilizerCode, g: &IdentitySet) -> Result<IdentitySet> {
    let v = localize(c, g, Direction::Vertical)?;
    localize(c, &v, Direction::Horizontal)
}
