//! String and point operators built from identity sets by strip restriction,
//! their logical classification, and the full degeneracy-breaking assembly.

use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::code::{builtin, degeneracy_exponent, Family, Pattern, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, Echelon};
use crate::identity::{
    classify_topology, elementary_sets, fits, generator_windows, Direction, ElementarySetFamily, IdentitySet,
};
use crate::pauli::{Area, CyclicInterval, Letter, PauliOperator, Phase, SupportWindow};

/// Shape of an operator: a loop around one cycle of the torus, or a point
/// operator whose support does not wrap either cycle. A support whose
/// minimal cyclic cover spans more than half of a cycle counts as wrapping
/// it; loops on sublattices (every other row, say) leave gaps and are never
/// fully covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
    Point,
}

impl Orientation {
    pub fn of(p: &PauliOperator) -> Orientation {
        let Ok(w) = p.support_window() else {
            return Orientation::Point;
        };
        let h = 2 * w.cols.len > w.cols.modulus;
        let v = 2 * w.rows.len > w.rows.modulus;
        match (h, v) {
            (true, false) => Orientation::Horizontal,
            (false, true) => Orientation::Vertical,
            (false, false) => Orientation::Point,
            _ if w.cols.len * w.rows.modulus >= w.rows.len * w.cols.modulus => Orientation::Horizontal,
            _ => Orientation::Vertical,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Horizontal => "horizontal",
            Orientation::Vertical => "vertical",
            Orientation::Point => "point",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which strip a string is built in: `Horizontal` strings come from bands of
/// rows, `Vertical` strings from bands of columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StripKind {
    Horizontal,
    Vertical,
}

impl StripKind {
    /// Direction in which the band is confined.
    pub fn band_direction(self) -> Direction {
        match self {
            StripKind::Horizontal => Direction::Vertical,
            StripKind::Vertical => Direction::Horizontal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StripKind::Horizontal => "H",
            StripKind::Vertical => "V",
        }
    }
}

/// Action of a commuting Pauli operator on the ground space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LogicalClass {
    /// Not a product of generators.
    Nontrivial,
    /// `p = sign · ∏_{witness} K`.
    Trivial { witness: BitVector, sign: Phase },
}

impl LogicalClass {
    pub fn is_nontrivial(&self) -> bool {
        matches!(self, LogicalClass::Nontrivial)
    }
}

/// Classifies an operator commuting with every generator.
pub fn logical_class(c: &StabilizerCode, p: &PauliOperator) -> Result<LogicalClass> {
    if p.lattice() != c.lattice() {
        return Err(Error::LatticeMismatch {
            left: c.lattice().to_string(),
            right: p.lattice().to_string(),
        });
    }
    if let Some(&generator) = c.syndrome_of(p).first() {
        return Err(Error::NotALogical { generator });
    }
    Ok(match c.group().solve(&p.exponents()) {
        None => LogicalClass::Nontrivial,
        Some(witness) => {
            let prod = c.product(&witness);
            let sign = p.phase().mul(Phase::from_power(-i64::from(prod.phase().power())));
            LogicalClass::Trivial { witness, sign }
        }
    })
}

/// How a reported operator was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Strip(StripKind),
    LocalBreaker,
    /// Found by the window sweep after strips left a degeneracy unbroken.
    Residual,
    /// Anticommuting partner of emitted operator `of`.
    Partner { of: usize },
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Strip(k) => write!(f, "strip-{}", k.name()),
            Construction::LocalBreaker => f.write_str("local"),
            Construction::Residual => f.write_str("residual"),
            Construction::Partner { of } => write!(f, "partner-of-{of}"),
        }
    }
}

/// A constructed operator with its provenance and classification.
#[derive(Clone, Debug)]
pub struct StringReport {
    pub operator: PauliOperator,
    /// Index of the source set within the elementary family, if any.
    pub set_index: Option<usize>,
    pub source_set: Option<IdentitySet>,
    pub construction: Construction,
    pub orientation: Orientation,
    /// Top row (or left column) of the strip.
    pub offset: usize,
    /// Strip thickness actually used.
    pub thickness: usize,
    /// Number of narrowing steps taken before a non-trivial string appeared.
    pub narrowed: usize,
    pub commutes_all: bool,
    pub independence: LogicalClass,
}

/// Generators of `g` lying entirely within `len` lines from `start` along `d`.
fn members_within(g: &IdentitySet, windows: &[SupportWindow], d: Direction, start: usize, len: usize, lines: usize) -> BitVector {
    let mut out = BitVector::zeros(g.indicator().len());
    for i in g.members() {
        if fits(&d.interval(&windows[i]), start % lines, len, lines) {
            out.set(i, true);
        }
    }
    out
}

/// `⋀_L ∏_{K ∈ g^{L↓}} K` with `L` of thickness `max(κ-1, 1)` from line `l`
/// and `L↓` of thickness `2κ-2`.
pub fn strip_operator(c: &StabilizerCode, windows: &[SupportWindow], g: &IdentitySet, kind: StripKind, l: usize, kappa: usize) -> (PauliOperator, usize) {
    let d = kind.band_direction();
    let lines = d.extent(c.lattice());
    let thickness = kappa.saturating_sub(1).max(1);
    let below = (2 * kappa).saturating_sub(2).max(thickness);
    let inside = members_within(g, windows, d, l, below, lines);
    let op = c.product(&inside).restrict(&d.band(c.lattice(), l % lines, thickness));
    (op, thickness)
}

/// Builds `S^H` (or `S^V`) for identity set `g` with its strip starting at
/// line `l`. The strip thickness follows the set's own window size; if the
/// result is a product of generators although `g` is topologically
/// non-trivial across the strip, the thickness is narrowed one line at a
/// time until a non-trivial operator appears or the set is exhausted.
pub fn build_string(c: &StabilizerCode, g: &IdentitySet, kind: StripKind, l: usize) -> Result<StringReport> {
    c.require_local()?;
    if !c.product(g.indicator()).is_identity() {
        return Err(Error::NotIdentitySet {
            indicator: g.indicator().to_hex(),
        });
    }
    let windows = generator_windows(c);
    let d = kind.band_direction();
    let lines = d.extent(c.lattice());
    let topo = classify_topology(c, g)?;
    let kappa0 = g.k_along(&windows, d).max(1);

    let mut last = None;
    for step in 0..kappa0 {
        let kappa = kappa0 - step;
        let (mut op, mut thickness) = strip_operator(c, &windows, g, kind, l, kappa);
        if !c.syndrome_of(&op).is_empty() && step == 0 {
            (op, thickness) = strip_operator(c, &windows, g, kind, l, d.code_k(c));
        }
        if let Some(&generator) = c.syndrome_of(&op).first() {
            return Err(Error::ConstructionBug { generator });
        }
        let independence = logical_class(c, &op)?;
        let done = independence.is_nontrivial() || topo.trivial(d);
        let report = StringReport {
            orientation: Orientation::of(&op),
            operator: op,
            set_index: None,
            source_set: Some(g.clone()),
            construction: Construction::Strip(kind),
            offset: l % lines,
            thickness,
            narrowed: step,
            commutes_all: true,
            independence,
        };
        if done {
            return Ok(report);
        }
        last = Some(report);
    }
    Ok(last.expect("at least one construction attempt"))
}

/// Witness `W ⊆ g` with `S^l · S^{l'} = ±∏_{W} K`, verified by multiplying
/// out. For `l' = l-1` the witness must equal the closed form
/// `g^{band(l-1, κ)} △ g^{band(l, κ-1)}`.
pub fn check_row_shift_dependence(c: &StabilizerCode, g: &IdentitySet, kind: StripKind, l: usize, l2: usize) -> Result<BitVector> {
    c.require_local()?;
    let windows = generator_windows(c);
    let d = kind.band_direction();
    let lines = d.extent(c.lattice());
    let kappa = g.k_along(&windows, d).max(1);
    let (s1, thickness) = strip_operator(c, &windows, g, kind, l, kappa);
    let (s2, _) = strip_operator(c, &windows, g, kind, l2, kappa);
    let product = s1.multiply(&s2)?;

    let witness = if l % lines == l2 % lines {
        BitVector::zeros(c.n_generators())
    } else if (l2 + 1) % lines == l % lines {
        let above = members_within(g, &windows, d, l2, thickness + 1, lines);
        let strip = members_within(g, &windows, d, l, thickness, lines);
        above.xor(&strip)
    } else {
        let members: Vec<usize> = g.members().collect();
        let mut e = Echelon::new(2 * c.n_qubits(), members.len());
        for (j, &i) in members.iter().enumerate() {
            e.insert_source(j, &c.generator(i).exponents());
        }
        let combo = e
            .solve(&product.exponents())
            .ok_or_else(|| Error::WitnessNotFound(format!("strings at offsets {l} and {l2} differ by a non-member product")))?;
        let mut w = BitVector::zeros(c.n_generators());
        for j in combo.iter_ones() {
            w.set(members[j], true);
        }
        w
    };
    if !c.product(&witness).same_pattern(&product) {
        return Err(Error::WitnessNotFound(format!(
            "closed-form witness for offsets {l} and {l2} does not reproduce the product"
        )));
    }
    Ok(witness)
}

/// Single-site Pauli variables (x bits first, then z bits) over `sites`.
fn site_variables(c: &StabilizerCode, sites: &[usize], letters: &[Letter]) -> Vec<PauliOperator> {
    let mut vars = Vec::new();
    for &l in letters {
        for &s in sites {
            vars.push(PauliOperator::single(c.lattice(), s, l));
        }
    }
    vars
}

/// Syndrome of `p` as a bit vector over the generators.
fn syndrome_bits(c: &StabilizerCode, p: &PauliOperator) -> BitVector {
    let mut v = BitVector::zeros(c.n_generators());
    for i in c.syndrome_of(p) {
        v.set(i, true);
    }
    v
}

/// Operators supported in the bounding window of a local identity set that
/// commute with every generator but are not products of generators, sorted
/// by weight. Each one is independent of the generators and of the earlier
/// entries.
pub fn local_breakers(c: &StabilizerCode, g: &IdentitySet) -> Result<Vec<PauliOperator>> {
    let (rows, cols) = g
        .bounding_box(c)
        .ok_or_else(|| Error::InvalidArgument("identity set is empty".into()))?;
    let mut span = c.group().clone();
    let found: Vec<PauliOperator> = window_operators(c, rows, cols)?
        .into_iter()
        .filter(|p| span.insert(&p.exponents()))
        .collect();
    if found.is_empty() {
        return Err(Error::NoLocalBreaker {
            row: rows.start,
            col: cols.start,
        });
    }
    Ok(found)
}

/// Every operator supported in the window that commutes with all
/// generators, as a kernel basis sorted by weight.
fn window_operators(c: &StabilizerCode, rows: CyclicInterval, cols: CyclicInterval) -> Result<Vec<PauliOperator>> {
    let area = Area::rect(c.lattice(), rows, cols);
    let sites: Vec<usize> = area.mask().iter_ones().collect();
    let vars = site_variables(c, &sites, &[Letter::X, Letter::Z]);
    let matrix = BitMatrix::from_rows(vars.iter().map(|v| syndrome_bits(c, v)).collect(), c.n_generators())?;
    let mut candidates: Vec<PauliOperator> = matrix
        .kernel_basis()
        .into_iter()
        .map(|combo| {
            let mut p = PauliOperator::identity(c.lattice());
            for j in combo.iter_ones() {
                p.mul_assign(&vars[j]);
            }
            p.with_phase(Phase::ONE)
        })
        .collect();
    candidates.sort_by_cached_key(|p| (p.weight(), p.to_text()));
    Ok(candidates)
}

/// Anticommuting partner of `a` supported on a thin band through `a`, if
/// one exists. X-only, then Z-only, then general operators are tried.
pub fn find_partner(c: &StabilizerCode, a: &PauliOperator) -> Option<PauliOperator> {
    let w = a.support_window().ok()?;
    for d in Direction::BOTH {
        let iv = d.interval(&w);
        let width = (d.code_k(c).saturating_sub(1)).max(1).max(iv.len);
        let band = d.band(c.lattice(), iv.start, width);
        let sites: Vec<usize> = band.mask().iter_ones().collect();
        for letters in [&[Letter::X][..], &[Letter::Z][..], &[Letter::X, Letter::Z][..]] {
            let vars = site_variables(c, &sites, letters);
            let rows: Vec<BitVector> = vars
                .iter()
                .map(|v| {
                    let mut bits = syndrome_bits(c, v);
                    bits = bits.concat(&BitVector::from_bools(&[v.anticommutes(a)]));
                    bits
                })
                .collect();
            let matrix = BitMatrix::from_rows(rows, c.n_generators() + 1).ok()?;
            let target = BitVector::unit(c.n_generators() + 1, c.n_generators());
            if let Ok(Some(combo)) = matrix.solve_membership(&target) {
                let mut p = PauliOperator::identity(c.lattice());
                for j in combo.iter_ones() {
                    p.mul_assign(&vars[j]);
                }
                return Some(p.with_phase(Phase::ONE));
            }
        }
    }
    None
}

/// Outcome of the final rank certificate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub n_qubits: usize,
    pub m: usize,
    /// Anticommuting pairs found by symplectic Gram–Schmidt (operator indices).
    pub pairs: Vec<(usize, usize)>,
    /// Operators left commuting with everything else.
    pub radical: Vec<usize>,
    /// Rank of generators together with one operator from each pair and the radical.
    pub rank: usize,
    pub passed: bool,
}

impl Certificate {
    /// Degeneracies not broken by the emitted operators.
    pub fn residual(&self) -> usize {
        self.n_qubits - self.rank
    }
}

/// Symplectic Gram–Schmidt over `ops`, then the rank of the generators
/// joined with a maximal mutually commuting subset.
pub fn certify(c: &StabilizerCode, ops: &[PauliOperator]) -> Certificate {
    let mut work: Vec<(usize, PauliOperator)> = ops.iter().cloned().enumerate().collect();
    let mut pairs = Vec::new();
    let mut radical = Vec::new();
    let mut isotropic = Vec::new();
    while !work.is_empty() {
        let (ia, a) = work.remove(0);
        match work.iter().position(|(_, b)| a.anticommutes(b)) {
            None => {
                radical.push(ia);
                isotropic.push(a);
            }
            Some(pos) => {
                let (ib, b) = work.remove(pos);
                for (_, x) in work.iter_mut() {
                    let (xa, xb) = (x.anticommutes(&a), x.anticommutes(&b));
                    if xb {
                        x.mul_assign(&a);
                    }
                    if xa {
                        x.mul_assign(&b);
                    }
                }
                pairs.push((ia, ib));
                isotropic.push(a);
            }
        }
    }
    let mut span = c.group().clone();
    for p in &isotropic {
        span.insert(&p.exponents());
    }
    let rank = span.rank();
    let m = c.n_qubits() - c.group().rank();
    Certificate {
        n_qubits: c.n_qubits(),
        m,
        pairs,
        radical,
        rank,
        passed: rank == c.n_qubits(),
    }
}

/// A candidate that turned out dependent on the generators and earlier
/// emitted operators.
#[derive(Clone, Debug)]
pub struct DependentCandidate {
    pub report: StringReport,
    /// Generators selected among the first `R` bits, earlier emitted
    /// operators (by emission index) in the rest.
    pub witness: BitVector,
}

/// Full output of [`assemble_logicals`].
#[derive(Clone, Debug)]
pub struct Assembly {
    pub family: ElementarySetFamily,
    pub emitted: Vec<StringReport>,
    pub dependent: Vec<DependentCandidate>,
    pub partners: Vec<StringReport>,
    pub certificate: Certificate,
}

impl Assembly {
    /// Emitted operators followed by partners.
    pub fn all_operators(&self) -> Vec<PauliOperator> {
        self.emitted
            .iter()
            .chain(&self.partners)
            .map(|r| r.operator.clone())
            .collect()
    }
}

/// Candidates for one elementary set: `S^H` if the set is non-trivial
/// vertically, `S^V` if non-trivial horizontally.
fn strip_candidates(c: &StabilizerCode, family: &ElementarySetFamily, i: usize) -> Result<Vec<StringReport>> {
    let topo = family.topology[i];
    let mut out = Vec::new();
    for (kind, d) in [
        (StripKind::Horizontal, Direction::Vertical),
        (StripKind::Vertical, Direction::Horizontal),
    ] {
        if !topo.trivial(d) {
            let mut r = build_string(c, &family.sets[i], kind, 0)?;
            r.set_index = Some(i);
            out.push(r);
        }
    }
    Ok(out)
}

/// Constructs operators breaking every degeneracy of a specified code and
/// certifies the result.
///
/// Sets are visited globally non-trivial first: each contributes `S^H`
/// and/or `S^V` according to its topology, and a local set contributes a
/// local breaker while degeneracy remains. A candidate is emitted only if it
/// is independent of the generators and of everything emitted before it.
/// Emitted operators without an anticommuting partner among the others get
/// one searched on a thin band, and the certificate checks that generators
/// plus a maximal commuting subset reach full rank.
fn certify_reports(c: &StabilizerCode, emitted: &[StringReport], partners: &[StringReport]) -> Certificate {
    let ops: Vec<PauliOperator> = emitted.iter().chain(partners).map(|r| r.operator.clone()).collect();
    certify(c, &ops)
}

/// Looks for a partner of `emitted[i]` unless something already anticommutes
/// with it.
fn pair_up(c: &StabilizerCode, emitted: &[StringReport], partners: &mut Vec<StringReport>, i: usize) -> Result<()> {
    let rep = &emitted[i];
    if emitted.iter().chain(partners.iter()).any(|o| o.operator.anticommutes(&rep.operator)) {
        return Ok(());
    }
    if let Some(op) = find_partner(c, &rep.operator) {
        partners.push(StringReport {
            orientation: Orientation::of(&op),
            independence: logical_class(c, &op)?,
            operator: op,
            set_index: rep.set_index,
            source_set: None,
            construction: Construction::Partner { of: i },
            offset: 0,
            thickness: 0,
            narrowed: 0,
            commutes_all: true,
        });
    }
    Ok(())
}

pub fn assemble_logicals(c: &StabilizerCode) -> Result<Assembly> {
    c.require_local()?;
    let family = elementary_sets(c)?;
    let r = c.n_generators();
    let budget = 2 * c.n_qubits();

    #[cfg(feature = "parallel")]
    let strips: Vec<Result<Vec<StringReport>>> = (0..family.len())
        .into_par_iter()
        .map(|i| strip_candidates(c, &family, i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let strips: Vec<Result<Vec<StringReport>>> = (0..family.len()).map(|i| strip_candidates(c, &family, i)).collect();

    let mut span = Echelon::new(2 * c.n_qubits(), r + budget);
    for (i, g) in c.generators().iter().enumerate() {
        span.insert_source(i, &g.exponents());
    }
    let mut emitted: Vec<StringReport> = Vec::new();
    let mut dependent = Vec::new();
    let mut offer = |report: StringReport, span: &mut Echelon, emitted: &mut Vec<StringReport>| {
        let exps = report.operator.exponents();
        match span.solve(&exps) {
            Some(combo) => {
                dependent.push(DependentCandidate { report, witness: combo });
                false
            }
            None => {
                span.insert_source(r + emitted.len(), &exps);
                emitted.push(report);
                true
            }
        }
    };

    for (i, cands) in strips.into_iter().enumerate() {
        for rep in cands? {
            offer(rep, &mut span, &mut emitted);
        }
        if family.topology[i].is_local() && span.rank() < c.n_qubits() {
            let breakers = local_breakers(c, &family.sets[i])?;
            for op in breakers {
                if span.contains(&op.exponents()) {
                    continue;
                }
                let report = StringReport {
                    orientation: Orientation::of(&op),
                    independence: logical_class(c, &op)?,
                    operator: op,
                    set_index: Some(i),
                    source_set: Some(family.sets[i].clone()),
                    construction: Construction::LocalBreaker,
                    offset: 0,
                    thickness: 0,
                    narrowed: 0,
                    commutes_all: true,
                };
                offer(report, &mut span, &mut emitted);
                break;
            }
        }
    }

    let mut partners = Vec::new();
    for i in 0..emitted.len() {
        pair_up(c, &emitted, &mut partners, i)?;
    }
    let mut certificate = certify_reports(c, &emitted, &partners);

    if !certificate.passed {
        let lattice = c.lattice();
        let (kr, kc) = (c.k().min(lattice.rows), c.k().min(lattice.cols));
        'sweep: for r0 in 0..lattice.rows {
            for c0 in 0..lattice.cols {
                let rows = CyclicInterval::new(r0, kr, lattice.rows);
                let cols = CyclicInterval::new(c0, kc, lattice.cols);
                let mut added = false;
                for op in window_operators(c, rows, cols)? {
                    if span.contains(&op.exponents()) {
                        continue;
                    }
                    let report = StringReport {
                        orientation: Orientation::of(&op),
                        independence: logical_class(c, &op)?,
                        operator: op,
                        set_index: None,
                        source_set: None,
                        construction: Construction::Residual,
                        offset: 0,
                        thickness: 0,
                        narrowed: 0,
                        commutes_all: true,
                    };
                    if offer(report, &mut span, &mut emitted) {
                        pair_up(c, &emitted, &mut partners, emitted.len() - 1)?;
                        added = true;
                    }
                }
                if added {
                    certificate = certify_reports(c, &emitted, &partners);
                    if certificate.passed {
                        break 'sweep;
                    }
                }
            }
        }
    }

    Ok(Assembly {
        family,
        emitted,
        dependent,
        partners,
        certificate,
    })
}

/// Row-product configurations of a translation-invariant `3 × 3` code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TranslationalCase {
    /// Every row multiplies to `𝟙`, columns do not all.
    IdentityRows,
    /// `(P, 𝟙, P)`.
    Alternating,
    /// `(P, P, 𝟙)` or `(𝟙, P, P)`.
    Paired,
    /// Three distinct non-identity row products: `[R₁, R₃] ≠ 0`.
    Rejected,
    /// Rows and columns all multiply to `𝟙`.
    ColumnFallback,
    /// `R₁R₂R₃ ≠ 𝟙`, so translates cannot multiply to the identity.
    NoRowIdentity,
}

impl TranslationalCase {
    pub fn name(self) -> &'static str {
        match self {
            TranslationalCase::IdentityRows => "identity-rows",
            TranslationalCase::Alternating => "alternating",
            TranslationalCase::Paired => "paired",
            TranslationalCase::Rejected => "rejected",
            TranslationalCase::ColumnFallback => "column-fallback",
            TranslationalCase::NoRowIdentity => "no-row-identity",
        }
    }
}

/// An operator proposed by the `3 × 3` classifier.
#[derive(Clone, Debug)]
pub struct TranslationalString {
    pub label: String,
    pub operator: PauliOperator,
    pub commutes_all: bool,
    /// `None` when the operator does not commute with the generators.
    pub class: Option<LogicalClass>,
}

#[derive(Clone, Debug)]
pub struct TranslationalVerdict {
    pub row_products: [Letter; 3],
    pub column_products: [Letter; 3],
    pub case: TranslationalCase,
    pub r1_r3_commute: bool,
    pub degeneracy_exponent: Option<usize>,
    pub strings: Vec<TranslationalString>,
    /// Whether the single-row strings on rows 0 and 1 act differently.
    pub rows_independent: Option<bool>,
    pub notes: Vec<String>,
}

fn letter_product(letters: impl IntoIterator<Item = Letter>) -> Letter {
    letters.into_iter().fold(Letter::I, Letter::times)
}

fn full_row(c: &StabilizerCode, row: usize, letter: Letter) -> PauliOperator {
    let l = c.lattice();
    PauliOperator::on_sites(l, (0..l.cols).map(|col| row * l.cols + col), letter)
}

fn propose(c: &StabilizerCode, label: impl Into<String>, op: PauliOperator) -> Result<TranslationalString> {
    let commutes_all = c.syndrome_of(&op).is_empty();
    let class = if commutes_all { Some(logical_class(c, &op)?) } else { None };
    Ok(TranslationalString {
        label: label.into(),
        operator: op,
        commutes_all,
        class,
    })
}

/// Classifies the translation-invariant code generated by `pattern` on an
/// `n × n` torus by its row products `R_i = ∏_j C_ij`.
pub fn classify_translational_3x3(pattern: &Pattern, n: usize) -> Result<TranslationalVerdict> {
    if pattern.height() != 3 || pattern.width() != 3 {
        return Err(Error::InvalidArgument(format!("expected a 3x3 pattern, got {pattern}")));
    }
    let rows: [Letter; 3] = std::array::from_fn(|i| letter_product((0..3).map(|j| pattern.get(i, j))));
    let cols: [Letter; 3] = std::array::from_fn(|j| letter_product((0..3).map(|i| pattern.get(i, j))));
    let r1_r3_commute = rows[0].commutes_with(rows[2]);
    let mut verdict = TranslationalVerdict {
        row_products: rows,
        column_products: cols,
        case: TranslationalCase::Rejected,
        r1_r3_commute,
        degeneracy_exponent: None,
        strings: Vec::new(),
        rows_independent: None,
        notes: Vec::new(),
    };
    let distinct = rows.iter().all(|&r| r != Letter::I) && rows[0] != rows[1] && rows[1] != rows[2] && rows[0] != rows[2];
    if distinct {
        verdict.notes.push(format!(
            "[R1,R3] = [{},{}] != 0: the pattern cannot commute with its translates",
            rows[0].as_char(),
            rows[2].as_char()
        ));
        return Ok(verdict);
    }
    let code = match builtin(Family::Trans3x3, n, Some(pattern)) {
        Err(Error::CommutationViolation { .. }) => return Err(Error::NonCommutingPattern),
        Err(Error::IdentityGenerator { .. }) => {
            return Err(Error::InvalidArgument("pattern is the identity".into()));
        }
        other => other?,
    };
    let m = degeneracy_exponent(&code)?;
    verdict.degeneracy_exponent = Some(m);

    if letter_product(rows) != Letter::I {
        verdict.case = TranslationalCase::NoRowIdentity;
        verdict.notes.push("R1 R2 R3 != I: no row of translates multiplies to the identity".into());
        return Ok(verdict);
    }

    if rows.iter().all(|&r| r == Letter::I) {
        if cols.iter().all(|&c| c == Letter::I) {
            verdict.case = TranslationalCase::ColumnFallback;
            let l = code.lattice();
            for p in Letter::NON_IDENTITY {
                let op = PauliOperator::on_sites(l, (0..3).map(|r| r * l.cols), p);
                verdict.strings.push(propose(&code, format!("column {}^3", p.as_char()), op)?);
            }
            let ok = verdict.strings.iter().filter(|s| s.commutes_all).count();
            verdict.notes.push(format!("{ok} of 3 weight-3 column operators commute with every translate"));
        } else {
            verdict.case = TranslationalCase::IdentityRows;
            // Translates anchored on row 0 multiply to the identity.
            let mut ind = BitVector::zeros(code.n_generators());
            for j in 0..n {
                ind.set(j, true);
            }
            let set = IdentitySet::new(&code, ind)?;
            let rep = build_string(&code, &set, StripKind::Vertical, 0)?;
            verdict.strings.push(propose(&code, "column construction on a row set", rep.operator)?);
            verdict.notes.push("a single row of translates multiplies to the identity".into());
        }
        return Ok(verdict);
    }

    let p = rows.iter().copied().find(|&r| r != Letter::I).expect("some row product is non-trivial");
    verdict.case = if rows[1] == Letter::I {
        TranslationalCase::Alternating
    } else {
        TranslationalCase::Paired
    };
    let l = code.lattice();
    let mut two_row = full_row(&code, 0, rows[0]);
    two_row.mul_assign(&full_row(&code, 1, rows[0].times(rows[1])));
    let two_row = two_row.with_phase(Phase::ONE);
    verdict.strings.push(propose(&code, "two-row string", two_row)?);
    let row0 = full_row(&code, 0, p);
    let row1 = full_row(&code, 1, p);
    verdict.strings.push(propose(&code, format!("row-0 {} loop", p.as_char()), row0.clone())?);
    verdict.strings.push(propose(&code, format!("row-1 {} loop", p.as_char()), row1.clone())?);
    if code.syndrome_of(&row0).is_empty() && code.syndrome_of(&row1).is_empty() {
        let prod = row0.multiply(&row1)?;
        verdict.rows_independent = Some(logical_class(&code, &prod)?.is_nontrivial());
    }
    if verdict.case == TranslationalCase::Alternating {
        verdict.notes.push(format!(
            "every second row of translates multiplies to the identity: degeneracy at least 2^2 = 4 (M = {m})"
        ));
    }
    debug_assert_eq!(l.rows, n);
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::builtin;

    fn toric(n: usize) -> StabilizerCode {
        builtin(Family::Toric, n, None).unwrap()
    }

    fn all_set(c: &StabilizerCode, range: std::ops::Range<usize>) -> IdentitySet {
        let mut v = BitVector::zeros(c.n_generators());
        for i in range {
            v.set(i, true);
        }
        IdentitySet::new(c, v).unwrap()
    }

    #[test]
    fn toric_strips_are_single_lines() {
        let c = toric(4);
        let l = c.lattice();
        let plaquettes = all_set(&c, 0..16);
        for off in 0..l.rows {
            let s = build_string(&c, &plaquettes, StripKind::Horizontal, off).unwrap();
            assert!(s.independence.is_nontrivial());
            assert_eq!(s.orientation, Orientation::Horizontal);
            assert!(s.operator.z_bits().is_zero());
            assert_eq!(s.operator.weight(), 4);
            let w = s.operator.support_window().unwrap();
            assert_eq!(w.rows.len, 1);
            assert_eq!(w.rows.start % 2, 0, "X loop lives on horizontal edges");
        }
        let s = build_string(&c, &plaquettes, StripKind::Vertical, 0).unwrap();
        assert_eq!(s.orientation, Orientation::Vertical);
        assert_eq!(s.operator.support(), (0..4).map(|r| l.site(2 * r + 1, 0)).collect::<Vec<_>>());
    }

    #[test]
    fn ising_strings() {
        let n = 6;
        let ring = builtin(Family::Ising1d, n, None).unwrap();
        let set = all_set(&ring, 0..n);
        let s = build_string(&ring, &set, StripKind::Horizontal, 2).unwrap();
        assert_eq!(s.operator, PauliOperator::single(ring.lattice(), ring.lattice().site(2, 0), Letter::Z));
        assert_eq!(s.orientation, Orientation::Point);

        let ising = builtin(Family::Ising2d, n, None).unwrap();
        let row = all_set(&ising, n..2 * n);
        let s = build_string(&ising, &row, StripKind::Vertical, 3).unwrap();
        assert_eq!(s.operator, PauliOperator::single(ising.lattice(), ising.lattice().site(1, 3), Letter::Z));
    }

    #[test]
    fn logical_class_examples() {
        let c = toric(4);
        let l = c.lattice();
        for (i, g) in c.generators().iter().enumerate() {
            match logical_class(&c, g).unwrap() {
                LogicalClass::Trivial { witness, sign } => {
                    assert!(c.product(&witness).same_pattern(g), "generator {i}");
                    assert_eq!(sign, Phase::ONE);
                }
                LogicalClass::Nontrivial => panic!("generator classified nontrivial"),
            }
        }
        let row = |r: usize| PauliOperator::on_sites(l, (0..4).map(|col| l.site(2 * r as isize, col)), Letter::X);
        assert!(logical_class(&c, &row(0)).unwrap().is_nontrivial());
        match logical_class(&c, &row(0).multiply(&row(2)).unwrap()).unwrap() {
            LogicalClass::Trivial { witness, .. } => assert!(witness.iter_ones().all(|i| i < 16)),
            LogicalClass::Nontrivial => panic!("two parallel loops should be trivial"),
        }
        let single = PauliOperator::single(l, 0, Letter::X);
        assert!(matches!(logical_class(&c, &single), Err(Error::NotALogical { .. })));
    }

    #[test]
    fn shift_dependence_examples() {
        let c = toric(4);
        let plaquettes = all_set(&c, 0..16);
        assert!(check_row_shift_dependence(&c, &plaquettes, StripKind::Horizontal, 3, 3).unwrap().is_zero());
        let w = check_row_shift_dependence(&c, &plaquettes, StripKind::Horizontal, 1, 0).unwrap();
        assert_eq!(w.iter_ones().collect::<Vec<_>>(), (0..4).collect::<Vec<_>>());
        let w = check_row_shift_dependence(&c, &plaquettes, StripKind::Horizontal, 5, 1).unwrap();
        assert!(w.iter_ones().all(|i| i < 16));

        let n = 6;
        let ising = builtin(Family::Ising2d, n, None).unwrap();
        let row = all_set(&ising, n..2 * n);
        let w = check_row_shift_dependence(&ising, &row, StripKind::Vertical, 4, 1).unwrap();
        assert_eq!(w.iter_ones().collect::<Vec<_>>(), vec![n + 1, n + 2, n + 3]);
    }

    #[test]
    fn breakers_for_local_sets() {
        let n = 4;
        let ising = builtin(Family::Ising2d, n, None).unwrap();
        let face = all_set(&ising, 0..0)
            .combine(&IdentitySet::new(&ising, {
                let mut v = BitVector::zeros(ising.n_generators());
                for i in [0, n, n * n, n * n + 1] {
                    v.set(i, true);
                }
                v
            })
            .unwrap());
        let found = local_breakers(&ising, &face).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].weight(), 1);
        assert!(found[0].x_bits().is_zero());
    }

    #[test]
    fn toric_assembly() {
        for n in 4..=6 {
            let c = toric(n);
            let a = assemble_logicals(&c).unwrap();
            assert!(a.certificate.passed);
            assert_eq!(a.certificate.m, 2);
            assert_eq!(a.emitted.len(), 4);
            assert!(a.partners.is_empty());
            for r in &a.emitted {
                assert!(r.independence.is_nontrivial());
                let w = r.operator.support_window().unwrap();
                assert!(w.rows.len == 1 || w.cols.len == 1);
                assert!(r.operator.x_bits().is_zero() || r.operator.z_bits().is_zero());
            }
        }
    }

    #[test]
    fn ising_assemblies() {
        for n in 4..=7 {
            let ring = builtin(Family::Ising1d, n, None).unwrap();
            let a = assemble_logicals(&ring).unwrap();
            assert!(a.certificate.passed);
            assert_eq!(a.emitted.len(), 1);
            assert_eq!(a.partners.len(), 1);
            let l = ring.lattice();
            let column_x = PauliOperator::on_sites(l, (0..n).map(|r| l.site(r as isize, 0)), Letter::X);
            assert_eq!(a.partners[0].operator, column_x);

            let ising = builtin(Family::Ising2d, n, None).unwrap();
            let a = assemble_logicals(&ising).unwrap();
            assert!(a.certificate.passed);
            assert_eq!(a.emitted.len(), 1);
            assert_eq!(a.emitted[0].operator.weight(), 1);
            assert_eq!(a.emitted[0].orientation, Orientation::Point);
            assert!(a.partners.is_empty());
        }
    }

    #[test]
    fn translational_cases() {
        let v = classify_translational_3x3(&"XII/YII/ZII".parse().unwrap(), 6).unwrap();
        assert_eq!(v.case, TranslationalCase::Rejected);
        assert!(!v.r1_r3_commute);

        let v = classify_translational_3x3(&"XXX/III/XXX".parse().unwrap(), 6).unwrap();
        assert_eq!(v.case, TranslationalCase::Alternating);
        assert!(v.degeneracy_exponent.unwrap() >= 2);
        assert_eq!(v.rows_independent, Some(true));
        assert!(v.strings.iter().all(|s| s.commutes_all));

        let v = classify_translational_3x3(&"XXI/XXI/III".parse().unwrap(), 6).unwrap();
        assert_eq!(v.case, TranslationalCase::ColumnFallback);
        let ok: Vec<_> = v.strings.iter().filter(|s| s.commutes_all).collect();
        assert!(!ok.is_empty());
        assert!(ok.iter().all(|s| s.operator.weight() == 3));

        assert!(matches!(
            classify_translational_3x3(&"XZI/III/III".parse().unwrap(), 6),
            Err(Error::NonCommutingPattern)
        ));
    }
}
