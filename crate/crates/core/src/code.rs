//! Stabilizer Hamiltonians on a periodic lattice: the generator list, its
//! validation, the plain-text file format and the built-in families.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::gf2::{BitVector, Echelon};
use crate::pauli::{parse_letter_rows, split_phase, Lattice, Letter, PauliOperator, Phase};

/// Built-in code families. Carried on a code so that simulation can pick a
/// decoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Toric,
    Ising1d,
    Ising2d,
    Trans3x3,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Toric => "toric",
            Family::Ising1d => "ising1d",
            Family::Ising2d => "ising2d",
            Family::Trans3x3 => "trans3x3",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toric" => Ok(Family::Toric),
            "ising1d" => Ok(Family::Ising1d),
            "ising2d" => Ok(Family::Ising2d),
            "trans3x3" => Ok(Family::Trans3x3),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// A rectangular block of Pauli letters, e.g. `XXX/III/XXX`, with a sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub letters: Vec<Vec<Letter>>,
    pub phase: Phase,
}

impl Pattern {
    pub fn height(&self) -> usize {
        self.letters.len()
    }

    pub fn width(&self) -> usize {
        self.letters[0].len()
    }

    pub fn get(&self, r: usize, c: usize) -> Letter {
        self.letters[r][c]
    }

    /// The pattern placed with its top-left letter on `(row, col)`.
    pub fn place(&self, lattice: Lattice, row: isize, col: isize) -> PauliOperator {
        let mut p = PauliOperator::identity(lattice);
        for (i, line) in self.letters.iter().enumerate() {
            for (j, &l) in line.iter().enumerate() {
                if l != Letter::I {
                    let site = lattice.site(row + i as isize, col + j as isize);
                    // Overlapping wrap-around placements multiply letters.
                    p.apply(site, l);
                }
            }
        }
        p.with_phase(self.phase)
    }
}

impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, body) = split_phase(s.trim());
        Ok(Self {
            letters: parse_letter_rows(body)?,
            phase,
        })
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase != Phase::ONE {
            f.write_str(self.phase.prefix())?;
        }
        for (i, row) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            for l in row {
                write!(f, "{}", l.as_char())?;
            }
        }
        Ok(())
    }
}

/// Outcome of checking a generator list against the code invariants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub commutation_violations: Vec<(usize, usize)>,
    pub oversize_generators: Vec<usize>,
    pub identity_generators: Vec<usize>,
    pub non_hermitian: Vec<usize>,
    pub lattice_too_small: bool,
    pub frustrated: bool,
    pub specified: bool,
    pub k: usize,
    pub k_rows: usize,
    pub k_cols: usize,
    /// `None` when the generators do not form a valid group.
    pub degeneracy_exponent: Option<usize>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.commutation_violations.is_empty()
            && self.oversize_generators.is_empty()
            && self.identity_generators.is_empty()
            && self.non_hermitian.is_empty()
            && !self.lattice_too_small
    }
}

/// Stabilizer Hamiltonian `H = -(Δ/2) Σ K` on an `n·h × n·w` torus, where
/// `h × w` is the unit cell.
pub struct StabilizerCode {
    n: usize,
    cell: (usize, usize),
    lattice: Lattice,
    delta: f64,
    generators: Vec<PauliOperator>,
    family: Option<Family>,
    k_rows: usize,
    k_cols: usize,
    group: OnceLock<Echelon>,
    incidence: OnceLock<Vec<Vec<usize>>>,
}

impl Clone for StabilizerCode {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            cell: self.cell,
            lattice: self.lattice,
            delta: self.delta,
            generators: self.generators.clone(),
            family: self.family,
            k_rows: self.k_rows,
            k_cols: self.k_cols,
            group: self.group.clone(),
            incidence: self.incidence.clone(),
        }
    }
}

impl PartialEq for StabilizerCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.cell == other.cell
            && self.delta == other.delta
            && self.family == other.family
            && self.generators == other.generators
    }
}

impl fmt::Debug for StabilizerCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StabilizerCode")
            .field("n", &self.n)
            .field("cell", &self.cell)
            .field("lattice", &self.lattice)
            .field("delta", &self.delta)
            .field("family", &self.family)
            .field("generators", &self.generators.len())
            .finish()
    }
}

impl StabilizerCode {
    /// Builds a code and checks the algebraic invariants: every generator is
    /// a non-identity Hermitian Pauli and all pairs commute. Lattice-size
    /// requirements are checked separately by [`Self::require_local`].
    pub fn new(
        n: usize,
        cell: (usize, usize),
        delta: f64,
        generators: Vec<PauliOperator>,
        family: Option<Family>,
    ) -> Result<Self> {
        let code = Self::unchecked(n, cell, delta, generators, family)?;
        let report = code.algebraic_report();
        if let Some(&index) = report.identity_generators.first() {
            return Err(Error::IdentityGenerator { index });
        }
        if let Some(&index) = report.non_hermitian.first() {
            return Err(Error::NonHermitian { index });
        }
        if !report.commutation_violations.is_empty() {
            return Err(Error::CommutationViolation {
                pairs: report.commutation_violations,
            });
        }
        Ok(code)
    }

    /// Builds a code without checking any invariant beyond lattice shape.
    pub fn unchecked(
        n: usize,
        cell: (usize, usize),
        delta: f64,
        generators: Vec<PauliOperator>,
        family: Option<Family>,
    ) -> Result<Self> {
        if n == 0 || cell.0 == 0 || cell.1 == 0 {
            return Err(Error::InvalidArgument("lattice and cell sizes must be positive".into()));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidArgument(format!("DELTA must be positive, got {delta}")));
        }
        let lattice = Lattice::new(n * cell.0, n * cell.1);
        for g in &generators {
            if g.lattice() != lattice {
                return Err(Error::LatticeMismatch {
                    left: lattice.to_string(),
                    right: g.lattice().to_string(),
                });
            }
        }
        let (mut k_rows, mut k_cols) = (1, 1);
        for g in &generators {
            if let Ok(w) = g.support_window() {
                k_rows = k_rows.max(w.height());
                k_cols = k_cols.max(w.width());
            }
        }
        Ok(Self {
            n,
            cell,
            lattice,
            delta,
            generators,
            family,
            k_rows,
            k_cols,
            group: OnceLock::new(),
            incidence: OnceLock::new(),
        })
    }

    pub fn with_family(mut self, family: Option<Family>) -> Self {
        self.family = family;
        self
    }

    pub fn without_family(self) -> Self {
        self.with_family(None)
    }

    /// Lattice side in unit cells.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cell(&self) -> (usize, usize) {
        self.cell
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &PauliOperator {
        &self.generators[i]
    }

    /// Number of generators `R`.
    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.lattice.n_sites()
    }

    /// Largest generator window height.
    pub fn k_rows(&self) -> usize {
        self.k_rows
    }

    /// Largest generator window width.
    pub fn k_cols(&self) -> usize {
        self.k_cols
    }

    /// Largest window side over both directions.
    pub fn k(&self) -> usize {
        self.k_rows.max(self.k_cols)
    }

    /// Echelon form of the generator exponent vectors, tracking which
    /// generators combine into each basis row.
    pub fn group(&self) -> &Echelon {
        self.group.get_or_init(|| {
            let mut e = Echelon::new(2 * self.n_qubits(), self.n_generators());
            for (i, g) in self.generators.iter().enumerate() {
                e.insert_source(i, &g.exponents());
            }
            e
        })
    }

    /// For every site, the generators acting non-trivially on it.
    pub fn site_generators(&self) -> &[Vec<usize>] {
        self.incidence.get_or_init(|| {
            let mut inc = vec![Vec::new(); self.n_qubits()];
            for (i, g) in self.generators.iter().enumerate() {
                for s in g.support() {
                    inc[s].push(i);
                }
            }
            inc
        })
    }

    /// Product of the generators selected by `indicator`, phases included.
    pub fn product(&self, indicator: &BitVector) -> PauliOperator {
        let mut acc = PauliOperator::identity(self.lattice);
        for i in indicator.iter_ones() {
            acc.mul_assign(&self.generators[i]);
        }
        acc
    }

    /// Generators anticommuting with `p`.
    pub fn syndrome_of(&self, p: &PauliOperator) -> Vec<usize> {
        let mut candidates: Vec<usize> = p
            .support()
            .into_iter()
            .flat_map(|s| self.site_generators()[s].iter().copied())
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        candidates.retain(|&i| self.generators[i].anticommutes(p));
        candidates
    }

    fn algebraic_report(&self) -> ValidationReport {
        let mut report = ValidationReport {
            k: self.k(),
            k_rows: self.k_rows,
            k_cols: self.k_cols,
            ..ValidationReport::default()
        };
        for (i, g) in self.generators.iter().enumerate() {
            if g.is_pattern_identity() {
                report.identity_generators.push(i);
            }
            if !g.phase().is_real() {
                report.non_hermitian.push(i);
            }
        }
        // Only generators sharing a site can anticommute.
        for (i, g) in self.generators.iter().enumerate() {
            let mut others: Vec<usize> = g
                .support()
                .into_iter()
                .flat_map(|s| self.site_generators()[s].iter().copied())
                .filter(|&j| j > i)
                .collect();
            others.sort_unstable();
            others.dedup();
            for j in others {
                if g.anticommutes(&self.generators[j]) {
                    report.commutation_violations.push((i, j));
                }
            }
        }
        report
    }

    /// Full validation, never failing: lists every invariant violation and,
    /// when the generators form a valid group, the degeneracy data.
    pub fn validate(&self) -> ValidationReport {
        let mut report = self.algebraic_report();
        report.oversize_generators = self.oversize_generators();
        report.lattice_too_small = self.lattice_too_small();
        if report.commutation_violations.is_empty() && report.non_hermitian.is_empty() {
            match degeneracy_exponent(self) {
                Ok(m) => {
                    report.degeneracy_exponent = Some(m);
                    report.specified = is_specified(self);
                }
                Err(_) => report.frustrated = true,
            }
        }
        report
    }

    /// Generators whose support wraps an entire cycle of the torus.
    pub fn oversize_generators(&self) -> Vec<usize> {
        self.generators
            .iter()
            .enumerate()
            .filter(|(_, g)| match g.support_window() {
                Ok(w) => w.rows.is_full() || w.cols.is_full(),
                Err(_) => false,
            })
            .map(|(i, _)| i)
            .collect()
    }

    fn lattice_too_small(&self) -> bool {
        self.lattice.rows < 2 * self.k_rows || self.lattice.cols < 2 * self.k_cols
    }

    /// Checks the geometric requirements of the string construction: every
    /// generator has a local window and the torus is at least twice that
    /// window in each direction.
    pub fn require_local(&self) -> Result<()> {
        let oversize = self.oversize_generators();
        if !oversize.is_empty() {
            return Err(Error::OversizeGenerator { indices: oversize });
        }
        if self.lattice_too_small() {
            return Err(Error::LatticeTooSmall {
                rows: self.lattice.rows,
                cols: self.lattice.cols,
                k_rows: self.k_rows,
                k_cols: self.k_cols,
            });
        }
        Ok(())
    }

    /// Renders the code in the plain-text format accepted by [`parse`].
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "LATTICE {}", self.n).unwrap();
        if self.cell != (1, 1) {
            writeln!(out, "CELL {} {}", self.cell.0, self.cell.1).unwrap();
        }
        writeln!(out, "DELTA {}", self.delta).unwrap();
        if let Some(f) = self.family {
            writeln!(out, "FAMILY {f}").unwrap();
        }
        for g in &self.generators {
            let (anchor, pattern) = window_pattern(g);
            writeln!(out, "GEN {} {} {}", anchor.0, anchor.1, pattern).unwrap();
        }
        out
    }
}

/// Anchor and cropped letter block of a generator.
fn window_pattern(g: &PauliOperator) -> ((usize, usize), Pattern) {
    let lattice = g.lattice();
    let (rows, cols) = match g.support_window() {
        Ok(w) => (w.rows, w.cols),
        Err(_) => (
            crate::pauli::CyclicInterval::new(0, 1, lattice.rows),
            crate::pauli::CyclicInterval::new(0, 1, lattice.cols),
        ),
    };
    let letters = rows
        .iter()
        .map(|r| cols.iter().map(|c| g.letter(r * lattice.cols + c)).collect())
        .collect();
    (
        (rows.start, cols.start),
        Pattern {
            letters,
            phase: g.phase(),
        },
    )
}

/// Copies of `pattern` at every cell offset, row-major from the origin.
pub fn translates(pattern: &Pattern, n: usize, cell: (usize, usize)) -> Vec<PauliOperator> {
    let lattice = Lattice::new(n * cell.0, n * cell.1);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(pattern.place(lattice, (i * cell.0) as isize, (j * cell.1) as isize));
        }
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Parses a code without validating it (used by `validate` reporting).
pub fn parse_unchecked(text: &str) -> Result<StabilizerCode> {
    let mut n = None;
    let mut cell = (1, 1);
    let mut delta = 1.0;
    let mut family = None;
    let mut generators = Vec::new();
    let mut body_started = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<(usize, &str)> = tokenize(content);
        let Some(&(col0, keyword)) = tokens.first() else {
            continue;
        };
        let arg = |i: usize| -> Result<(usize, &str)> {
            tokens
                .get(i)
                .copied()
                .ok_or_else(|| syntax(line_no, content.len() + 1, format!("{keyword} expects more arguments")))
        };
        let number = |i: usize| -> Result<usize> {
            let (c, t) = arg(i)?;
            t.parse::<usize>()
                .map_err(|_| syntax(line_no, c, format!("expected a non-negative integer, found {t:?}")))
        };
        let expect_len = |len: usize| -> Result<()> {
            if tokens.len() > len {
                Err(syntax(line_no, tokens[len].0, "unexpected trailing token"))
            } else {
                Ok(())
            }
        };
        let pattern = |i: usize| -> Result<Pattern> {
            let (c, t) = arg(i)?;
            t.parse::<Pattern>().map_err(|e| match e {
                Error::Syntax { column, message, .. } => syntax(line_no, c + column - 1, message),
                other => other,
            })
        };
        match keyword {
            "LATTICE" => {
                if n.is_some() {
                    return Err(syntax(line_no, col0, "duplicate LATTICE"));
                }
                let v = number(1)?;
                if v == 0 {
                    return Err(syntax(line_no, arg(1)?.0, "lattice size must be positive"));
                }
                expect_len(2)?;
                n = Some(v);
            }
            "CELL" | "DELTA" | "FAMILY" if body_started => {
                return Err(syntax(line_no, col0, format!("{keyword} must precede GEN and TRANSLATE")));
            }
            "CELL" => {
                let (h, w) = (number(1)?, number(2)?);
                if h == 0 || w == 0 {
                    return Err(syntax(line_no, arg(1)?.0, "cell sizes must be positive"));
                }
                expect_len(3)?;
                cell = (h, w);
            }
            "DELTA" => {
                let (c, t) = arg(1)?;
                delta = t
                    .parse::<f64>()
                    .ok()
                    .filter(|d| d.is_finite() && *d > 0.0)
                    .ok_or_else(|| syntax(line_no, c, format!("DELTA must be a positive number, found {t:?}")))?;
                expect_len(2)?;
            }
            "FAMILY" => {
                let (c, t) = arg(1)?;
                family = Some(t.parse::<Family>().map_err(|_| syntax(line_no, c, format!("unknown family {t:?}")))?);
                expect_len(2)?;
            }
            "GEN" => {
                let size = n.ok_or_else(|| syntax(line_no, col0, "GEN before LATTICE"))?;
                body_started = true;
                let (r, c) = (number(1)?, number(2)?);
                let p = pattern(3)?;
                expect_len(4)?;
                let lattice = Lattice::new(size * cell.0, size * cell.1);
                generators.push(p.place(lattice, r as isize, c as isize));
            }
            "TRANSLATE" => {
                let size = n.ok_or_else(|| syntax(line_no, col0, "TRANSLATE before LATTICE"))?;
                body_started = true;
                let p = pattern(1)?;
                expect_len(2)?;
                generators.extend(translates(&p, size, cell));
            }
            other => return Err(syntax(line_no, col0, format!("unknown directive {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| syntax(1, 1, "missing LATTICE directive"))?;
    StabilizerCode::unchecked(n, cell, delta, generators, family)
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Parses and fully validates a code.
pub fn parse(text: &str) -> Result<StabilizerCode> {
    let raw = parse_unchecked(text)?;
    let code = StabilizerCode::new(raw.n, raw.cell, raw.delta, raw.generators, raw.family)?;
    code.require_local()?;
    Ok(code)
}

/// Built-in code family instances.
///
/// The toric code uses a two-row unit cell: row `2r` holds the horizontal
/// edge leaving vertex `(r, c)` to the right and row `2r+1` the vertical
/// edge leaving it downwards. The one-dimensional Ising ring runs down
/// column 0 of an `n × n` lattice; every other site carries a single-site
/// `Z` so the code stays specified. Sizes below the geometric minimum are
/// accepted for small-instance analysis; [`StabilizerCode::require_local`]
/// rejects them where the string construction needs room.
pub fn builtin(family: Family, n: usize, pattern: Option<&Pattern>) -> Result<StabilizerCode> {
    let too_small = |min: usize| Error::InvalidArgument(format!("{family} needs n >= {min}, got {n}"));
    match family {
        Family::Toric => {
            if n < 2 {
                return Err(too_small(2));
            }
            let cell = (2, 1);
            let mut gens = translates(&"XI/XX/XI".parse()?, n, cell);
            gens.extend(translates(&"II/IZ/ZZ/IZ".parse()?, n, cell));
            StabilizerCode::new(n, cell, 1.0, gens, Some(family))
        }
        Family::Ising1d => {
            if n < 3 {
                return Err(too_small(3));
            }
            let lattice = Lattice::square(n);
            let bond: Pattern = "Z/Z".parse()?;
            let mut gens: Vec<PauliOperator> = (0..n).map(|i| bond.place(lattice, i as isize, 0)).collect();
            for r in 0..n {
                for c in 1..n {
                    gens.push(PauliOperator::single(lattice, lattice.site(r as isize, c as isize), Letter::Z));
                }
            }
            StabilizerCode::new(n, (1, 1), 1.0, gens, Some(family))
        }
        Family::Ising2d => {
            if n < 3 {
                return Err(too_small(3));
            }
            let mut gens = translates(&"ZZ".parse()?, n, (1, 1));
            gens.extend(translates(&"Z/Z".parse()?, n, (1, 1)));
            StabilizerCode::new(n, (1, 1), 1.0, gens, Some(family))
        }
        Family::Trans3x3 => {
            let pattern = pattern.ok_or_else(|| Error::InvalidArgument("trans3x3 needs a 3x3 pattern".into()))?;
            if pattern.height() != 3 || pattern.width() != 3 {
                return Err(Error::InvalidArgument(format!("trans3x3 pattern must be 3x3, got {pattern}")));
            }
            if n < 6 {
                return Err(too_small(6));
            }
            StabilizerCode::new(n, (1, 1), 1.0, translates(pattern, n, (1, 1)), Some(family))
        }
    }
}

/// Exponent `M` of the ground-state degeneracy `2^M`.
///
/// Computed as `N_q - rank` and cross-checked against `N_q - R + |G'|`,
/// where `|G'|` is the dimension of the space of generator subsets with
/// trivial product. Fails if some such product equals `-𝟙`.
pub fn degeneracy_exponent(c: &StabilizerCode) -> Result<usize> {
    let group = c.group();
    for v in group.kernel() {
        if c.product(v).phase() != Phase::ONE {
            return Err(Error::Frustrated { indicator: v.to_hex() });
        }
    }
    let m = c.n_qubits() - group.rank();
    let g_prime = group.kernel().len();
    let counted = c.n_qubits() + g_prime - c.n_generators();
    assert_eq!(m, counted, "rank-nullity mismatch");
    Ok(m)
}

/// Whether every degeneracy is accounted for by identity sets, i.e. the
/// generators alone fix all `N_q` qubits up to products equal to `𝟙`
/// (`R ≥ N_q`, equivalently `M ≤ |G'|`).
pub fn is_specified(c: &StabilizerCode) -> bool {
    c.n_generators() >= c.n_qubits()
}
