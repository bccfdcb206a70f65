//! Dense brute-force oracles and the small-code corpus shared by the
//! integration tests.
#![allow(dead_code)]

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabstrings::code::{builtin, parse_unchecked, Family, Pattern, StabilizerCode};
use stabstrings::pauli::{Letter, PauliOperator, Phase};

/// Prime with `p ≡ 1 (mod 4)`, so Gaussian integers embed via a square root of -1.
pub const P: u64 = 998_244_353;

fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

fn pow(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a);
        }
        a = mul(a, a);
        e >>= 1;
    }
    r
}

/// `i` in `Z/P`: 3 generates the multiplicative group.
pub fn imag() -> u64 {
    pow(3, (P - 1) / 4)
}

/// `i^k` for `k` mod 4.
fn i_pow(k: u32) -> u64 {
    match k % 4 {
        0 => 1,
        1 => imag(),
        2 => P - 1,
        _ => P - imag(),
    }
}

/// A Pauli as a monomial matrix: column `c` maps to row `c ^ x` with
/// coefficient `i^(k + #Y) (-1)^|c & z|`, built from the letters alone.
#[derive(Clone, Copy, Debug)]
pub struct Monomial {
    x: usize,
    z: usize,
    base: u64,
}

impl Monomial {
    pub fn of(p: &PauliOperator) -> Self {
        let (mut x, mut z, mut ys) = (0usize, 0usize, 0u32);
        for s in 0..p.lattice().n_sites() {
            match p.letter(s) {
                Letter::I => {}
                Letter::X => x |= 1 << s,
                Letter::Z => z |= 1 << s,
                Letter::Y => {
                    x |= 1 << s;
                    z |= 1 << s;
                    ys += 1;
                }
            }
        }
        Monomial {
            x,
            z,
            base: i_pow(u32::from(p.phase().power()) + ys),
        }
    }

    fn coef(&self, c: usize) -> u64 {
        if (c & self.z).count_ones() % 2 == 1 {
            (P - self.base) % P
        } else {
            self.base
        }
    }
}

/// `∏ (𝟙 + K)` over all generators as a dense matrix mod `P`.
pub struct DenseProjector {
    pub dim: usize,
    pub n_generators: usize,
    pub m: Vec<u64>,
}

impl DenseProjector {
    pub fn new(c: &StabilizerCode) -> Self {
        let n = c.n_qubits();
        assert!(n <= 12, "dense oracle is limited to small codes");
        let dim = 1usize << n;
        let mut m = vec![0u64; dim * dim];
        for d in 0..dim {
            m[d * dim + d] = 1;
        }
        let mut next = vec![0u64; dim * dim];
        for g in c.generators() {
            let k = Monomial::of(g);
            // (M K)[r][c] = M[r][c ^ x] · coef(c)
            for r in 0..dim {
                let row = &m[r * dim..(r + 1) * dim];
                let out = &mut next[r * dim..(r + 1) * dim];
                for col in 0..dim {
                    out[col] = (row[col] + mul(row[col ^ k.x], k.coef(col))) % P;
                }
            }
            std::mem::swap(&mut m, &mut next);
        }
        DenseProjector {
            dim,
            n_generators: c.n_generators(),
            m,
        }
    }

    pub fn trace(&self) -> u64 {
        (0..self.dim).fold(0, |a, d| (a + self.m[d * self.dim + d]) % P)
    }

    /// `tr(Π) = tr(∏(𝟙+K)) / 2^R`.
    pub fn projector_trace(&self) -> u64 {
        mul(self.trace(), pow(pow(2, self.n_generators as u64), P - 2))
    }

    /// Checks `M² = 2^R M` on a few random vectors, i.e. that `M / 2^R` is a
    /// projector, so its trace is its rank.
    pub fn is_scaled_projector(&self, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = pow(2, self.n_generators as u64);
        (0..3).all(|_| {
            let v: Vec<u64> = (0..self.dim).map(|_| rng.random_range(0..P)).collect();
            let mv = self.apply(&v);
            let mmv = self.apply(&mv);
            mmv.iter().zip(&mv).all(|(&a, &b)| a == mul(scale, b))
        })
    }

    fn apply(&self, v: &[u64]) -> Vec<u64> {
        (0..self.dim)
            .map(|r| {
                self.m[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .fold(0, |a, (&x, &y)| (a + mul(x, y)) % P)
            })
            .collect()
    }

    /// Degeneracy exponent, or `None` when the projector vanishes.
    pub fn degeneracy_exponent(&self) -> Option<u32> {
        let t = self.projector_trace();
        if t == 0 {
            return None;
        }
        assert!(t.is_power_of_two() && t <= self.dim as u64, "trace {t} is not a dimension");
        Some(t.trailing_zeros())
    }

    /// `tr(p Π) / tr(Π)` as `1`, `-1` or `0`.
    pub fn expectation(&self, p: &PauliOperator) -> i8 {
        let k = Monomial::of(p);
        // ⟨b| p M |b⟩ = coef(b ^ x) · M[b ^ x][b]
        let mut t = 0;
        for b in 0..self.dim {
            let c = b ^ k.x;
            t = (t + mul(k.coef(c), self.m[c * self.dim + b])) % P;
        }
        let total = self.trace();
        assert_ne!(total, 0, "expectation on a frustrated code");
        let ratio = mul(t, pow(total, P - 2));
        match ratio {
            0 => 0,
            1 => 1,
            r if r == P - 1 => -1,
            r => panic!("expectation {r} is not 0 or ±1"),
        }
    }
}

fn fixture_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

/// Hand-written fixture files, checked algebraically but not for locality.
pub fn fixture_codes() -> Vec<(String, StabilizerCode)> {
    let mut entries: Vec<_> = std::fs::read_dir(fixture_dir())
        .expect("fixture directory")
        .map(|e| e.expect("fixture entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "code"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|path| {
            let text = std::fs::read_to_string(&path).expect("readable fixture");
            let c = parse_unchecked(&text).expect("fixture parses");
            let c = StabilizerCode::new(c.n(), c.cell(), c.delta(), c.generators().to_vec(), c.family()).expect("fixture commutes");
            (path.file_stem().unwrap().to_string_lossy().into_owned(), c)
        })
        .collect()
}

fn random_letter(rng: &mut ChaCha8Rng) -> Letter {
    match rng.random_range(0..10) {
        0..=3 => Letter::I,
        4..=5 => Letter::X,
        6..=7 => Letter::Z,
        _ => Letter::Y,
    }
}

pub fn random_pauli(rng: &mut ChaCha8Rng, lattice: stabstrings::pauli::Lattice) -> PauliOperator {
    let mut p = PauliOperator::identity(lattice);
    for s in 0..lattice.n_sites() {
        p.set_letter(s, random_letter(rng));
    }
    let sign = if rng.random_bool(0.5) { Phase::ONE } else { Phase::MINUS_ONE };
    p.with_phase(sign)
}

/// A random commuting set on a small torus, sometimes with a product of two
/// generators (possibly sign-flipped) appended so identity sets and
/// frustration both occur.
pub fn random_code(rng: &mut ChaCha8Rng) -> StabilizerCode {
    const SHAPES: [(usize, usize); 6] = [(2, 2), (2, 3), (3, 3), (2, 4), (2, 5), (3, 2)];
    let (h, w) = SHAPES[rng.random_range(0..SHAPES.len())];
    let lattice = stabstrings::pauli::Lattice::new(h, w);
    let target = rng.random_range(1..=h * w);
    let mut gens: Vec<PauliOperator> = Vec::new();
    for _ in 0..400 {
        if gens.len() >= target {
            break;
        }
        let p = random_pauli(rng, lattice);
        if p.is_pattern_identity() || gens.iter().any(|g| g.anticommutes(&p)) {
            continue;
        }
        gens.push(p);
    }
    if gens.len() >= 2 && rng.random_bool(0.6) {
        let a = rng.random_range(0..gens.len());
        let b = (a + 1 + rng.random_range(0..gens.len() - 1)) % gens.len();
        let prod = gens[a].multiply(&gens[b]).unwrap();
        let sign = if rng.random_bool(0.5) { Phase::ONE } else { Phase::MINUS_ONE };
        let phase = prod.phase().mul(sign);
        let prod = prod.with_phase(phase);
        if !prod.is_pattern_identity() && prod.phase().is_real() {
            gens.push(prod);
        }
    }
    StabilizerCode::new(1, (h, w), 1.0, gens, None).expect("sampled generators commute")
}

/// Fixtures, small built-ins and seeded random codes, all at most 10 qubits.
pub fn corpus() -> Vec<(String, StabilizerCode)> {
    let mut out = fixture_codes();
    out.push(("toric:2".into(), builtin(Family::Toric, 2, None).unwrap()));
    out.push(("ising1d:3".into(), builtin(Family::Ising1d, 3, None).unwrap()));
    out.push(("ising2d:3".into(), builtin(Family::Ising2d, 3, None).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..30 {
        out.push((format!("random-{i}"), random_code(&mut rng)));
    }
    assert!(out.iter().all(|(_, c)| c.n_qubits() <= 10));
    out
}

/// Operators commuting with every generator: signed generator products and
/// random commuting Paulis.
pub fn probe_operators(c: &StabilizerCode, seed: u64) -> Vec<PauliOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..4 {
        let mut p = PauliOperator::identity(c.lattice());
        for g in c.generators() {
            if rng.random_bool(0.5) {
                p.mul_assign(g);
            }
        }
        if rng.random_bool(0.5) {
            let phase = p.phase().mul(Phase::MINUS_ONE);
            p = p.with_phase(phase);
        }
        if p.phase().is_real() {
            out.push(p);
        }
    }
    let mut found = 0;
    for _ in 0..2000 {
        if found == 6 {
            break;
        }
        let p = random_pauli(&mut rng, c.lattice());
        if c.syndrome_of(&p).is_empty() {
            out.push(p);
            found += 1;
        }
    }
    out
}

/// Random 3x3 patterns that commute with their translates on an `n × n`
/// torus, by seeded rejection sampling.
pub fn random_trans3x3(count: usize, n: usize, seed: u64) -> Vec<Pattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 2_000_000, "rejection sampling stalled");
        let letters: Vec<Vec<Letter>> = (0..3)
            .map(|_| {
                (0..3)
                    .map(|_| if rng.random_bool(0.55) { Letter::I } else { Letter::NON_IDENTITY[rng.random_range(0..3)] })
                    .collect()
            })
            .collect();
        let pattern = Pattern {
            letters,
            phase: Phase::ONE,
        };
        if out.contains(&pattern) {
            continue;
        }
        if let Ok(c) = builtin(Family::Trans3x3, n, Some(&pattern)) {
            if stabstrings::code::degeneracy_exponent(&c).is_ok() {
                out.push(pattern);
            }
        }
    }
    out
}
