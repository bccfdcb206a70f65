//! Metropolis single-site Pauli dynamics and logical failure times.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::code::{Family, StabilizerCode};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::pauli::{Letter, PauliOperator, Phase};
use crate::strings::logical_class;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalConfig {
    /// Inverse temperature in units of `1/Δ`.
    pub beta: f64,
    /// Sweep cap.
    pub t_max: u64,
    pub seed: u64,
    /// Sweeps between decoder checks.
    pub checkpoint_every: u64,
    pub trials: usize,
    pub engine: Engine,
}

/// How the Metropolis chain is sampled. Both produce the same process in
/// distribution; `RejectionFree` skips runs of rejected proposals with a
/// geometric waiting time and is much faster at low temperature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    Sweep,
    #[default]
    RejectionFree,
}

impl ThermalConfig {
    pub fn new(beta: f64, t_max: u64, seed: u64, checkpoint_every: u64, trials: usize) -> Result<Self> {
        let cfg = ThermalConfig {
            beta,
            t_max,
            seed,
            checkpoint_every,
            trials,
            engine: Engine::default(),
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn with_engine(self, engine: Engine) -> Self {
        ThermalConfig { engine, ..self }
    }

    pub fn check(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::InvalidArgument(format!("beta must be non-negative, got {}", self.beta)));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidArgument("checkpoint interval must be at least one sweep".into()));
        }
        Ok(())
    }
}

/// Generators flipped by each single-site Pauli, and Metropolis acceptance
/// probabilities indexed by the energy change in units of `Δ`.
#[derive(Clone, Debug)]
pub struct Dynamics {
    n_sites: usize,
    /// `flips[3 * site + l]` for `l` indexing `X, Y, Z`.
    flips: Vec<Vec<u32>>,
    /// Moves whose flip list contains each generator.
    touching: Vec<Vec<u32>>,
    /// Moves that commute with every generator.
    null_moves: Vec<u32>,
    max_flips: usize,
    accept: Vec<f64>,
    beta: f64,
}

const LETTERS: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

impl Dynamics {
    pub fn new(c: &StabilizerCode, beta: f64) -> Self {
        let n_sites = c.n_qubits();
        let mut flips = Vec::with_capacity(3 * n_sites);
        for site in 0..n_sites {
            for letter in LETTERS {
                let p = PauliOperator::single(c.lattice(), site, letter);
                let touched = c.site_generators()[site]
                    .iter()
                    .copied()
                    .filter(|&g| c.generator(g).anticommutes(&p))
                    .map(|g| g as u32)
                    .collect();
                flips.push(touched);
            }
        }
        let max_flips = flips.iter().map(Vec::len).max().unwrap_or(0);
        let accept = (0..=max_flips).map(|de| (-beta * de as f64).exp()).collect();
        let mut touching = vec![Vec::new(); c.n_generators()];
        let mut null_moves = Vec::new();
        for (m, f) in flips.iter().enumerate() {
            if f.is_empty() {
                null_moves.push(m as u32);
            }
            for &g in f {
                touching[g as usize].push(m as u32);
            }
        }
        Dynamics {
            n_sites,
            flips,
            touching,
            null_moves,
            max_flips,
            accept,
            beta,
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Generators anticommuting with `letter` at `site`.
    pub fn affected(&self, site: usize, letter: Letter) -> &[u32] {
        &self.flips[3 * site + letter_index(letter)]
    }

    /// Metropolis acceptance probability for an energy change of `de · Δ`.
    pub fn acceptance(&self, de: i64) -> f64 {
        if de <= 0 {
            1.0
        } else {
            self.accept
                .get(de as usize)
                .copied()
                .unwrap_or_else(|| (-self.beta * de as f64).exp())
        }
    }
}

fn letter_index(l: Letter) -> usize {
    match l {
        Letter::X => 0,
        Letter::Y => 1,
        Letter::Z => 2,
        Letter::I => panic!("identity is not a proposal"),
    }
}

/// Accumulated error and its syndrome, with the energy recorded at each
/// checkpoint.
#[derive(Clone, Debug)]
pub struct SimTrajectory {
    /// Per site: bit 0 is the x exponent, bit 1 the z exponent.
    error: Vec<u8>,
    violated: Vec<bool>,
    violated_count: usize,
    delta: f64,
    pub sweeps: u64,
    /// `(sweep, Δ·|syndrome|)` at every checkpoint.
    pub energy_trace: Vec<(u64, f64)>,
    pub failure_time: Option<u64>,
}

impl SimTrajectory {
    pub fn new(c: &StabilizerCode) -> Self {
        SimTrajectory {
            error: vec![0; c.n_qubits()],
            violated: vec![false; c.n_generators()],
            violated_count: 0,
            delta: c.delta(),
            sweeps: 0,
            energy_trace: Vec::new(),
            failure_time: None,
        }
    }

    pub fn accumulated_error(&self, c: &StabilizerCode) -> PauliOperator {
        let mut x = BitVector::zeros(self.error.len());
        let mut z = BitVector::zeros(self.error.len());
        for (s, &e) in self.error.iter().enumerate() {
            x.set(s, e & 1 != 0);
            z.set(s, e & 2 != 0);
        }
        PauliOperator::from_parts(c.lattice(), x, z, Phase::ONE).expect("sizes match the lattice")
    }

    pub fn violated(&self) -> impl Iterator<Item = usize> + '_ {
        self.violated.iter().enumerate().filter(|(_, &v)| v).map(|(i, _)| i)
    }

    pub fn violated_count(&self) -> usize {
        self.violated_count
    }

    pub fn energy(&self) -> f64 {
        self.violated_count as f64 * self.delta
    }

    /// Energy change, in units of `Δ`, of flipping `letter` at `site`.
    pub fn delta_energy(&self, dynamics: &Dynamics, site: usize, letter: Letter) -> i64 {
        dynamics
            .affected(site, letter)
            .iter()
            .map(|&g| if self.violated[g as usize] { -1 } else { 1 })
            .sum()
    }

    /// Applies `letter` at `site` unconditionally.
    pub fn flip(&mut self, dynamics: &Dynamics, site: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.error[site] ^= u8::from(x) | (u8::from(z) << 1);
        for &g in dynamics.affected(site, letter) {
            let v = &mut self.violated[g as usize];
            *v = !*v;
            if *v {
                self.violated_count += 1;
            } else {
                self.violated_count -= 1;
            }
        }
    }

    /// One Metropolis proposal with the uniform variate `u` used only when
    /// the move raises the energy. Returns whether it was accepted.
    pub fn propose(&mut self, dynamics: &Dynamics, site: usize, letter: Letter, u: impl FnOnce() -> f64) -> bool {
        let de = self.delta_energy(dynamics, site, letter);
        let ok = de <= 0 || u() < dynamics.acceptance(de);
        if ok {
            self.flip(dynamics, site, letter);
        }
        ok
    }

    /// One sweep: `N_qubits` proposals of a uniform site and a uniform
    /// non-identity Pauli.
    pub fn sweep(&mut self, dynamics: &Dynamics, rng: &mut ChaCha8Rng) {
        for _ in 0..dynamics.n_sites {
            let site = rng.random_range(0..dynamics.n_sites);
            let letter = LETTERS[rng.random_range(0..3)];
            self.propose(dynamics, site, letter, || rng.random::<f64>());
        }
        self.sweeps += 1;
    }

    /// Syndrome count recomputed from scratch.
    pub fn recomputed_violations(&self, c: &StabilizerCode) -> usize {
        c.syndrome_of(&self.accumulated_error(c)).len()
    }

    pub fn n_generators(&self) -> usize {
        self.violated.len()
    }
}

/// Shortest paths between generators of one type, where each site is an
/// edge joining the two generators a single-site flip violates.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    node_of: Vec<Option<u32>>,
    n_nodes: usize,
    dist: Vec<u32>,
    /// `via[u * n + v]`: site on the last edge of a shortest path from `u` to `v`.
    via: Vec<u32>,
    ends: Vec<(u32, u32)>,
    letter: Letter,
}

impl MatchingGraph {
    fn new(c: &StabilizerCode, dynamics: &Dynamics, letter: Letter) -> Result<Self> {
        let mut node_of = vec![None; c.n_generators()];
        let mut n_nodes = 0;
        let mut ends = Vec::with_capacity(c.n_qubits());
        for site in 0..c.n_qubits() {
            let hit = dynamics.affected(site, letter);
            let &[a, b] = hit else {
                return Err(Error::Unsupported(format!(
                    "site {site} flip violates {} generators, matching needs exactly two",
                    hit.len()
                )));
            };
            for g in [a, b] {
                if node_of[g as usize].is_none() {
                    node_of[g as usize] = Some(n_nodes as u32);
                    n_nodes += 1;
                }
            }
            ends.push((node_of[a as usize].unwrap(), node_of[b as usize].unwrap()));
        }
        let mut adj = vec![Vec::new(); n_nodes];
        for (site, &(a, b)) in ends.iter().enumerate() {
            adj[a as usize].push((b, site as u32));
            adj[b as usize].push((a, site as u32));
        }
        let mut dist = vec![u32::MAX; n_nodes * n_nodes];
        let mut via = vec![u32::MAX; n_nodes * n_nodes];
        let mut queue = VecDeque::new();
        for s in 0..n_nodes {
            let row = s * n_nodes;
            dist[row + s] = 0;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                for &(v, site) in &adj[u] {
                    let v = v as usize;
                    if dist[row + v] == u32::MAX {
                        dist[row + v] = dist[row + u] + 1;
                        via[row + v] = site;
                        queue.push_back(v);
                    }
                }
            }
        }
        Ok(MatchingGraph {
            node_of,
            n_nodes,
            dist,
            via,
            ends,
            letter,
        })
    }

    /// Greedily pairs the closest defects and flips the connecting paths.
    fn correct(&self, violated: impl Iterator<Item = usize>, correction: &mut [u8]) {
        let mut defects: Vec<usize> = violated.filter_map(|g| self.node_of[g]).map(|n| n as usize).collect();
        let (x, z) = self.letter.bits();
        let bits = u8::from(x) | (u8::from(z) << 1);
        while defects.len() >= 2 {
            let mut best = (u32::MAX, 0, 0);
            for i in 0..defects.len() {
                for j in i + 1..defects.len() {
                    let d = self.dist[defects[i] * self.n_nodes + defects[j]];
                    if d < best.0 {
                        best = (d, i, j);
                    }
                }
            }
            let (_, i, j) = best;
            let (u, mut v) = (defects[i], defects[j]);
            while v != u {
                let site = self.via[u * self.n_nodes + v] as usize;
                correction[site] ^= bits;
                let (a, b) = self.ends[site];
                v = if a as usize == v { b as usize } else { a as usize };
            }
            defects.swap_remove(j);
            defects.swap_remove(i);
        }
    }
}

/// Ideal decoder for one of the simulated families.
#[derive(Clone, Debug)]
pub enum Decoder {
    /// Majority vote over the x exponents of `region`; errors elsewhere are
    /// pinned by single-site fields and corrected individually.
    IsingMajority { region: Vec<usize> },
    /// Greedy nearest-pair matching of defects for X errors and Z errors
    /// separately.
    ToricMatching { graphs: Box<[MatchingGraph; 2]> },
}

impl Decoder {
    pub fn for_code(c: &StabilizerCode, dynamics: &Dynamics) -> Result<Self> {
        match c.family() {
            Some(Family::Ising2d) => Ok(Decoder::IsingMajority {
                region: (0..c.n_qubits()).collect(),
            }),
            Some(Family::Ising1d) => {
                let l = c.lattice();
                Ok(Decoder::IsingMajority {
                    region: (0..l.rows).map(|r| r * l.cols).collect(),
                })
            }
            Some(Family::Toric) => Ok(Decoder::ToricMatching {
                graphs: Box::new([
                    MatchingGraph::new(c, dynamics, Letter::X)?,
                    MatchingGraph::new(c, dynamics, Letter::Z)?,
                ]),
            }),
            other => Err(Error::Unsupported(match other {
                Some(f) => format!("family {f}"),
                None => "codes without a family tag are analysis-only".into(),
            })),
        }
    }

    /// The accumulated error after applying the decoder's correction. For
    /// the Ising families only the classical x part is kept.
    pub fn corrected(&self, c: &StabilizerCode, traj: &SimTrajectory) -> PauliOperator {
        let n = c.n_qubits();
        let mut out = vec![0u8; n];
        match self {
            Decoder::IsingMajority { region } => {
                let flipped = region.iter().filter(|&&s| traj.error[s] & 1 != 0).count();
                if 2 * flipped > region.len() {
                    for &s in region {
                        out[s] = 1;
                    }
                }
            }
            Decoder::ToricMatching { graphs } => {
                out.copy_from_slice(&traj.error);
                for g in graphs.iter() {
                    g.correct(traj.violated(), &mut out);
                }
            }
        }
        let mut x = BitVector::zeros(n);
        let mut z = BitVector::zeros(n);
        for (s, &e) in out.iter().enumerate() {
            x.set(s, e & 1 != 0);
            z.set(s, e & 2 != 0);
        }
        PauliOperator::from_parts(c.lattice(), x, z, Phase::ONE).expect("sizes match the lattice")
    }

    /// Whether the decoder looks at z exponents of the error.
    pub fn reads_z(&self) -> bool {
        matches!(self, Decoder::ToricMatching { .. })
    }

    /// Whether the corrected error acts non-trivially on the ground space.
    pub fn failed(&self, c: &StabilizerCode, traj: &SimTrajectory) -> Result<bool> {
        if let Decoder::IsingMajority { region } = self {
            let flipped = region.iter().filter(|&&s| traj.error[s] & 1 != 0).count();
            if 2 * flipped <= region.len() {
                return Ok(false);
            }
        }
        let corrected = self.corrected(c, traj);
        if corrected.is_pattern_identity() {
            return Ok(false);
        }
        Ok(logical_class(c, &corrected)?.is_nontrivial())
    }
}

/// Per-move energy changes bucketed by value, for sampling the next
/// accepted proposal directly.
struct EventQueue<'a> {
    dynamics: &'a Dynamics,
    de: Vec<i32>,
    buckets: Vec<Vec<u32>>,
    pos: Vec<u32>,
    /// Proposal slots not yet resolved into null moves, pooled by the
    /// probability that such a slot was a null move.
    pending_slots: BTreeMap<u64, u64>,
}

impl<'a> EventQueue<'a> {
    fn new(dynamics: &'a Dynamics, traj: &SimTrajectory) -> Self {
        let n_moves = dynamics.flips.len();
        let mut q = EventQueue {
            dynamics,
            de: vec![0; n_moves],
            buckets: vec![Vec::new(); 2 * dynamics.max_flips + 1],
            pos: vec![0; n_moves],
            pending_slots: BTreeMap::new(),
        };
        for (m, f) in dynamics.flips.iter().enumerate() {
            if f.is_empty() {
                continue;
            }
            let de: i32 = f.iter().map(|&g| if traj.violated[g as usize] { -1 } else { 1 }).sum();
            q.de[m] = de;
            let b = q.bucket(de);
            q.pos[m] = q.buckets[b].len() as u32;
            q.buckets[b].push(m as u32);
        }
        q
    }

    fn bucket(&self, de: i32) -> usize {
        (de + self.dynamics.max_flips as i32) as usize
    }

    fn weight_of(&self, b: usize) -> f64 {
        self.dynamics.acceptance(b as i64 - self.dynamics.max_flips as i64)
    }

    /// Total acceptance weight of the non-null moves.
    fn weight(&self) -> f64 {
        self.buckets
            .iter()
            .enumerate()
            .map(|(b, v)| v.len() as f64 * self.weight_of(b))
            .sum()
    }

    fn shift(&mut self, m: u32, by: i32) {
        let m = m as usize;
        let from = self.bucket(self.de[m]);
        let i = self.pos[m] as usize;
        self.buckets[from].swap_remove(i);
        if let Some(&moved) = self.buckets[from].get(i) {
            self.pos[moved as usize] = i as u32;
        }
        self.de[m] += by;
        let to = self.bucket(self.de[m]);
        self.pos[m] = self.buckets[to].len() as u32;
        self.buckets[to].push(m as u32);
    }

    fn pick(&self, rng: &mut ChaCha8Rng, total: f64) -> u32 {
        let mut u = rng.random::<f64>() * total;
        let mut last = None;
        for (b, v) in self.buckets.iter().enumerate() {
            let w = v.len() as f64 * self.weight_of(b);
            if w <= 0.0 {
                continue;
            }
            if u < w {
                return v[rng.random_range(0..v.len())];
            }
            u -= w;
            last = Some(b);
        }
        let v = &self.buckets[last.expect("positive total weight")];
        v[rng.random_range(0..v.len())]
    }

    fn apply(&mut self, traj: &mut SimTrajectory, m: u32) {
        let d = self.dynamics;
        let (site, letter) = (m as usize / 3, LETTERS[m as usize % 3]);
        let (x, z) = letter.bits();
        traj.error[site] ^= u8::from(x) | (u8::from(z) << 1);
        for &g in &d.flips[m as usize] {
            let v = &mut traj.violated[g as usize];
            *v = !*v;
            let by = if *v {
                traj.violated_count += 1;
                -2
            } else {
                traj.violated_count -= 1;
                2
            };
            for &other in &d.touching[g as usize] {
                self.shift(other, by);
            }
        }
    }

    /// Records `slots` non-accepting proposals, each a null move with
    /// probability `ratio`.
    fn add_nulls(&mut self, slots: u64, ratio: f64) {
        if slots == 0 || ratio <= 0.0 || self.dynamics.null_moves.is_empty() {
            return;
        }
        *self.pending_slots.entry(ratio.min(1.0).to_bits()).or_default() += slots;
    }

    /// Draws the pending null proposals and spreads them uniformly over the
    /// null moves.
    fn settle(&mut self, traj: &mut SimTrajectory, rng: &mut ChaCha8Rng) {
        let mut left = 0;
        for (ratio, slots) in std::mem::take(&mut self.pending_slots) {
            left += Binomial::new(slots, f64::from_bits(ratio)).expect("valid binomial").sample(rng);
        }
        let nulls = &self.dynamics.null_moves;
        for (i, &m) in nulls.iter().enumerate() {
            if left == 0 {
                break;
            }
            let k = if i + 1 == nulls.len() {
                left
            } else {
                Binomial::new(left, 1.0 / (nulls.len() - i) as f64)
                    .expect("valid binomial")
                    .sample(rng)
            };
            left -= k;
            if k % 2 == 1 {
                traj.flip(self.dynamics, m as usize / 3, LETTERS[m as usize % 3]);
            }
        }
    }
}

fn run_sweeps(c: &StabilizerCode, dynamics: &Dynamics, decoder: &Decoder, cfg: &ThermalConfig, rng: &mut ChaCha8Rng, record: bool) -> Result<SimTrajectory> {
    let mut traj = SimTrajectory::new(c);
    let mut next = cfg.checkpoint_every;
    while next <= cfg.t_max {
        while traj.sweeps < next {
            traj.sweep(dynamics, rng);
        }
        if record {
            traj.energy_trace.push((traj.sweeps, traj.energy()));
        }
        if decoder.failed(c, &traj)? {
            traj.failure_time = Some(traj.sweeps);
            break;
        }
        next += cfg.checkpoint_every;
    }
    Ok(traj)
}

fn run_rejection_free(c: &StabilizerCode, dynamics: &Dynamics, decoder: &Decoder, cfg: &ThermalConfig, rng: &mut ChaCha8Rng, record: bool) -> Result<SimTrajectory> {
    let mut traj = SimTrajectory::new(c);
    let mut queue = EventQueue::new(dynamics, &traj);
    let n = dynamics.n_sites as u64;
    let moves = dynamics.flips.len() as f64;
    let null_share = dynamics.null_moves.len() as f64 / moves;
    let every = cfg.checkpoint_every;
    let last_checkpoint = cfg.t_max / every * every;
    // Proposals made so far and the next checkpoint, in sweeps.
    let mut t = 0u64;
    let mut cp = every;
    let mut dirty = true;
    loop {
        let total = queue.weight();
        let p = total / moves;
        let event = if p <= 0.0 {
            u64::MAX
        } else if p >= 1.0 {
            t + 1
        } else {
            let gap = Geometric::new(p).expect("valid geometric").sample(rng);
            t.saturating_add(gap).saturating_add(1)
        };
        let ratio = if p < 1.0 { null_share / (1.0 - p) } else { 0.0 };

        while cp <= last_checkpoint && cp.saturating_mul(n) < event {
            let boundary = cp * n;
            if dirty || record {
                queue.add_nulls(boundary - t, ratio);
                t = boundary;
                traj.sweeps = cp;
                if record {
                    traj.energy_trace.push((cp, traj.energy()));
                }
            }
            if dirty {
                dirty = false;
                if decoder.reads_z() {
                    queue.settle(&mut traj, rng);
                }
                if decoder.failed(c, &traj)? {
                    traj.failure_time = Some(cp);
                    queue.settle(&mut traj, rng);
                    return Ok(traj);
                }
            }
            cp = if record {
                cp + every
            } else {
                // Nothing changes before the event, so skip to the first
                // checkpoint at or after it.
                let sweep = event.div_ceil(n);
                (cp + every).max(sweep.div_ceil(every).saturating_mul(every))
            };
        }
        if cp > last_checkpoint {
            let end = last_checkpoint * n;
            if end > t {
                queue.add_nulls(end - t, ratio);
            }
            traj.sweeps = last_checkpoint;
            break;
        }
        queue.add_nulls(event - 1 - t, ratio);
        t = event;
        let m = queue.pick(rng, total);
        queue.apply(&mut traj, m);
        dirty = true;
    }
    queue.settle(&mut traj, rng);
    Ok(traj)
}

/// Runs one trajectory until failure or `t_max` sweeps. Trial `i` draws
/// from stream `i` of the seeded generator.
pub fn run_trial(c: &StabilizerCode, dynamics: &Dynamics, decoder: &Decoder, cfg: &ThermalConfig, trial: usize, record: bool) -> Result<SimTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    match cfg.engine {
        Engine::Sweep => run_sweeps(c, dynamics, decoder, cfg, &mut rng, record),
        Engine::RejectionFree => run_rejection_free(c, dynamics, decoder, cfg, &mut rng, record),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: usize,
    /// `None` if no failure was seen within `t_max` sweeps.
    pub failure_time: Option<u64>,
}

fn prepare(c: &StabilizerCode, cfg: &ThermalConfig) -> Result<(Dynamics, Decoder)> {
    cfg.check()?;
    let dynamics = Dynamics::new(c, cfg.beta);
    let decoder = Decoder::for_code(c, &dynamics)?;
    Ok((dynamics, decoder))
}

/// Failure times of `cfg.trials` independent trials, run in order.
pub fn failure_times_sequential(c: &StabilizerCode, cfg: &ThermalConfig) -> Result<Vec<TrialOutcome>> {
    let (dynamics, decoder) = prepare(c, cfg)?;
    (0..cfg.trials)
        .map(|trial| {
            run_trial(c, &dynamics, &decoder, cfg, trial, false).map(|t| TrialOutcome {
                trial,
                failure_time: t.failure_time,
            })
        })
        .collect()
}

/// Failure times with trials spread over the rayon pool. Results are
/// identical to [`failure_times_sequential`].
#[cfg(feature = "parallel")]
pub fn failure_times_parallel(c: &StabilizerCode, cfg: &ThermalConfig) -> Result<Vec<TrialOutcome>> {
    let (dynamics, decoder) = prepare(c, cfg)?;
    let mut out: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            run_trial(c, &dynamics, &decoder, cfg, trial, false).map(|t| TrialOutcome {
                trial,
                failure_time: t.failure_time,
            })
        })
        .collect::<Result<_>>()?;
    out.sort_by_key(|o| o.trial);
    Ok(out)
}

pub fn failure_times(c: &StabilizerCode, cfg: &ThermalConfig) -> Result<Vec<TrialOutcome>> {
    #[cfg(feature = "parallel")]
    return failure_times_parallel(c, cfg);
    #[cfg(not(feature = "parallel"))]
    return failure_times_sequential(c, cfg);
}

/// Median failure time. Censored trials count as later than every observed
/// failure, so a censored median is only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Median {
    pub value: f64,
    pub censored: bool,
}

pub fn median_failure(outcomes: &[TrialOutcome], t_max: u64) -> Option<Median> {
    if outcomes.is_empty() {
        return None;
    }
    let mut times: Vec<(bool, u64)> = outcomes
        .iter()
        .map(|o| match o.failure_time {
            Some(t) => (false, t),
            None => (true, t_max),
        })
        .collect();
    times.sort();
    let n = times.len();
    let pick = |i: usize| times[i];
    let (lo, hi) = if n % 2 == 1 { (pick(n / 2), pick(n / 2)) } else { (pick(n / 2 - 1), pick(n / 2)) };
    Some(Median {
        value: (lo.1 + hi.1) as f64 / 2.0,
        censored: lo.0 || hi.0,
    })
}

pub fn censoring_rate(outcomes: &[TrialOutcome]) -> f64 {
    if outcomes.is_empty() {
        return 0.0;
    }
    outcomes.iter().filter(|o| o.failure_time.is_none()).count() as f64 / outcomes.len() as f64
}

pub fn outcomes_csv(family: &str, n: usize, cfg: &ThermalConfig, outcomes: &[TrialOutcome]) -> String {
    let mut out = String::from("family,N,beta,trial,failure_time,censored\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{family},{n},{},{},{},{}",
            cfg.beta,
            o.trial,
            o.failure_time.unwrap_or(cfg.t_max),
            o.failure_time.is_none()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::builtin;

    fn cfg(beta: f64, t_max: u64, trials: usize) -> ThermalConfig {
        ThermalConfig::new(beta, t_max, 7, 1, trials).unwrap()
    }

    #[test]
    fn detailed_balance() {
        let c = builtin(Family::Toric, 3, None).unwrap();
        let beta = 0.7;
        let d = Dynamics::new(&c, beta);
        let mut t = SimTrajectory::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let site = rng.random_range(0..c.n_qubits());
            let letter = LETTERS[rng.random_range(0..3)];
            let de = t.delta_energy(&d, site, letter);
            let forward = d.acceptance(de);
            t.flip(&d, site, letter);
            assert_eq!(t.delta_energy(&d, site, letter), -de);
            let backward = d.acceptance(-de);
            assert!((forward / backward - (-beta * de as f64).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_flip_energies() {
        let ring = builtin(Family::Ising1d, 6, None).unwrap();
        let d = Dynamics::new(&ring, 1.0);
        let t = SimTrajectory::new(&ring);
        assert_eq!(t.delta_energy(&d, 0, Letter::X), 2);
        assert_eq!(t.delta_energy(&d, 0, Letter::Z), 0);
        let ising = builtin(Family::Ising2d, 6, None).unwrap();
        let d = Dynamics::new(&ising, 1.0);
        let t = SimTrajectory::new(&ising);
        assert_eq!(t.delta_energy(&d, 14, Letter::Y), 4);
    }

    #[test]
    fn domain_wall_moves_for_free() {
        let ring = builtin(Family::Ising1d, 8, None).unwrap();
        let l = ring.lattice();
        let d = Dynamics::new(&ring, 50.0);
        let mut t = SimTrajectory::new(&ring);
        t.flip(&d, l.site(2, 0), Letter::X);
        assert_eq!(t.violated_count(), 2);
        assert_eq!(t.delta_energy(&d, l.site(3, 0), Letter::X), 0);
        assert!(t.propose(&d, l.site(3, 0), Letter::X, || 1.0));
        assert_eq!(t.violated_count(), 2);
    }

    #[test]
    fn zero_temperature_freezes() {
        let ring = builtin(Family::Ising1d, 5, None).unwrap();
        let d = Dynamics::new(&ring, f64::INFINITY);
        let mut t = SimTrajectory::new(&ring);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            t.sweep(&d, &mut rng);
        }
        assert_eq!(t.violated_count(), 0);
        assert!(t.error.iter().all(|&e| e & 1 == 0));
    }

    #[test]
    fn infinite_temperature_accepts_everything() {
        let c = builtin(Family::Toric, 3, None).unwrap();
        let d = Dynamics::new(&c, 0.0);
        let mut t = SimTrajectory::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let site = rng.random_range(0..c.n_qubits());
            assert!(t.propose(&d, site, Letter::Y, || 0.999_999));
        }
    }

    #[test]
    fn incremental_energy_matches_full_scan() {
        for c in [
            builtin(Family::Toric, 4, None).unwrap(),
            builtin(Family::Ising2d, 5, None).unwrap(),
            builtin(Family::Ising1d, 5, None).unwrap(),
        ] {
            let d = Dynamics::new(&c, 0.5);
            let mut t = SimTrajectory::new(&c);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for s in 1..=500 {
                t.sweep(&d, &mut rng);
                if s % 100 == 0 {
                    assert_eq!(t.violated_count(), t.recomputed_violations(&c));
                    let full: Vec<usize> = c.syndrome_of(&t.accumulated_error(&c));
                    assert_eq!(t.violated().collect::<Vec<_>>(), full);
                }
            }
        }
    }

    #[test]
    fn local_energy_matches_full_scan() {
        let c = builtin(Family::Toric, 4, None).unwrap();
        let k2 = c.k_rows() * c.k_cols();
        let d = Dynamics::new(&c, 1.0);
        let mut t = SimTrajectory::new(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let site = rng.random_range(0..c.n_qubits());
            let letter = LETTERS[rng.random_range(0..3)];
            assert!(d.affected(site, letter).len() <= k2);
            let before = t.recomputed_violations(&c) as i64;
            let de = t.delta_energy(&d, site, letter);
            t.flip(&d, site, letter);
            assert_eq!(t.recomputed_violations(&c) as i64 - before, de);
        }
    }

    #[test]
    fn matching_clears_syndrome() {
        let c = builtin(Family::Toric, 5, None).unwrap();
        let d = Dynamics::new(&c, 0.3);
        let dec = Decoder::for_code(&c, &d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = SimTrajectory::new(&c);
        for _ in 0..20 {
            t.sweep(&d, &mut rng);
            let fixed = dec.corrected(&c, &t);
            assert!(c.syndrome_of(&fixed).is_empty());
        }
    }

    #[test]
    fn reproducible_and_order_independent() {
        let c = builtin(Family::Toric, 3, None).unwrap();
        let cfg = cfg(1.0, 400, 6);
        let a = failure_times_sequential(&c, &cfg).unwrap();
        let b = failure_times(&c, &cfg).unwrap();
        assert_eq!(a, b);
        let (d, dec) = prepare(&c, &cfg).unwrap();
        let t1 = run_trial(&c, &d, &dec, &cfg, 2, true).unwrap();
        let t2 = run_trial(&c, &d, &dec, &cfg, 2, true).unwrap();
        assert_eq!(t1.error, t2.error);
        assert_eq!(t1.energy_trace, t2.energy_trace);
        for &(_, e) in &t1.energy_trace {
            assert!(e >= 0.0);
        }
    }

    #[test]
    fn zero_cap_censors_everything() {
        let c = builtin(Family::Ising2d, 4, None).unwrap();
        let out = failure_times(&c, &cfg(2.0, 0, 5)).unwrap();
        assert!(out.iter().all(|o| o.failure_time.is_none()));
        assert_eq!(censoring_rate(&out), 1.0);
        let csv = outcomes_csv("ising2d", 4, &cfg(2.0, 0, 5), &out);
        assert!(csv.lines().nth(1).unwrap().ends_with(",0,true"));
    }

    #[test]
    fn unsupported_families() {
        let p = "XXI/XXI/III".parse().unwrap();
        let c = builtin(Family::Trans3x3, 6, Some(&p)).unwrap();
        assert!(matches!(failure_times(&c, &cfg(1.0, 5, 1)), Err(Error::Unsupported(_))));
    }

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        let (ma, va) = mean_var(a);
        let (mb, vb) = mean_var(b);
        let se = (va / a.len() as f64 + vb / b.len() as f64).sqrt();
        (ma - mb).abs() <= 4.0 * se + 1e-9
    }

    #[test]
    fn engines_agree_on_energy() {
        let c = builtin(Family::Ising2d, 3, None).unwrap();
        let base = ThermalConfig::new(0.8, 40, 21, 4, 1500).unwrap();
        let mut by_engine = Vec::new();
        for engine in [Engine::Sweep, Engine::RejectionFree] {
            let cfg = base.with_engine(engine);
            let (d, dec) = prepare(&c, &cfg).unwrap();
            let energies: Vec<Vec<f64>> = (0..cfg.trials)
                .map(|i| {
                    let t = run_trial(&c, &d, &dec, &cfg, i, true).unwrap();
                    assert_eq!(t.violated_count(), t.recomputed_violations(&c));
                    t.energy_trace.iter().map(|&(_, e)| e).collect()
                })
                .collect();
            by_engine.push(energies);
        }
        let at = |e: &[Vec<f64>], k: usize| e.iter().filter_map(|v| v.get(k).copied()).collect::<Vec<_>>();
        for k in [0, 4, 9] {
            assert!(close(&at(&by_engine[0], k), &at(&by_engine[1], k)), "checkpoint {k}");
        }
    }

    #[test]
    fn engines_agree_on_failure_times() {
        let c = builtin(Family::Toric, 3, None).unwrap();
        let base = ThermalConfig::new(1.5, 10_000, 4, 1, 1500).unwrap();
        let times = |engine| -> Vec<f64> {
            failure_times(&c, &base.with_engine(engine))
                .unwrap()
                .iter()
                .map(|o| o.failure_time.unwrap() as f64)
                .collect()
        };
        assert!(close(&times(Engine::Sweep), &times(Engine::RejectionFree)));
    }

    #[test]
    fn rejection_free_settles_null_moves() {
        let ring = builtin(Family::Ising1d, 4, None).unwrap();
        let cfg = ThermalConfig::new(1.0, 200, 3, 7, 1).unwrap();
        let (d, dec) = prepare(&ring, &cfg).unwrap();
        let t = run_trial(&ring, &d, &dec, &cfg, 0, true).unwrap();
        assert_eq!(t.sweeps, t.failure_time.unwrap_or(196));
        assert_eq!(c_syndrome(&ring, &t), t.violated().collect::<Vec<_>>());
        assert!(t.error.iter().any(|&e| e & 2 != 0), "Z proposals are always accepted");
    }

    fn c_syndrome(c: &StabilizerCode, t: &SimTrajectory) -> Vec<usize> {
        c.syndrome_of(&t.accumulated_error(c))
    }

    #[test]
    fn medians() {
        let o = |t| TrialOutcome { trial: 0, failure_time: t };
        let m = median_failure(&[o(Some(3)), o(Some(9)), o(None)], 100).unwrap();
        assert_eq!(m, Median { value: 9.0, censored: false });
        let m = median_failure(&[o(Some(3)), o(None), o(None)], 100).unwrap();
        assert!(m.censored);
    }
}
