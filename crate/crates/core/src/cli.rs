//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::anyons::{energy_profile, profile_csv};
use crate::code::{builtin, degeneracy_exponent, is_specified, parse, parse_unchecked, Family, Pattern, StabilizerCode};
use crate::error::{Error, Result};
use crate::identity::{identity_sets_basis, SetOrigin};
use crate::strings::{assemble_logicals, classify_translational_3x3, Construction, LogicalClass, Orientation};
use crate::thermal::{censoring_rate, failure_times, median_failure, outcomes_csv, Engine, ThermalConfig};

#[derive(Parser, Debug)]
#[command(name = "stabstrings", version, about = "Logical string operators and thermal stability of 2D stabilizer codes")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct Input {
    /// Code description file.
    #[arg(conflicts_with = "builtin", required_unless_present = "builtin")]
    path: Option<PathBuf>,

    /// Built-in code: `toric:N`, `ising1d:N`, `ising2d:N` or `trans3x3:PATTERN:N`.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Check commutation, locality and lattice size.
    Validate(Input),
    /// Degeneracy exponent M and the counts behind it.
    Degeneracy(Input),
    /// Elementary identity sets with their topology.
    IdentitySets(Input),
    /// Construct degeneracy-breaking operators and certify them.
    Strings(Input),
    /// Classify a translation-invariant 3x3 code.
    Classify3x3 {
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    /// Syndrome energy of truncated loop operators.
    Anyons {
        #[command(flatten)]
        input: Input,
        /// Index of the loop operator to profile.
        #[arg(long, default_value_t = 0)]
        operator: usize,
    },
    /// Metropolis failure times for a built-in family.
    Simulate {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Sweep cap.
        #[arg(long, default_value_t = 10_000)]
        tmax: u64,
        /// Sweeps between decoder checks.
        #[arg(long, default_value_t = 1)]
        checkpoint: u64,
        #[arg(long, value_enum, default_value_t = EngineArg::RejectionFree)]
        engine: EngineArg,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Sweep,
    RejectionFree,
}

const USAGE: i32 = 2;
const FAILED: i32 = 1;

/// Parses `argv` (including the program name), runs one verb and writes its
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { USAGE } else { 0 };
        }
    };
    let output = cli.output.clone();
    let (report, code) = match execute(cli) {
        Ok(done) => done,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::InvalidArgument(_) | Error::Syntax { .. } => USAGE,
                _ => FAILED,
            };
        }
    };
    let written = match output {
        Some(path) => std::fs::write(&path, &report),
        None => {
            print!("{report}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return FAILED;
    }
    code
}

fn execute(cli: Cli) -> Result<(String, i32)> {
    let csv_ok = matches!(cli.verb, Verb::Anyons { .. } | Verb::Simulate { .. });
    if cli.format == Format::Csv && !csv_ok {
        return Err(Error::InvalidArgument("csv output is available for anyons and simulate".into()));
    }
    match cli.verb {
        Verb::Validate(input) => validate(&input),
        Verb::Degeneracy(input) => degeneracy(&load(&input)?),
        Verb::IdentitySets(input) => identity_sets(&load(&input)?),
        Verb::Strings(input) => strings(&load(&input)?),
        Verb::Classify3x3 { pattern, n } => classify(&pattern, n),
        Verb::Anyons { input, operator } => anyons(&load(&input)?, operator, cli.format),
        Verb::Simulate {
            input,
            seed,
            beta,
            trials,
            tmax,
            checkpoint,
            engine,
        } => {
            let engine = match engine {
                EngineArg::Sweep => Engine::Sweep,
                EngineArg::RejectionFree => Engine::RejectionFree,
            };
            let cfg = ThermalConfig::new(beta, tmax, seed, checkpoint, trials)?.with_engine(engine);
            simulate(&load(&input)?, &cfg, cli.format)
        }
    }
}

fn parse_builtin(spec: &str) -> Result<StabilizerCode> {
    let bad = || Error::InvalidArgument(format!("cannot read builtin {spec:?}; expected family:N or trans3x3:PATTERN:N"));
    let parts: Vec<&str> = spec.split(':').collect();
    let family: Family = parts[0].parse()?;
    let (pattern, n) = match (family, parts.as_slice()) {
        (Family::Trans3x3, [_, p, n]) => (Some(p.parse::<Pattern>()?), n),
        (Family::Trans3x3, _) => return Err(bad()),
        (_, [_, n]) => (None, n),
        _ => return Err(bad()),
    };
    let n = n.parse().map_err(|_| bad())?;
    builtin(family, n, pattern.as_ref())
}

fn read(input: &Input) -> Result<String> {
    let path = input.path.as_ref().expect("clap requires a path or a builtin");
    Ok(std::fs::read_to_string(path)?)
}

fn load(input: &Input) -> Result<StabilizerCode> {
    match &input.builtin {
        Some(spec) => parse_builtin(spec),
        None => parse(&read(input)?),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn header(out: &mut String, c: &StabilizerCode, m: Option<usize>) {
    let _ = writeln!(out, "lattice {}", c.lattice());
    if let Some(f) = c.family() {
        let _ = writeln!(out, "family {f}");
    }
    let _ = writeln!(out, "N {}", c.n());
    let _ = writeln!(out, "qubits {}", c.n_qubits());
    let _ = writeln!(out, "R {}", c.n_generators());
    let _ = writeln!(out, "k {}x{}", c.k_rows(), c.k_cols());
    match m {
        Some(m) => writeln!(out, "M {m}"),
        None => writeln!(out, "M n/a"),
    }
    .expect("writing to a string");
}

fn validate(input: &Input) -> Result<(String, i32)> {
    let c = match &input.builtin {
        Some(spec) => parse_builtin(spec)?,
        None => parse_unchecked(&read(input)?)?,
    };
    let r = c.validate();
    let mut out = String::new();
    header(&mut out, &c, r.degeneracy_exponent);
    let list = |v: &[usize]| {
        if v.is_empty() {
            "none".to_string()
        } else {
            v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
        }
    };
    let pairs = if r.commutation_violations.is_empty() {
        "none".to_string()
    } else {
        r.commutation_violations
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "anticommuting pairs: {pairs}");
    let _ = writeln!(out, "identity generators: {}", list(&r.identity_generators));
    let _ = writeln!(out, "non-hermitian generators: {}", list(&r.non_hermitian));
    let _ = writeln!(out, "oversize generators: {}", list(&r.oversize_generators));
    let _ = writeln!(out, "lattice too small: {}", yes(r.lattice_too_small));
    let _ = writeln!(out, "frustrated: {}", yes(r.frustrated));
    let _ = writeln!(out, "specified: {}", yes(r.specified));
    let ok = r.accepted();
    let _ = writeln!(out, "status: {}", if ok { "accepted" } else { "rejected" });
    Ok((out, if ok { 0 } else { FAILED }))
}

fn degeneracy(c: &StabilizerCode) -> Result<(String, i32)> {
    let m = degeneracy_exponent(c)?;
    let basis = identity_sets_basis(c)?;
    let mut out = String::new();
    header(&mut out, c, Some(m));
    let _ = writeln!(out, "rank {}", c.group().rank());
    let _ = writeln!(out, "identity set basis {}", basis.len());
    let _ = writeln!(out, "M = qubits - R + |G'| = {} - {} + {}", c.n_qubits(), c.n_generators(), basis.len());
    let _ = writeln!(out, "ground state degeneracy 2^{m}");
    let _ = writeln!(out, "specified: {}", yes(is_specified(c)));
    Ok((out, 0))
}

fn identity_sets(c: &StabilizerCode) -> Result<(String, i32)> {
    let m = degeneracy_exponent(c)?;
    let mut out = String::new();
    header(&mut out, c, Some(m));
    if !is_specified(c) {
        let basis = identity_sets_basis(c)?;
        let _ = writeln!(out, "specified: no");
        let _ = writeln!(out, "identity set basis {}", basis.len());
        for (i, g) in basis.iter().enumerate() {
            let _ = writeln!(out, "basis {i} members {} indicator {}", g.len(), g.indicator().to_hex());
        }
        return Ok((out, 0));
    }
    let fam = crate::identity::elementary_sets(c)?;
    let _ = writeln!(out, "elementary sets {}", fam.len());
    for (i, g) in fam.sets.iter().enumerate() {
        let t = fam.topology[i];
        let origin = match fam.origin[i] {
            SetOrigin::Local => "local-window".to_string(),
            SetOrigin::Band(d) => format!("band-{}", d.name()),
            SetOrigin::Global => "global".to_string(),
        };
        let bbox = match g.bounding_box(c) {
            Some((r, col)) => format!("rows {}+{} cols {}+{}", r.start, r.len, col.start, col.len),
            None => "empty".into(),
        };
        let _ = writeln!(
            out,
            "set {i} members {} phase {} trivial-vertical {} trivial-horizontal {} origin {origin} bbox {bbox} indicator {}",
            g.len(),
            g.product_phase().prefix(),
            yes(t.trivial_vertical),
            yes(t.trivial_horizontal),
            g.indicator().to_hex()
        );
    }
    Ok((out, 0))
}

fn class_name(c: &LogicalClass) -> &'static str {
    match c {
        LogicalClass::Nontrivial => "nontrivial",
        LogicalClass::Trivial { .. } => "trivial",
    }
}

fn strings(c: &StabilizerCode) -> Result<(String, i32)> {
    let a = assemble_logicals(c)?;
    let mut out = String::new();
    header(&mut out, c, Some(a.certificate.m));
    let _ = writeln!(out, "elementary sets {}", a.family.len());
    for (i, r) in a.emitted.iter().chain(&a.partners).enumerate() {
        let set = match (r.construction, r.set_index) {
            (Construction::Partner { of }, _) => format!("partner of {of}"),
            (_, Some(s)) => format!("set {s}"),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "operator {i} {} {} {set} weight {} {} {}",
            r.construction,
            r.orientation,
            r.operator.weight(),
            class_name(&r.independence),
            r.operator.to_sparse_text()
        );
    }
    let _ = writeln!(out, "dependent candidates {}", a.dependent.len());
    let cert = &a.certificate;
    let _ = writeln!(
        out,
        "certificate pairs {} unpaired {} rank {}/{}",
        cert.pairs.len(),
        cert.radical.len(),
        cert.rank,
        cert.n_qubits
    );
    let _ = writeln!(out, "all M={} degeneracies broken: {}", cert.m, yes(cert.passed));
    if !cert.passed {
        let _ = writeln!(out, "surviving degeneracies {}", cert.residual());
    }
    Ok((out, if cert.passed { 0 } else { FAILED }))
}

fn classify(pattern: &str, n: usize) -> Result<(String, i32)> {
    let p: Pattern = pattern.parse()?;
    let v = classify_translational_3x3(&p, n)?;
    let mut out = String::new();
    let _ = writeln!(out, "pattern {p}");
    let _ = writeln!(out, "lattice {n}x{n}");
    let _ = writeln!(out, "N {n}");
    let _ = writeln!(out, "qubits {}", n * n);
    let _ = writeln!(out, "R {}", n * n);
    let _ = writeln!(out, "k 3x3");
    match v.degeneracy_exponent {
        Some(m) => writeln!(out, "M {m}"),
        None => writeln!(out, "M n/a"),
    }
    .expect("writing to a string");
    let letters = |ls: &[crate::pauli::Letter; 3]| ls.iter().map(|l| l.as_char().to_string()).collect::<Vec<_>>().join(",");
    let _ = writeln!(out, "row products ({})", letters(&v.row_products));
    let _ = writeln!(out, "column products ({})", letters(&v.column_products));
    let _ = writeln!(out, "R1 R3 commute: {}", yes(v.r1_r3_commute));
    let _ = writeln!(out, "case {}", v.case.name());
    for s in &v.strings {
        let class = match &s.class {
            Some(c) => class_name(c),
            None => "anticommutes",
        };
        let _ = writeln!(
            out,
            "string {}: weight {} {} {}",
            s.label,
            s.operator.weight(),
            class,
            s.operator.to_sparse_text()
        );
    }
    if let Some(ind) = v.rows_independent {
        let _ = writeln!(out, "row strings independent: {}", yes(ind));
    }
    for note in &v.notes {
        let _ = writeln!(out, "note: {note}");
    }
    Ok((out, 0))
}

fn anyons(c: &StabilizerCode, index: usize, format: Format) -> Result<(String, i32)> {
    let a = assemble_logicals(c)?;
    let loops: Vec<_> = a
        .all_operators()
        .into_iter()
        .filter(|p| Orientation::of(p) != Orientation::Point)
        .collect();
    let Some(op) = loops.get(index) else {
        return Err(Error::NotTruncatable);
    };
    let profile = energy_profile(c, op)?;
    if format == Format::Csv {
        return Ok((profile_csv(&profile, c.delta()), 0));
    }
    let mut out = String::new();
    header(&mut out, c, Some(a.certificate.m));
    let k = c.k_rows().max(c.k_cols());
    let _ = writeln!(out, "loop operators {}", loops.len());
    let _ = writeln!(out, "operator {index} {} {}", Orientation::of(op), op.to_sparse_text());
    let _ = writeln!(out, "violation cap 2k^2 = {}", 2 * k * k);
    for s in &profile {
        let _ = writeln!(
            out,
            "length {} violated {} energy {}",
            s.truncation_length,
            s.violated.len(),
            s.energy
        );
    }
    Ok((out, 0))
}

fn simulate(c: &StabilizerCode, cfg: &ThermalConfig, format: Format) -> Result<(String, i32)> {
    let outcomes = failure_times(c, cfg)?;
    let family = c.family().map(Family::name).unwrap_or("custom");
    if format == Format::Csv {
        return Ok((outcomes_csv(family, c.n(), cfg, &outcomes), 0));
    }
    let mut out = String::new();
    let m = degeneracy_exponent(c).ok();
    header(&mut out, c, m);
    let _ = writeln!(out, "beta {}", cfg.beta);
    let _ = writeln!(out, "seed {}", cfg.seed);
    let _ = writeln!(out, "trials {}", cfg.trials);
    let _ = writeln!(out, "tmax {}", cfg.t_max);
    let _ = writeln!(out, "checkpoint {}", cfg.checkpoint_every);
    if let Some(med) = median_failure(&outcomes, cfg.t_max) {
        let bound = if med.censored { " (censored, lower bound)" } else { "" };
        let _ = writeln!(out, "median failure time {}{bound}", med.value);
    }
    let _ = writeln!(out, "censoring rate {:.3}", censoring_rate(&outcomes));
    Ok((out, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs() {
        assert_eq!(parse_builtin("toric:3").unwrap().n_qubits(), 18);
        assert_eq!(parse_builtin("trans3x3:XXX/III/XXX:6").unwrap().n_generators(), 36);
        assert!(matches!(parse_builtin("toric"), Err(Error::InvalidArgument(_))));
        assert!(matches!(parse_builtin("mystery:4"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run(["stabstrings"]), USAGE);
        assert_eq!(run(["stabstrings", "strings"]), USAGE);
        assert_eq!(run(["stabstrings", "strings", "--builtin", "toric"]), USAGE);
        assert_eq!(run(["stabstrings", "degeneracy", "--builtin", "toric:4", "--format", "csv"]), USAGE);
    }
}
