//! Open strings: truncating a loop operator leaves excitations only near
//! its endpoints.

use std::fmt::Write as _;

use crate::code::StabilizerCode;
use crate::error::{Error, Result};
use crate::identity::Direction;
use crate::pauli::PauliOperator;
use crate::strings::Orientation;

/// Axis along which a loop of the given orientation runs.
fn long_axis(o: Orientation) -> Result<Direction> {
    match o {
        Orientation::Horizontal => Ok(Direction::Horizontal),
        Orientation::Vertical => Ok(Direction::Vertical),
        Orientation::Point => Err(Error::NotTruncatable),
    }
}

/// Restricts a loop to the lines `[a, b)` along its long axis. An empty
/// range gives the identity.
pub fn truncate(p: &PauliOperator, a: usize, b: usize) -> Result<PauliOperator> {
    let d = long_axis(Orientation::of(p))?;
    if a >= b {
        return Ok(PauliOperator::identity(p.lattice()));
    }
    let lines = d.extent(p.lattice());
    let len = (b - a).min(lines);
    Ok(p.restrict(&d.band(p.lattice(), a % lines, len)))
}

/// Excitations created by one truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct SyndromeProfile {
    pub truncation_length: usize,
    pub violated: Vec<usize>,
    /// Energy above the ground state, `|violated| · Δ`.
    pub energy: f64,
}

pub fn syndrome(c: &StabilizerCode, p: &PauliOperator, truncation_length: usize) -> SyndromeProfile {
    let violated = c.syndrome_of(p);
    SyndromeProfile {
        truncation_length,
        energy: violated.len() as f64 * c.delta(),
        violated,
    }
}

/// Syndromes of `p` truncated to `[0, L)` for every `L` from 1 to the loop
/// length. Each truncation may violate at most `2k²` generators and the
/// count must be constant for `2k ≤ L ≤ len - 2k`.
pub fn energy_profile(c: &StabilizerCode, p: &PauliOperator) -> Result<Vec<SyndromeProfile>> {
    let d = long_axis(Orientation::of(p))?;
    let lines = d.extent(c.lattice());
    let k = c.k_rows().max(c.k_cols());
    let profile: Vec<SyndromeProfile> = (1..=lines)
        .map(|len| truncate(p, 0, len).map(|t| syndrome(c, &t, len)))
        .collect::<Result<_>>()?;
    let cap = 2 * k * k;
    if let Some(bad) = profile.iter().find(|s| s.violated.len() > cap) {
        return Err(Error::PlateauViolation(format!(
            "length {} violates {} generators, more than 2k^2 = {cap}",
            bad.truncation_length,
            bad.violated.len()
        )));
    }
    let plateau: Vec<&SyndromeProfile> = profile
        .iter()
        .filter(|s| s.truncation_length >= 2 * k && s.truncation_length + 2 * k <= lines)
        .collect();
    if let Some(first) = plateau.first() {
        if let Some(bad) = plateau.iter().find(|s| s.violated.len() != first.violated.len()) {
            return Err(Error::PlateauViolation(format!(
                "{} violations at length {} but {} at length {}",
                first.violated.len(),
                first.truncation_length,
                bad.violated.len(),
                bad.truncation_length
            )));
        }
    }
    Ok(profile)
}

/// `+1` if the operators commute, `-1` otherwise.
pub fn braiding_phase(a: &PauliOperator, b: &PauliOperator) -> Result<i8> {
    Ok(if a.symplectic_inner(b)? { -1 } else { 1 })
}

pub fn profile_csv(profile: &[SyndromeProfile], delta: f64) -> String {
    let mut out = String::from("length,violated_count,energy_over_delta\n");
    for s in profile {
        let _ = writeln!(out, "{},{},{}", s.truncation_length, s.violated.len(), s.energy / delta);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{builtin, Family};
    use crate::pauli::Letter;

    #[test]
    fn toric_open_string() {
        let n = 8;
        let c = builtin(Family::Toric, n, None).unwrap();
        let l = c.lattice();
        let loop_x = PauliOperator::on_sites(l, (0..n).map(|col| l.site(0, col as isize)), Letter::X);
        assert!(c.syndrome_of(&loop_x).is_empty());
        let profile = energy_profile(&c, &loop_x).unwrap();
        for s in &profile[..n - 1] {
            assert_eq!(s.violated.len(), 2, "length {}", s.truncation_length);
            assert_eq!(s.energy, 2.0);
        }
        assert!(profile[n - 1].violated.is_empty());
        assert!(truncate(&loop_x, 3, 3).unwrap().is_identity());
        let csv = profile_csv(&profile, c.delta());
        assert!(csv.starts_with("length,violated_count,energy_over_delta\n1,2,2\n"));
    }

    #[test]
    fn point_operators_do_not_truncate() {
        let c = builtin(Family::Ising2d, 4, None).unwrap();
        let z = PauliOperator::single(c.lattice(), 0, Letter::Z);
        assert!(matches!(truncate(&z, 0, 2), Err(Error::NotTruncatable)));
        assert!(matches!(energy_profile(&c, &z), Err(Error::NotTruncatable)));
    }

    #[test]
    fn ising_domain_wall() {
        let n = 9;
        let c = builtin(Family::Ising1d, n, None).unwrap();
        let l = c.lattice();
        let col = PauliOperator::on_sites(l, (0..n).map(|r| l.site(r as isize, 0)), Letter::X);
        let profile = energy_profile(&c, &col).unwrap();
        assert!(profile[..n - 1].iter().all(|s| s.violated.len() == 2));
    }

    #[test]
    fn crossing_strings_braid() {
        let n = 6;
        let c = builtin(Family::Toric, n, None).unwrap();
        let l = c.lattice();
        let x_row = PauliOperator::on_sites(l, (0..n).map(|col| l.site(0, col as isize)), Letter::X);
        let z_col = PauliOperator::on_sites(l, (0..n).map(|r| l.site(2 * r as isize, 0)), Letter::Z);
        assert_eq!(braiding_phase(&x_row, &z_col).unwrap(), -1);
        let open = truncate(&x_row, 1, 4).unwrap();
        assert_eq!(braiding_phase(&open, &z_col).unwrap(), 1);
    }
}
