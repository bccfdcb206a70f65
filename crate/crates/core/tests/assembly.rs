mod support;

use stabstrings::code::{builtin, Family};
use stabstrings::strings::{assemble_logicals, Construction};
use support::random_trans3x3;

#[test]
fn point_logical_closes_block_code() {
    let c = builtin(Family::Trans3x3, 6, Some(&"XXI/XXI/III".parse().unwrap())).unwrap();
    let a = assemble_logicals(&c).unwrap();
    assert!(a.certificate.passed, "{:?}", a.certificate);
    assert_eq!(a.certificate.m, 11);
    let residual: Vec<_> = a.emitted.iter().filter(|r| r.construction == Construction::Residual).collect();
    assert_eq!(residual.len(), 1);
    assert_eq!(residual[0].operator.weight(), 1);
}

#[test]
fn random_translation_invariant_codes_certify() {
    for n in [6, 7] {
        for p in random_trans3x3(20, n, 0xa55e + n as u64) {
            let c = builtin(Family::Trans3x3, n, Some(&p)).unwrap();
            let a = assemble_logicals(&c).unwrap();
            assert!(a.certificate.passed, "{p} at n={n}: {:?}", a.certificate);
            for r in a.emitted.iter().chain(&a.partners) {
                assert!(c.syndrome_of(&r.operator).is_empty(), "{p}: {}", r.construction);
            }
        }
    }
}

#[test]
fn builtins_certify_without_residuals() {
    for n in 4..=7 {
        for fam in [Family::Toric, Family::Ising1d, Family::Ising2d] {
            let a = assemble_logicals(&builtin(fam, n, None).unwrap()).unwrap();
            assert!(a.certificate.passed);
            assert!(a.emitted.iter().all(|r| r.construction != Construction::Residual));
        }
    }
}
