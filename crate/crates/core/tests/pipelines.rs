//! End-to-end checks on small hand-built instances.

mod common;

use kikuchi_core::hypergraph::{decompose, BipartiteFamily};
use kikuchi_core::ldc::{hadamard_fixture, load_manifest, pad_to_qplus1, psi_from_ldc, save_manifest};
use kikuchi_core::refuter::{
    binomial_ratio, combine_theorem1, expectation_over_b, refute_3xor, refute_even_q, BMode, Pipeline,
    RefuteParams,
};
use kikuchi_core::spectral::{refute_2xor, SpectralMode};
use kikuchi_core::{MatchingFamily, XorInstance};
use num_rational::Ratio;

use common::*;

fn fam(n: usize, members: &[&[&[u32]]]) -> MatchingFamily {
    MatchingFamily::from_edges(n, 3, members.iter().map(|h| h.iter().map(|e| e.to_vec()).collect()).collect())
        .unwrap()
}

#[test]
fn decomposition_moves_shared_pair() {
    let f = fam(5, &[&[&[0, 1, 2]], &[&[0, 1, 3]]]);
    let r = decompose(&f, 1).unwrap();
    assert_eq!(r.heavy_pairs, vec![(0, 1)]);
    assert_eq!(r.residual.m(), 0);
    assert_eq!(r.bipartite, vec![vec![(2, 0)], vec![(3, 0)]]);
    let r2 = decompose(&f, 2).unwrap();
    assert_eq!(r2.residual, f);
    assert!(r2.heavy_pairs.is_empty());
}

#[test]
fn single_edge_two_xor_certificate() {
    let bip = BipartiteFamily::new(4, 1, vec![vec![(0, 0)]]).unwrap();
    let c = refute_2xor(&bip, &[1], SpectralMode::DenseExact).unwrap();
    assert!((c.bound - 2.0).abs() < 1e-6);
    assert_eq!(brute_g(&bip, &[1]), 1);
    let empty = BipartiteFamily::new(4, 1, vec![vec![]]).unwrap();
    assert_eq!(refute_2xor(&empty, &[1], SpectralMode::DenseExact).unwrap().bound, 0.0);
}

#[test]
fn disjoint_supports_give_trivial_bound() {
    let f = fam(12, &[&[&[0, 1, 2], &[3, 4, 5]], &[&[6, 7, 8]]]);
    let (n, m) = (12.0, 3.0);
    for mask in 0..4 {
        let b = signs(2, mask);
        let c = refute_3xor(&f, &b, &RefuteParams::default()).unwrap();
        assert!((c.bound - (n * m / 3.0f64).sqrt()).abs() < 1e-9, "{}", c.bound);
        assert!(c.covers(brute_max(&f, &b) as f64));
    }
}

#[test]
fn combine_without_heavy_pairs_is_residual_only() {
    let f = fam(9, &[&[&[0, 1, 2]], &[&[0, 3, 4]], &[&[5, 6, 7]]]);
    let c = combine_theorem1(&f, &[1, -1, 1], 1, &RefuteParams::default()).unwrap();
    assert_eq!(c.component("bound_g"), Some(0.0));
    assert!((c.bound - c.component("bound_f").unwrap() / 3.0).abs() < 1e-12);
}

#[test]
fn combine_with_all_clauses_heavy_is_bipartite_only() {
    let f = fam(6, &[&[&[0, 1, 2]], &[&[0, 1, 3]], &[&[0, 1, 4]]]);
    let c = combine_theorem1(&f, &[1, 1, -1], 1, &RefuteParams::default()).unwrap();
    assert_eq!(c.component("bound_f"), Some(0.0));
    assert!((c.bound - c.component("bound_g").unwrap() / 3.0).abs() < 1e-12);
    assert!(c.covers(brute_max(&f, &[1, 1, -1]) as f64 / 3.0));
}

#[test]
fn hadamard_even_instance_is_not_refuted() {
    let h = hadamard_fixture(3).unwrap();
    // perfect matchings block every row at l = 2
    let blocked = RefuteParams { ell: 2, ..RefuteParams::default() };
    assert!(refute_even_q(&h.matchings, &[1, 1, 1], &blocked).unwrap_err().is_infeasible());
    for ell in [1, 3] {
        let params = RefuteParams { ell, ..RefuteParams::default() };
        for mask in 0..8 {
            let b = signs(3, mask);
            let c = refute_even_q(&h.matchings, &b, &params).unwrap();
            assert_eq!(brute_max(&h.matchings, &b) as usize, h.matchings.m());
            assert!(c.covers(1.0), "l={ell} b={mask:#b}: {}", c.bound);
        }
    }
}

#[test]
fn genuine_fixture_has_unit_expectation() {
    let p = pad_to_qplus1(&hadamard_fixture(2).unwrap()).unwrap();
    let s = expectation_over_b(Pipeline::Combine { d: 2 }, &p.matchings, &RefuteParams::default(), BMode::Exhaustive, Some(16))
        .unwrap();
    assert_eq!(s.mean_value, Some(1.0));
    assert!(s.all_sound && s.violations == 0);
    assert!(s.mean_bound >= 1.0);
}

#[test]
fn single_member_expectation_matches_positive_sign() {
    let f = fam(9, &[&[&[0, 1, 2], &[3, 4, 5], &[6, 7, 8]]]);
    let s = expectation_over_b(Pipeline::ThreeXor, &f, &RefuteParams::default(), BMode::Exhaustive, Some(16)).unwrap();
    let plus = XorInstance::from_family(&f, &[1]).unwrap().brute_force_val(16).unwrap().0;
    assert_eq!(s.mean_value, Some(*plus.numer() as f64 / *plus.denom() as f64));
}

#[test]
fn ratio_example() {
    assert_eq!(binomial_ratio(8, 4, 2).unwrap().ratio, Ratio::new(3, 35));
}

#[test]
fn unsigned_instance_and_codeword() {
    let p = pad_to_qplus1(&hadamard_fixture(3).unwrap()).unwrap();
    let psi = psi_from_ldc(&p, &[1, 1, 1]).unwrap();
    assert_eq!(psi.groups(), p.matchings.members());
    assert_eq!(XorInstance::from_text(&psi.to_text()).unwrap(), psi);
    let (val, _) = psi_from_ldc(&p, &[-1, 1, -1]).unwrap().brute_force_val(16).unwrap();
    assert_eq!(val, Ratio::from_integer(1));
}

#[test]
fn manifest_round_trip() {
    let dir = std::env::temp_dir().join(format!("kikuchi-manifest-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = pad_to_qplus1(&hadamard_fixture(3).unwrap()).unwrap();
    let path = save_manifest(&p, &dir, "padded").unwrap();
    let back = load_manifest(&path).unwrap();
    assert_eq!(back.matchings, p.matchings);
    assert_eq!((back.epsilon, back.delta, back.weak), (p.epsilon, p.delta, p.weak));
    assert_eq!(back.code.encode(5), p.code.encode(5));
    std::fs::remove_dir_all(&dir).unwrap();
}
