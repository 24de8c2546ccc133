//! Randomized invariants.

mod common;

use kikuchi_core::combinatorics::SubsetIndexer;
use kikuchi_core::hypergraph::decompose;
use kikuchi_core::kikuchi::build_even_kikuchi;
use kikuchi_core::ldc::hadamard_fixture;
use kikuchi_core::random::{random_low_degree_family, random_matching_family, SeedStream};
use kikuchi_core::refuter::{combine_theorem1, refute_3xor, RefuteParams};
use kikuchi_core::spectral::{power_iteration_lower, spectral_norm_upper, SpectralMode};
use kikuchi_core::xor::{cauchy_schwarz_audit, Assignment, PartitionMode};
use kikuchi_core::{KikuchiMatrix, MatchingFamily, XorInstance};
use num_rational::Ratio;
use proptest::prelude::*;

use common::*;

fn family(seed: u64, n: usize, q: usize, k: usize) -> MatchingFamily {
    let mut rng = SeedStream::new(seed).rng("instance");
    random_matching_family(&mut rng, n, q, k, n / q).unwrap()
}

fn sign_vec(k: usize) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], k)
}

fn sparse_matrix() -> impl Strategy<Value = KikuchiMatrix> {
    (1usize..40, 1usize..40).prop_flat_map(|(r, c)| {
        proptest::collection::vec((0..r, 0..c, prop_oneof![Just(1i64), Just(-1i64)]), 0..120)
            .prop_map(move |t| KikuchiMatrix::from_triplets(r, c, t).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn indexer_round_trips(universe in 1usize..=128, seed: u64) {
        let size = (seed as usize % universe.min(6)) + 1;
        let ix = SubsetIndexer::new(universe, size).unwrap();
        let rank = (seed as u128 % binom(universe as i64, size as i64)) as usize;
        let s = ix.unrank(rank).unwrap();
        prop_assert_eq!(ix.rank(&s).unwrap(), rank);
        prop_assert_eq!(s, colex_unrank(rank as u128, size));
    }

    #[test]
    fn family_text_round_trips(seed: u64, n in 3usize..20, k in 1usize..5) {
        let f = family(seed, n, 3, k);
        prop_assert_eq!(MatchingFamily::from_text(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn instance_text_round_trips(seed: u64, n in 3usize..16, k in 1usize..5, b in sign_vec(4)) {
        let inst = XorInstance::from_family(&family(seed, n, 3, k), &b[..k]).unwrap();
        prop_assert_eq!(XorInstance::from_text(&inst.to_text()).unwrap(), inst);
    }

    #[test]
    fn matrix_text_round_trips(m in sparse_matrix()) {
        prop_assert_eq!(KikuchiMatrix::from_text(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn decomposition_invariants(seed: u64, n in 6usize..=20, k in 1usize..=5, d in 1usize..=3) {
        let f = family(seed, n, 3, k);
        let res = decompose(&f, d).unwrap();
        prop_assert!(max_pair_degree(&res.residual) <= d);
        for i in 0..k {
            prop_assert_eq!(f.member(i).len(), res.residual.member(i).len() + res.bipartite[i].len());
            prop_assert!(res.residual.member(i).is_matching());
        }
        prop_assert!(res.bipartite_family().is_matching_family());
    }

    #[test]
    fn sign_flip_negates(seed: u64, n in 3usize..12, k in 1usize..4, x: u64) {
        let f = family(seed, n, 3, k);
        let b: Vec<i8> = signs(k, seed);
        let neg: Vec<i8> = b.iter().map(|v| -v).collect();
        let xa = Assignment::from_mask(n, x);
        let p = XorInstance::from_family(&f, &b).unwrap().evaluate_unnormalized(&xa).unwrap();
        let q = XorInstance::from_family(&f, &neg).unwrap().evaluate_unnormalized(&xa).unwrap();
        prop_assert_eq!(p, -q);
        // odd arity: negating x also negates
        let r = XorInstance::from_family(&f, &b).unwrap().evaluate_unnormalized(&xa.negated()).unwrap();
        prop_assert_eq!(p, -r);
    }

    #[test]
    fn satisfied_fraction_bridge(seed: u64, n in 3usize..10, k in 1usize..4) {
        let f = family(seed, n, 3, k);
        let inst = XorInstance::from_family(&f, &signs(k, seed >> 7)).unwrap();
        prop_assume!(inst.m() > 0);
        let (val, _) = inst.brute_force_val(16).unwrap();
        let best = (0..1u64 << n)
            .map(|m| inst.satisfied_fraction(&Assignment::from_mask(n, m)).unwrap())
            .max()
            .unwrap();
        prop_assert_eq!(best, Ratio::new(1, 2) + val / 2);
    }

    #[test]
    fn cauchy_schwarz_holds(seed: u64, n in 3usize..=12, k in 1usize..=4) {
        let f = family(seed, n, 3, k);
        let b = signs(k, seed);
        for x in 0..1u64 << n {
            let audit = cauchy_schwarz_audit(&f, &b, &Assignment::from_mask(n, x), PartitionMode::Exhaustive).unwrap();
            prop_assert!(audit.holds(), "x={:#b}: {:?}", x, audit);
        }
    }

    #[test]
    fn spectral_ordering(m in sparse_matrix(), seed: u64) {
        let lower = power_iteration_lower(&m, 200, seed);
        let dense = spectral_norm_upper(&m, SpectralMode::DenseExact).unwrap().value;
        let product = spectral_norm_upper(&m, SpectralMode::Product).unwrap().value;
        let dense_t = spectral_norm_upper(&m.transpose(), SpectralMode::DenseExact).unwrap().value;
        prop_assert!(lower <= dense + 1e-9, "{} > {}", lower, dense);
        // dense carries a 1e-9 relative inflation
        prop_assert!(dense <= product * (1.0 + 2e-9) + 1e-12, "{} > {}", dense, product);
        prop_assert!((dense - dense_t).abs() <= 1e-12 * dense.max(1.0));
    }

    #[test]
    fn even_member_norm_at_most_one(seed: u64, n in 4usize..=12, ell in 1usize..=4) {
        let f = family(seed, n, 2, 1);
        let ell = ell.min(n / 2).max(1);
        let a = build_even_kikuchi(f.member(0), ell).unwrap();
        let norm = spectral_norm_upper(&a, SpectralMode::DenseExact).unwrap().value;
        prop_assert!(norm <= 1.0 + 1e-9);
    }

    #[test]
    fn combine_dominates_parts(seed: u64, n in 6usize..=12, k in 1usize..=3, d in 1usize..=2) {
        let f = family(seed, n, 3, k);
        let c = combine_theorem1(&f, &signs(k, seed), d, &RefuteParams::default()).unwrap();
        let m = f.m() as f64;
        let bf = c.component("bound_f").unwrap();
        let bg = c.component("bound_g").unwrap();
        prop_assert!(c.bound + 1e-12 >= bf.max(bg) / m);
    }

    #[test]
    fn certificates_are_deterministic(seed: u64, n in 6usize..=12, k in 1usize..=3) {
        let mut rng = SeedStream::new(seed).rng("instance");
        let f = random_low_degree_family(&mut rng, n, 3, k, n / 3, 2).unwrap();
        let b = signs(k, seed);
        let a = refute_3xor(&f, &b, &RefuteParams::default()).unwrap();
        let c = refute_3xor(&f, &b, &RefuteParams::default()).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
    }
}

#[test]
fn encoding_is_linear() {
    for k in 1..=12 {
        let h = hadamard_fixture(k).unwrap();
        assert!(h.code.encode(0).iter().all(|&b| !b));
        let mut rng = SeedStream::new(k as u64).rng("messages");
        for _ in 0..32 {
            let (a, b): (u64, u64) = (rand::Rng::random(&mut rng), rand::Rng::random(&mut rng));
            let mask = (1u64 << k) - 1;
            let (a, b) = (a & mask, b & mask);
            let sum: Vec<bool> = h.code.encode(a).iter().zip(h.code.encode(b)).map(|(x, y)| x ^ y).collect();
            assert_eq!(h.code.encode(a ^ b), sum);
        }
    }
}
