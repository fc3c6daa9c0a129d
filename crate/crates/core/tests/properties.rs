use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use wprec::arith::{format_rational, parse_rational};
use wprec::correlator::CorrelatorKey;
use wprec::hodge::{ClosedFormProvider, HodgeEngine, HodgePairing, TableProvider};
use wprec::multi_index::multi_binomial;
use wprec::series::{Monomial, TruncatedSeries};
use wprec::{moduli_dimension, CorrelatorEngine, KmzOracle, MultiIndex, Rational, VolumeEngine};

const S_VARS: usize = 2;
const T_VARS: usize = 4;
const OUT_CUTOFF: u32 = 5;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

fn monomial(max_exp: u32) -> impl Strategy<Value = Monomial> {
    (
        proptest::collection::vec(0..=max_exp, S_VARS),
        proptest::collection::vec(0..=max_exp, T_VARS),
    )
        .prop_map(|(s, t)| Monomial { s, t })
}

/// Small series with no truncation in effect.
fn series() -> impl Strategy<Value = TruncatedSeries> {
    proptest::collection::vec((monomial(2), rational()), 0..6).prop_map(|terms| {
        let mut out = TruncatedSeries::zero(S_VARS, T_VARS, 1000);
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    })
}

/// Shifts of `t_2` and `t_3` by polynomials in `s` alone.
fn shifts() -> impl Strategy<Value = BTreeMap<usize, TruncatedSeries>> {
    let poly = || proptest::collection::vec((proptest::collection::vec(0..=2u32, S_VARS), rational()), 1..4);
    (poly(), poly()).prop_map(|(a, b)| {
        let mut out = BTreeMap::new();
        for (k, terms) in [(2usize, a), (3, b)] {
            let mut p = TruncatedSeries::zero(S_VARS, T_VARS, 1000);
            for (s, c) in terms {
                p.add_term(Monomial { s, t: vec![0; T_VARS] }, c);
            }
            out.insert(k, p);
        }
        out
    })
}

fn multi_index(max_index: u32) -> impl Strategy<Value = MultiIndex> {
    proptest::collection::vec(0..=2u32, max_index as usize).prop_map(|dense| MultiIndex::from_dense(&dense))
}

/// An in-dimension signature on a space of dimension at most 6 with at
/// least one insertion.
fn signature() -> impl Strategy<Value = (u32, MultiIndex, Vec<u32>)> {
    (0u32..=2, 1usize..=4)
        .prop_filter("stable, small", |(g, n)| {
            2 * *g as i64 - 2 + *n as i64 > 0 && moduli_dimension(*g, *n) <= 6
        })
        .prop_flat_map(|(g, n)| {
            let dim = moduli_dimension(g, n) as u32;
            (Just(g), multi_index(3), proptest::collection::vec(0..=dim, n - 1)).prop_filter_map(
                "fits the dimension",
                move |(g, b, mut psi)| {
                    let used = b.weight() + psi.iter().sum::<u32>();
                    (used <= dim).then(|| {
                        psi.push(dim - used);
                        (g, b, psi)
                    })
                },
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn substitution_is_additive(f in series(), g in series(), sigma in shifts()) {
        let lhs = f.add(&g).substitute_t(&sigma, OUT_CUTOFF);
        let rhs = f.substitute_t(&sigma, OUT_CUTOFF).add(&g.substitute_t(&sigma, OUT_CUTOFF));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn substitution_is_multiplicative(f in series(), g in series(), sigma in shifts()) {
        let lhs = f.mul(&g).substitute_t(&sigma, OUT_CUTOFF);
        let rhs = f.substitute_t(&sigma, OUT_CUTOFF).mul(&g.substitute_t(&sigma, OUT_CUTOFF));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rational_text_round_trip(x in rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }

    #[test]
    fn multi_index_text_round_trip(b in multi_index(5)) {
        prop_assert_eq!(b.to_string().parse::<MultiIndex>().unwrap(), b);
    }

    #[test]
    fn splits_are_complete(b in multi_index(4)) {
        // sum over L <= b of C(b, L) is 2^{||b||}
        let total: BigInt = b.splits2().map(|(l, _)| multi_binomial(&b, &l).unwrap()).sum();
        prop_assert_eq!(total, BigInt::from(2u32).pow(b.length()));
        for (l, lp) in b.splits2() {
            prop_assert_eq!(&l + &lp, b.clone());
        }
    }

    #[test]
    fn correlator_ignores_insertion_order((g, b, psi) in signature(), rot in 0usize..4) {
        let e = CorrelatorEngine::new();
        let mut rotated = psi.clone();
        let len = rotated.len();
        rotated.rotate_left(rot % len);
        prop_assert_eq!(e.correlator(g, &b, &psi), e.correlator(g, &b, &rotated));
    }

    #[test]
    fn correlator_matches_expansion_and_is_positive((g, b, psi) in signature()) {
        let value = CorrelatorEngine::new().correlator(g, &b, &psi);
        prop_assert_eq!(&value, &KmzOracle::new().kmz_expand(g, &b, &psi));
        prop_assert!(value > Rational::zero());
    }

    #[test]
    fn key_text_round_trip((g, b, psi) in signature()) {
        let key = CorrelatorKey::new(g, b, psi);
        prop_assert_eq!(key.to_string().parse::<CorrelatorKey>().unwrap(), key);
    }

    #[test]
    fn off_dimension_is_zero((g, b, mut psi) in signature(), extra in 1u32..3) {
        psi[0] += extra;
        prop_assert!(CorrelatorEngine::new().correlator(g, &b, &psi).is_zero());
        prop_assert!(KmzOracle::new().kmz_expand(g, &b, &psi).is_zero());
    }

    #[test]
    fn fresh_engines_agree((g, b, psi) in signature()) {
        let warm = CorrelatorEngine::new();
        for w in 0..=3 {
            for k in MultiIndex::of_weight(w, w) {
                let _ = warm.correlator(1, &k, &[0; 1]);
            }
        }
        prop_assert_eq!(warm.correlator(g, &b, &psi), CorrelatorEngine::new().correlator(g, &b, &psi));
    }

    #[test]
    fn volumes_match_correlators(g in 0u32..=2, n in 1usize..=4, pick in 0usize..64) {
        prop_assume!(2 * g as i64 - 2 + n as i64 > 0 && moduli_dimension(g, n) <= 6);
        let dim = moduli_dimension(g, n) as u32;
        let choices = MultiIndex::of_weight(dim, dim);
        let b = &choices[pick % choices.len()];
        let v = VolumeEngine::new().volume(g, n as u32, b).unwrap();
        prop_assert_eq!(v, CorrelatorEngine::new().correlator(g, b, &vec![0; n]));
    }

    #[test]
    fn lambda_pairings_scale_linearly(num in -30i64..=30, den in 1i64..=30, g in 1u32..=3, n in 0usize..=2) {
        prop_assume!(num != 0);
        let scale = Rational::new(BigInt::from(num), BigInt::from(den));
        let plain = HodgeEngine::default();
        let scaled = HodgeEngine::new(TableProvider::scaled_copy(&ClosedFormProvider, 3, &scale));
        for pairing in HodgePairing::ALL {
            let degree = pairing.target_degree(g, n);
            if degree < 0 || 2 * g as i64 - 2 + n as i64 <= 0 {
                continue;
            }
            let degree = degree as u32;
            let weights = if n == 0 { degree..=degree } else { 0..=degree };
            for b in weights.flat_map(|w| MultiIndex::of_weight(w, w)) {
                let mut psi = vec![0; n];
                if n > 0 {
                    psi[0] = degree - b.weight();
                }
                let a = plain.hodge_direct(g, pairing, &b, &psi).unwrap();
                let c = scaled.hodge_direct(g, pairing, &b, &psi).unwrap();
                prop_assert_eq!(c, a * &scale);
            }
        }
    }
}
