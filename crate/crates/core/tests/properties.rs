use std::str::FromStr;

use nlswap_core::table::Discard;
use nlswap_core::{ch_evaluate, classify, correlator, BellFunctional, BoxTable, Scalar};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-40i64..40, 1i64..12, -40i64..40, 1i64..12)
        .prop_map(|(rn, rd, sn, sd)| Scalar::from_parts(rn, rd, sn, sd))
}

fn nonzero_scalar() -> impl Strategy<Value = Scalar> {
    scalar().prop_filter("nonzero", |s| !s.is_zero())
}

/// Convex mixture of local deterministic boxes, a GSB and its anti-correlated twin.
fn ns_box(parties: usize) -> impl Strategy<Value = BoxTable> {
    let vertex = (0u32..4, prop::collection::vec(0u32..4, parties)).prop_map(
        move |(kind, resp)| match kind {
            0 => BoxTable::gsb(parties).unwrap(),
            1 => BoxTable::isotropic(parties, &Scalar::from_integer(-1)).unwrap(),
            _ => BoxTable::deterministic(
                parties,
                |i, x| if x == 0 { resp[i] & 1 } else { resp[i] >> 1 },
            )
            .unwrap(),
        },
    );
    prop::collection::vec((1i64..8, vertex), 1..4).prop_map(|parts| {
        let total: i64 = parts.iter().map(|(w, _)| w).sum();
        let terms: Vec<_> = parts
            .into_iter()
            .map(|(w, t)| (Scalar::ratio(w, total), t))
            .collect();
        BoxTable::mix(&terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn field_axioms(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
        prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
        prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
        prop_assert_eq!(&a - &a, Scalar::zero());
        prop_assert_eq!(&a * Scalar::one(), a.clone());
    }

    #[test]
    fn inverse_and_division(a in nonzero_scalar(), b in scalar()) {
        prop_assert_eq!(&a * a.inv().unwrap(), Scalar::one());
        prop_assert_eq!(b.checked_div(&a).unwrap() * &a, b);
    }

    #[test]
    fn order_agrees_with_floats(a in scalar(), b in scalar()) {
        let (fa, fb) = (a.approx_f64(), b.approx_f64());
        if (fa - fb).abs() > 1e-9 {
            prop_assert_eq!(a < b, fa < fb);
        }
        prop_assert_eq!(a.abs().is_nonnegative(), true);
        if a <= b {
            prop_assert!(&a + &Scalar::sqrt2() <= &b + &Scalar::sqrt2());
        }
    }

    #[test]
    fn text_and_json_roundtrip(a in scalar()) {
        prop_assert_eq!(Scalar::from_str(&a.to_string()).unwrap(), a.clone());
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<Scalar>(&json).unwrap(), a);
    }

    #[test]
    fn tensor_marginals_recover_factors(p in ns_box(2), q in ns_box(3)) {
        let joint = p.tensor(&q).unwrap();
        prop_assert!(joint.validate().is_valid());
        prop_assert_eq!(joint.marginalize(&[0, 1], Discard::Average).unwrap(), p);
        prop_assert_eq!(joint.marginalize(&[2, 3, 4], Discard::Average).unwrap(), q);
    }

    #[test]
    fn correlators_factor_over_tensor(p in ns_box(2), q in ns_box(2), x in 0u32..4, y in 0u32..4) {
        let joint = p.tensor(&q).unwrap();
        prop_assert_eq!(correlator(&joint, x | (y << 2)), correlator(&p, x) * correlator(&q, y));
    }

    #[test]
    fn gsi_is_linear(p in ns_box(3), q in ns_box(3), w in 0i64..=10) {
        let w = Scalar::ratio(w, 10);
        let mixed = BoxTable::mix(&[(w.clone(), p.clone()), (Scalar::one() - &w, q.clone())]).unwrap();
        let gsi = BellFunctional::gsi(3);
        let lhs = gsi.evaluate(&mixed).unwrap();
        let rhs = &w * gsi.evaluate(&p).unwrap() + (Scalar::one() - &w) * gsi.evaluate(&q).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gsi_respects_bounds(p in ns_box(3)) {
        let v = classify(&p).gsi_value;
        prop_assert!(v.abs() <= Scalar::from_integer(8));
    }

    #[test]
    fn gsi_invariant_under_party_permutation(p in ns_box(4), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        let permuted = p.permute(&perm).unwrap();
        prop_assert_eq!(classify(&permuted).gsi_value, classify(&p).gsi_value);
    }

    #[test]
    fn chsh_equals_four_ch_minus_two(p in ns_box(2)) {
        let chsh = classify(&p).gsi_value;
        let ch = ch_evaluate(&p).unwrap();
        prop_assert_eq!(chsh, Scalar::from_integer(4) * ch - Scalar::from_integer(2));
    }

    #[test]
    fn merging_parties_keeps_validity(p in ns_box(3), i in 0usize..3, j in 0usize..3) {
        prop_assume!(i != j);
        let merged = p.merge_parties(i, j).unwrap();
        prop_assert_eq!(merged.parties(), 2);
        prop_assert!(merged.validate().is_valid());
    }
}
