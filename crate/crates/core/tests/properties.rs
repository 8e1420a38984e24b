use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;
use readop::basis::{classify, Basis};
use readop::operator::{modulus_split, t_column_closed, t_column_oracle, tneg_rows_closed};
use readop::scalars::{
    canonicalize, compare_scalars, evaluate, evaluate_scalar, sign_of, sum_from_json, sum_to_json, Comparison,
    ExactScalar, ExactSum, Sign, SurdExponent, MAX_COMPARE_BITS,
};
use readop::GrowthSequence;
use rug::Rational;

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (
        prop::sample::select(vec![Sign::Negative, Sign::Positive]),
        prop::collection::vec((2u64..40, -6i64..7), 0..4),
        -8i64..9,
        1i64..5,
        prop::sample::select(vec![2u64, 3, 5, 6, 7]),
    )
        .prop_map(|(sign, bases, p, q, m)| {
            let mut raw = BTreeMap::new();
            for (b, e) in bases {
                *raw.entry(BigUint::from(b)).or_insert_with(BigInt::default) += e;
            }
            let exp = SurdExponent::surd(BigRational::new(p.into(), q.into()), &BigUint::from(m));
            ExactScalar::from_parts(sign, &raw, exp)
        })
}

fn rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..5_000).prop_map(|(p, q)| BigRational::new(p.into(), q.into()))
}

/// Structurally valid, generic two-level sequences.
fn generic_d() -> impl Strategy<Value = GrowthSequence> {
    (2u64..6, 1u64..6, 2u64..6, 2u64..6).prop_map(|(a1, db1, da2, db2)| {
        let b1 = a1 + db1;
        let a2 = a1 + b1 + da2;
        GrowthSequence::from_interleaved(&[a1, b1, a2, a2 + db2]).unwrap()
    })
}

fn to_rug(q: &BigRational) -> Rational {
    Rational::from((q.numer().to_string().parse::<rug::Integer>().unwrap(), q.denom().to_string().parse::<rug::Integer>().unwrap()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_commutative_and_associative(x in scalar(), y in scalar(), z in scalar()) {
        prop_assert!((&x * &y).value_eq(&(&y * &x)));
        prop_assert!((&(&x * &y) * &z).value_eq(&(&x * &(&y * &z))));
        prop_assert!((&x * &x.recip()).value_eq(&ExactScalar::one()));
    }

    #[test]
    fn canonical_form_is_idempotent(x in scalar()) {
        let (bases, _) = canonicalize(x.bases());
        prop_assert_eq!(&bases, x.bases());
        let again = ExactScalar::from_parts(x.sign(), x.bases(), x.exp2().clone());
        prop_assert_eq!(again, x);
    }

    #[test]
    fn rationals_round_trip(q in rational()) {
        let x = ExactScalar::from_rational(&q);
        prop_assert_eq!(x.as_rational(), Some(q));
    }

    #[test]
    fn enclosures_nest_and_contain_rationals(q in rational(), x in scalar()) {
        let iq = evaluate_scalar(&ExactScalar::from_rational(&q), 64);
        let exact = to_rug(&q);
        prop_assert!(*iq.lo() <= exact && *iq.hi() >= exact);
        let coarse = evaluate_scalar(&x, 64);
        let fine = evaluate_scalar(&x, 256);
        prop_assert!(coarse.contains(&fine), "{} does not contain {}", coarse, fine);
    }

    #[test]
    fn sums_commute_and_cancel(x in scalar(), y in scalar(), z in scalar()) {
        let s = ExactSum::from_terms([x.clone(), y.clone()]);
        let t = ExactSum::from_terms([y, x]);
        prop_assert!(s.value_eq(&t));
        prop_assert_eq!(sign_of(&(&s - &t), MAX_COMPARE_BITS), Some(Sign::Zero));
        let u = &s + &ExactSum::from(z);
        let e = evaluate(&u, 128);
        prop_assert!(e.contains(&evaluate(&u, 512)));
    }

    #[test]
    fn comparison_is_antisymmetric(x in scalar(), y in scalar()) {
        let forward = compare_scalars(&x, &y, MAX_COMPARE_BITS);
        let backward = compare_scalars(&y, &x, MAX_COMPARE_BITS);
        let flipped = match forward {
            Comparison::Less => Comparison::Greater,
            Comparison::Greater => Comparison::Less,
            c => c,
        };
        prop_assert_eq!(backward, flipped);
        prop_assert_eq!(compare_scalars(&x, &x, MAX_COMPARE_BITS), Comparison::Equal);
    }

    #[test]
    fn json_round_trip(x in scalar(), y in scalar()) {
        let s = ExactSum::from_terms([x, y]);
        let back = sum_from_json(&sum_to_json(&s)).unwrap();
        prop_assert!(back.value_eq(&s));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_sequences_partition(d in generic_d()) {
        let top = d.max_index().unwrap();
        for i in 1..=top {
            prop_assert!(classify(i, &d).is_ok(), "index {} unclassified", i);
        }
    }

    #[test]
    fn random_sequences_closed_matches_oracle(d in generic_d()) {
        let b = Basis::new(d.clone());
        for i in 0..d.max_index().unwrap() {
            let closed = t_column_closed(&b, i).unwrap();
            prop_assert!(closed.value_eq(&t_column_oracle(&b, i).unwrap()), "column {}", i);
        }
    }

    #[test]
    fn random_generic_sequences_match_the_negative_families(d in generic_d()) {
        prop_assert!(d.is_generic());
        let b = Basis::new(d.clone());
        let top = d.max_index().unwrap() - 1;
        let mut actual = BTreeMap::new();
        for i in 0..=top {
            let s = modulus_split(&t_column_oracle(&b, i).unwrap(), MAX_COMPARE_BITS).unwrap();
            for (k, v) in s.negative.entries {
                actual.insert((k, i), v);
            }
        }
        let mut closed = BTreeMap::new();
        for row in tneg_rows_closed(&d, 2, MAX_COMPARE_BITS).unwrap().values() {
            for e in &row.entries {
                let col = u64::try_from(e.col.clone()).unwrap();
                if col <= top {
                    closed.insert((u64::try_from(row.row.clone()).unwrap(), col), ExactSum::from(e.value.clone()));
                }
            }
        }
        prop_assert_eq!(actual.len(), closed.len());
        for (k, v) in &actual {
            prop_assert!(closed.get(k).is_some_and(|c| c.value_eq(v)), "entry {:?}", k);
        }
    }
}
