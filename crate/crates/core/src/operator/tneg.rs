//! The nonzero rows of the negative part, symbolically.
//!
//! Two families: the clause-A endpoints `i = v_m + r a_n` (with `m = n - r`)
//! contribute `eps2(m)` at row `1 + v_m`, and the clause-C endpoints
//! `i = n a_n + r b_n` contribute `b_n n^{-1} 2^{(1 + n a_n - b_n/2)/sqrt(b_n)}`
//! at row `n a_n + (r-1) b_n + 1`. These forms assume the blocks are not
//! packed tightly, see [`GrowthSequence::is_generic`].

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::column::t_column_oracle;
use super::split::modulus_split;
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::growth::GrowthSequence;
use crate::scalars::{compare_scalars, Comparison, ExactScalar, ExactSum, SurdExponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    C,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TnegEntry {
    pub family: Family,
    pub n: usize,
    pub r: usize,
    #[serde(with = "big_string")]
    pub col: BigUint,
    pub value: ExactScalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TnegRow {
    #[serde(with = "big_string")]
    pub row: BigUint,
    pub entries: Vec<TnegEntry>,
    /// `max_k |t-_{row,k}|`.
    pub sup_norm: ExactScalar,
}

mod big_string {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

fn big(x: &BigUint) -> BigInt {
    BigInt::from(x.clone())
}

/// `eps2(m) = (m+1)^{-1-v_m} 2^{(1+v_m-a_{m+1}/2)/sqrt(a_{m+1})} a_m m^{v_m}`,
/// the value carried by every clause-A endpoint with `n - r = m`.
pub fn eps2(d: &GrowthSequence, m: usize) -> ExactScalar {
    let v = d.v(m).expect("level in range");
    let a_next = d.a(m + 1);
    let coeff = BigRational::from_integer(big(&(&v + 1u32))) - BigRational::new(big(&a_next), 2.into());
    let parts = [
        ExactScalar::pow_u(m as u64 + 1, -big(&(&v + 1u32))),
        ExactScalar::pow2(SurdExponent::surd(coeff, &a_next)),
        ExactScalar::from_biguint(&d.a(m)),
        ExactScalar::pow(&BigUint::from(m), &big(&v)),
    ];
    parts.iter().fold(ExactScalar::one(), |acc, x| &acc * x)
}

/// `b_n n^{-1} 2^{(1 + n a_n - b_n/2)/sqrt(b_n)}`, the value at every
/// clause-C endpoint of level `n`.
pub fn c_entry(d: &GrowthSequence, n: usize) -> ExactScalar {
    let (a, b) = (d.a(n), d.b(n));
    let coeff = BigRational::from_integer(big(&(BigUint::from(n) * &a + 1u32))) - BigRational::new(big(&b), 2.into());
    let parts = [
        ExactScalar::from_biguint(&b),
        ExactScalar::pow_u(n as u64, -1),
        ExactScalar::pow2(SurdExponent::surd(coeff, &b)),
    ];
    parts.iter().fold(ExactScalar::one(), |acc, x| &acc * x)
}

fn exact_max(values: &[ExactScalar], max_bits: u32) -> Result<ExactScalar> {
    let mut best = values[0].clone();
    for v in &values[1..] {
        match compare_scalars(v, &best, max_bits) {
            Comparison::Greater => best = v.clone(),
            Comparison::Less | Comparison::Equal => {}
            Comparison::Unknown => {
                return Err(Error::PrecisionCeiling {
                    bits: max_bits,
                    context: "row supremum".into(),
                })
            }
        }
    }
    Ok(best)
}

/// All nonzero rows of the negative part with level `<= n_max`, keyed by row.
pub fn tneg_rows_closed(d: &GrowthSequence, n_max: usize, max_bits: u32) -> Result<BTreeMap<BigUint, TnegRow>> {
    let n_max = n_max.min(d.levels());
    let mut rows: BTreeMap<BigUint, Vec<TnegEntry>> = BTreeMap::new();
    let eps: Vec<ExactScalar> = (0..n_max).map(|m| eps2(d, m)).collect();
    for n in 1..=n_max {
        let (a, b) = (d.a(n), d.b(n));
        for r in 1..=n {
            let m = n - r;
            let v = d.v(m)?;
            rows.entry(&v + 1u32).or_default().push(TnegEntry {
                family: Family::A,
                n,
                r,
                col: &v + BigUint::from(r) * &a,
                value: eps[m].clone(),
            });
        }
        let c = c_entry(d, n);
        for r in 1..=n {
            let na = BigUint::from(n) * &a;
            rows.entry(&na + BigUint::from(r - 1) * &b + 1u32).or_default().push(TnegEntry {
                family: Family::C,
                n,
                r,
                col: na + BigUint::from(r) * &b,
                value: c.clone(),
            });
        }
    }
    rows.into_iter()
        .map(|(row, entries)| {
            let values: Vec<_> = entries.iter().map(|e| e.value.clone()).collect();
            let sup_norm = exact_max(&values, max_bits)?;
            Ok((row.clone(), TnegRow { row, entries, sup_norm }))
        })
        .collect()
}

/// Last indices of the clause intervals that meet `[0, i_max]`, plus 0.
/// Every other column is a positive multiple of `f_{i+1}`.
pub fn endpoint_columns(d: &GrowthSequence, i_max: u64) -> Vec<u64> {
    let mut out = vec![0u64];
    let bound = BigUint::from(i_max);
    for n in 1..=d.levels() {
        let vprev = d.v(n - 1).unwrap();
        if vprev >= bound {
            break;
        }
        let (a, b) = (d.a(n), d.b(n));
        let one = BigUint::one();
        let mut cands: Vec<(BigUint, BigUint)> = Vec::new();
        cands.push((&vprev + 1u32, &a - &one));
        for r in 1..=n {
            let ra = BigUint::from(r) * &a;
            let hi = &ra + d.v(n - r).unwrap();
            cands.push((ra.clone(), hi.clone()));
            if r < n {
                cands.push((&hi + 1u32, &ra + &a - &one));
            }
        }
        let na = BigUint::from(n) * &a;
        let ab = &a + &b;
        for r in 0..=n {
            let rb = BigUint::from(r) * &b;
            if r >= 1 {
                cands.push((BigUint::from(r) * &ab, &na + &rb));
            }
            if r < n {
                cands.push((&na + &rb + 1u32, BigUint::from(r + 1) * &ab - &one));
            }
        }
        for (lo, hi) in cands {
            if lo <= hi && hi <= bound {
                out.push(hi.to_u64().unwrap());
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Negative entries `(row, col) -> value` computed from actual columns at
/// every interval endpoint up to `i_max` (oracle path).
pub fn tneg_from_endpoint_columns(basis: &Basis, i_max: u64, max_bits: u32) -> Result<BTreeMap<(u64, u64), ExactSum>> {
    let cols = endpoint_columns(basis.sequence(), i_max);
    let parts = cols
        .par_iter()
        .map(|&i| {
            let split = modulus_split(&t_column_oracle(basis, i)?, max_bits)?;
            Ok(split.negative.entries.into_iter().map(move |(k, v)| ((k, i), v)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::generate_rapid;
    use crate::scalars::MAX_COMPARE_BITS;

    #[test]
    fn level_one_values_on_the_small_sequence() {
        let d = GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap();
        // eps2(0) = 1^{-1} 2^{(1 - 1)/sqrt 2} a_0 0^0 = 1
        assert!(eps2(&d, 0).value_eq(&ExactScalar::one()));
        // c_1 = 3 * 2^{(1 + 2 - 3/2)/sqrt 3}
        let expect = &ExactScalar::from_int(3)
            * &ExactScalar::pow2(SurdExponent::surd(BigRational::new(3.into(), 2.into()), &BigUint::from(3u32)));
        assert!(c_entry(&d, 1).value_eq(&expect));
        let rows = tneg_rows_closed(&d, 1, MAX_COMPARE_BITS).unwrap();
        let keys: Vec<_> = rows.keys().map(|k| k.to_u64().unwrap()).collect();
        assert_eq!(keys, vec![1, 3]);
    }

    #[test]
    fn endpoints_of_the_small_sequence() {
        let d = GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap();
        assert_eq!(endpoint_columns(&d, 26), vec![0, 1, 2, 4, 5, 11, 12, 19, 25, 26]);
    }

    #[test]
    fn a_rows_collect_one_entry_per_level() {
        let d = generate_rapid(3, None, MAX_COMPARE_BITS).unwrap();
        let rows = tneg_rows_closed(&d, 3, MAX_COMPARE_BITS).unwrap();
        let first = &rows[&BigUint::one()];
        assert_eq!(first.entries.len(), 3);
        assert!(first.entries.iter().all(|e| e.n == e.r));
        assert_eq!(rows.len(), 3 + 6);
    }
}
