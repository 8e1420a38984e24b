use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, ChainExpansion, Tag};
use crate::error::{Error, Result};
use crate::scalars::{ExactScalar, ExactSum, SurdExponent};

/// `T f_i = sum_k entries[k] f_k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseColumn {
    pub i: u64,
    pub entries: BTreeMap<u64, ExactSum>,
}

impl SparseColumn {
    pub fn new(i: u64, mut entries: BTreeMap<u64, ExactSum>) -> Self {
        entries.retain(|_, v| !v.is_zero());
        Self { i, entries }
    }

    pub fn get(&self, row: u64) -> Option<&ExactSum> {
        self.entries.get(&row)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_row(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// Same support and exactly equal values.
    pub fn value_eq(&self, other: &SparseColumn) -> bool {
        self.i == other.i
            && self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((r1, v1), (r2, v2))| r1 == r2 && v1.value_eq(v2))
    }

    /// Rows `<= n` only.
    pub fn truncated(&self, n: u64) -> SparseColumn {
        SparseColumn {
            i: self.i,
            entries: self.entries.range(..=n).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }
}

fn check_range(basis: &Basis, i: u64) -> Result<()> {
    let limit = basis.sequence().max_index().unwrap_or(u64::MAX);
    if i >= limit {
        return Err(Error::OutOfRange { index: i, limit });
    }
    Ok(())
}

fn add_scaled(acc: &mut BTreeMap<u64, ExactSum>, coeff: &ExactScalar, e: &BTreeMap<u64, ExactScalar>) {
    for (k, c) in e {
        let slot = acc.entry(*k).or_default();
        *slot = &*slot + &ExactSum::from(coeff * c);
    }
}

/// `T f_i` from the definition `T e_k = e_{k+1}` and the general inversion of
/// the clause relation. This path has no case analysis.
pub fn t_column_oracle(basis: &Basis, i: u64) -> Result<SparseColumn> {
    check_range(basis, i)?;
    let row = basis.lambda_row(i)?;
    let mut acc = BTreeMap::new();
    let e: std::sync::Arc<ChainExpansion> = basis.e_in_f(i + 1)?;
    add_scaled(&mut acc, &row.diag, &e.coeffs);
    if let Some((j, c)) = &row.off {
        add_scaled(&mut acc, c, &basis.e_in_f(j + 1)?.coeffs);
    }
    Ok(SparseColumn::new(i, acc))
}

fn int(x: impl Into<BigInt>) -> BigInt {
    x.into()
}

/// Closed form of `e_k` over the `f` basis, written clause by clause:
/// clause A inverts to `e_k = n^{-r a}((n-r)^{-s} a_{n-r}^{-1} f_k + e_s)`,
/// clause C unrolls `r` steps to
/// `e_k = n^{-k} sum_{t<r} b^t f_{k-tb} + b^r n^{-rb} e_{k-rb}`.
pub fn e_closed(basis: &Basis, k: u64) -> Result<BTreeMap<u64, ExactScalar>> {
    let d = basis.sequence();
    let class = basis.classify(k)?;
    let mut out = BTreeMap::new();
    match class.tag {
        Tag::Zero => {
            out.insert(0, ExactScalar::one());
        }
        Tag::B | Tag::D => {
            let (n, h) = (class.n, class.h.clone().unwrap());
            let x = if class.tag == Tag::B { d.a(n) } else { d.b(n) };
            let shift = BigRational::from_integer(int(k)) - h;
            let inv = &ExactScalar::pow_u(n as u64, -int(k))
                * &ExactScalar::pow2(SurdExponent::surd(shift, &x));
            out.insert(k, inv);
        }
        Tag::A => {
            let (n, r) = (class.n, class.r);
            let ra = BigUint::from(r) * d.a(n);
            let s = k - ra.to_u64().expect("index fits");
            let scale = ExactScalar::pow_u(n as u64, -BigInt::from(ra));
            let lead = (&ExactScalar::pow_u((n - r) as u64, int(s)) * &ExactScalar::from_biguint(&d.a(n - r))).recip();
            out.insert(k, &scale * &lead);
            for (j, c) in e_closed(basis, s)? {
                out.insert(j, &scale * &c);
            }
        }
        Tag::C => {
            let (n, r) = (class.n, class.r);
            let b = d.b(n);
            let bu = b.to_u64().expect("index fits");
            let nk = ExactScalar::pow_u(n as u64, -int(k));
            let bs = ExactScalar::from_biguint(&b);
            for t in 0..r as u64 {
                out.insert(k - t * bu, &nk * &bs.powi(&int(t)));
            }
            let rest = k - r as u64 * bu;
            let tail = &bs.powi(&int(r)) * &ExactScalar::pow_u(n as u64, -(int(r) * BigInt::from(b)));
            for (j, c) in e_closed(basis, rest)? {
                let prev = out.insert(j, &tail * &c);
                assert!(prev.is_none(), "overlapping supports in the clause-C identity");
            }
        }
    }
    Ok(out)
}

/// `T f_i` from the interior shortcuts of each clause and, at interval
/// endpoints, the closed `e`-expansions of [`e_closed`].
pub fn t_column_closed(basis: &Basis, i: u64) -> Result<SparseColumn> {
    check_range(basis, i)?;
    let d = basis.sequence();
    let class = basis.classify(i)?;
    let single = |v: ExactScalar| {
        let mut m = BTreeMap::new();
        m.insert(i + 1, ExactSum::from(v));
        Ok(SparseColumn::new(i, m))
    };
    let (n, r) = (class.n, class.r);
    let big_i = BigUint::from(i);
    let unit = |x: &BigUint| {
        &ExactScalar::pow_u(n as u64, -1) * &ExactScalar::pow2(SurdExponent::surd(BigRational::one(), x))
    };
    match class.tag {
        Tag::Zero => {}
        Tag::A => {
            let s = &big_i - BigUint::from(r) * d.a(n);
            if s < d.v(n - r)? {
                return single(ExactScalar::pow_u((n - r) as u64, -1));
            }
        }
        Tag::B => {
            let end = BigUint::from(r + 1) * d.a(n);
            if &big_i + 1u32 < end {
                return single(unit(&d.a(n)));
            }
        }
        Tag::C => {
            if big_i < BigUint::from(n) * d.a(n) + BigUint::from(r) * d.b(n) {
                return single(ExactScalar::pow_u(n as u64, -1));
            }
        }
        Tag::D => {
            let end = BigUint::from(r + 1) * (d.a(n) + d.b(n));
            if &big_i + 1u32 < end {
                return single(unit(&d.b(n)));
            }
        }
    }
    let row = basis.lambda_row(i)?;
    let mut acc = BTreeMap::new();
    add_scaled(&mut acc, &row.diag, &e_closed(basis, i + 1)?);
    if let Some((j, c)) = &row.off {
        add_scaled(&mut acc, c, &e_closed(basis, j + 1)?);
    }
    Ok(SparseColumn::new(i, acc))
}
