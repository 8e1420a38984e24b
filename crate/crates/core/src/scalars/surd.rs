use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::coprime::joint_factor;

/// Exponent `q0 + sum_m q_m / sqrt(m)` of a power of two.
///
/// Keys are reduced against a joint coprime basis, so the surds `1/sqrt(m)`
/// that remain after [`SurdExponent::canonical`] are linearly independent over
/// the rationals together with `1`. Componentwise comparison of a canonical
/// difference is therefore an exact zero test.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurdExponent {
    rational: BigRational,
    terms: BTreeMap<BigUint, BigRational>,
}

impl SurdExponent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn rational(q: BigRational) -> Self {
        Self {
            rational: q,
            terms: BTreeMap::new(),
        }
    }

    pub fn integer(k: impl Into<BigInt>) -> Self {
        Self::rational(BigRational::from_integer(k.into()))
    }

    /// `coeff / sqrt(m)`.
    pub fn surd(coeff: BigRational, m: &BigUint) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() && !m.is_zero() {
            terms.insert(m.clone(), coeff);
        }
        Self::from_parts(BigRational::zero(), terms)
    }

    /// Builds and canonicalizes from a rational part and raw surd terms.
    pub fn from_parts(rational: BigRational, terms: BTreeMap<BigUint, BigRational>) -> Self {
        Self { rational, terms }.canonical()
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn terms(&self) -> &BTreeMap<BigUint, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.terms.is_empty()
    }

    pub fn is_rational(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when `2^self` is an integer power of two.
    pub fn is_integer(&self) -> bool {
        self.terms.is_empty() && self.rational.is_integer()
    }

    /// `k * self` for a rational `k`; keys are unchanged, so the canonical
    /// form is preserved.
    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self {
            rational: &self.rational * k,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Reduces keys over a joint coprime basis: square factors move into the
    /// coefficient, perfect squares fold into the rational part, equal keys
    /// merge and zero coefficients vanish.
    fn canonical(self) -> Self {
        let keys: Vec<&BigUint> = self.terms.keys().collect();
        if keys.is_empty() {
            return self;
        }
        let facts = joint_factor(&keys);
        let mut rational = self.rational.clone();
        let mut terms: BTreeMap<BigUint, BigRational> = BTreeMap::new();
        for (fact, coeff) in facts.iter().zip(self.terms.values()) {
            let mut key = BigUint::one();
            let mut outside = BigUint::one();
            for (p, k) in &fact.factors {
                outside *= num_traits::pow(p.clone(), (k / 2) as usize);
                if k % 2 == 1 {
                    key *= p;
                }
            }
            let c = coeff / BigRational::from_integer(BigInt::from(outside));
            if key.is_one() {
                rational += c;
            } else {
                *terms.entry(key).or_insert_with(BigRational::zero) += c;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self { rational, terms }
    }

    /// Exact test for `self == other` as real numbers.
    pub fn value_eq(&self, other: &Self) -> bool {
        self == other || (self - other).is_zero()
    }
}

impl Add for &SurdExponent {
    type Output = SurdExponent;
    fn add(self, rhs: &SurdExponent) -> SurdExponent {
        let mut terms = self.terms.clone();
        for (k, c) in &rhs.terms {
            *terms.entry(k.clone()).or_insert_with(BigRational::zero) += c;
        }
        let rational = &self.rational + &rhs.rational;
        // fast path when no new keys appeared
        if self.terms.is_empty() || rhs.terms.is_empty() || self.terms.keys().eq(rhs.terms.keys()) {
            terms.retain(|_, c| !c.is_zero());
            return SurdExponent { rational, terms };
        }
        SurdExponent::from_parts(rational, terms)
    }
}

impl Neg for &SurdExponent {
    type Output = SurdExponent;
    fn neg(self) -> SurdExponent {
        SurdExponent {
            rational: -&self.rational,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl Sub for &SurdExponent {
    type Output = SurdExponent;
    fn sub(self, rhs: &SurdExponent) -> SurdExponent {
        self + &(-rhs)
    }
}

impl fmt::Display for SurdExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.rational.is_zero() || self.terms.is_empty() {
            write!(f, "{}", self.rational)?;
            first = false;
        }
        for (m, c) in &self.terms {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            write!(f, "{}/sqrt({m})", c.abs())?;
            first = false;
        }
        Ok(())
    }
}
