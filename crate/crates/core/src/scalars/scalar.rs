use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::coprime::canonicalize;
use super::surd::SurdExponent;

/// Sign of an exact value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn from_i64(s: i64) -> Option<Sign> {
        match s {
            -1 => Some(Sign::Negative),
            0 => Some(Sign::Zero),
            1 => Some(Sign::Positive),
            _ => None,
        }
    }

    fn times(self, other: Sign) -> Sign {
        Sign::from_i64(self.as_i8() as i64 * other.as_i8() as i64).unwrap()
    }

    fn flip(self) -> Sign {
        self.times(Sign::Negative)
    }
}

/// `sign * prod p^{n_p} * 2^{exponent}` with a pairwise coprime base set.
///
/// The power of two is kept entirely in the surd exponent so that integer
/// and surd contributions of base 2 share one slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactScalar {
    sign: Sign,
    bases: BTreeMap<BigUint, BigInt>,
    exp2: SurdExponent,
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self {
            sign: Sign::Zero,
            bases: BTreeMap::new(),
            exp2: SurdExponent::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            sign: Sign::Positive,
            ..Self::zero()
        }
    }

    /// Builds from raw parts, canonicalizing the base map. Zero sign discards
    /// everything else.
    pub fn from_parts(sign: Sign, raw_bases: &BTreeMap<BigUint, BigInt>, exp2: SurdExponent) -> Self {
        if sign == Sign::Zero {
            return Self::zero();
        }
        let filtered: BTreeMap<BigUint, BigInt> = raw_bases
            .iter()
            .filter(|(b, e)| !b.is_one() && !e.is_zero())
            .map(|(b, e)| (b.clone(), e.clone()))
            .collect();
        assert!(
            !filtered.keys().any(|b| b.is_zero()),
            "zero base in a nonzero scalar"
        );
        let (bases, pow2) = canonicalize(&filtered);
        let exp2 = if pow2.is_zero() {
            exp2
        } else {
            &exp2 + &SurdExponent::integer(pow2)
        };
        Self { sign, bases, exp2 }
    }

    /// `base^exp`, with the convention `x^0 = 1` for every `x` including 0.
    pub fn pow(base: &BigUint, exp: &BigInt) -> Self {
        if exp.is_zero() || base.is_one() {
            return Self::one();
        }
        if base.is_zero() {
            assert!(exp.is_positive(), "0 raised to a negative power");
            return Self::zero();
        }
        let mut raw = BTreeMap::new();
        raw.insert(base.clone(), exp.clone());
        Self::from_parts(Sign::Positive, &raw, SurdExponent::zero())
    }

    pub fn pow_u(base: u64, exp: impl Into<BigInt>) -> Self {
        Self::pow(&BigUint::from(base), &exp.into())
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        Self::pow(x, &BigInt::one())
    }

    pub fn from_int(x: i64) -> Self {
        let s = Self::from_biguint(&BigUint::from(x.unsigned_abs()));
        if x < 0 {
            -&s
        } else {
            s
        }
    }

    pub fn from_rational(q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        let mut raw = BTreeMap::new();
        let num = q.numer().magnitude().clone();
        let den = q.denom().magnitude().clone();
        if !num.is_one() {
            raw.insert(num, BigInt::one());
        }
        if !den.is_one() {
            *raw.entry(den).or_insert_with(BigInt::zero) -= 1;
        }
        let sign = if q.is_negative() {
            Sign::Negative
        } else {
            Sign::Positive
        };
        Self::from_parts(sign, &raw, SurdExponent::zero())
    }

    /// `2^exponent`.
    pub fn pow2(exponent: SurdExponent) -> Self {
        Self {
            sign: Sign::Positive,
            bases: BTreeMap::new(),
            exp2: exponent,
        }
    }

    /// `self^k` for an integer `k`.
    pub fn powi(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::one();
        }
        if self.is_zero() {
            assert!(k.is_positive(), "0 raised to a negative power");
            return Self::zero();
        }
        let sign = if self.sign == Sign::Negative && k.is_odd() {
            Sign::Negative
        } else {
            Sign::Positive
        };
        Self {
            sign,
            bases: self.bases.iter().map(|(b, e)| (b.clone(), e * k)).collect(),
            exp2: self.exp2.scale(&BigRational::from_integer(k.clone())),
        }
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == Sign::Zero
    }

    pub fn is_positive(&self) -> bool {
        self.sign == Sign::Positive
    }

    pub fn is_negative(&self) -> bool {
        self.sign == Sign::Negative
    }

    pub fn bases(&self) -> &BTreeMap<BigUint, BigInt> {
        &self.bases
    }

    pub fn exp2(&self) -> &SurdExponent {
        &self.exp2
    }

    pub fn abs(&self) -> Self {
        if self.sign == Sign::Negative {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Self {
            sign: self.sign,
            bases: self.bases.iter().map(|(b, e)| (b.clone(), -e)).collect(),
            exp2: -&self.exp2,
        }
    }

    /// Exact value when it is rational (no surd terms, integral power of two).
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.exp2.is_integer() {
            return None;
        }
        let mut num = BigUint::one();
        let mut den = BigUint::one();
        for (b, e) in &self.bases {
            let k = e.abs().to_usize()?;
            if e.is_positive() {
                num *= num_traits::pow(b.clone(), k);
            } else {
                den *= num_traits::pow(b.clone(), k);
            }
        }
        let p2 = self.exp2.rational_part().to_integer();
        let shift = p2.abs().to_usize()?;
        if p2.is_positive() {
            num <<= shift;
        } else {
            den <<= shift;
        }
        let s = match self.sign {
            Sign::Negative => BigSign::Minus,
            Sign::Zero => return Some(BigRational::zero()),
            Sign::Positive => BigSign::Plus,
        };
        Some(BigRational::new(BigInt::from_biguint(s, num), BigInt::from(den)))
    }

    /// Approximate bit size of the rational part `prod p^{n_p} * 2^{floor q0}`.
    pub(crate) fn rational_bits(&self) -> f64 {
        let mut bits = 0.0;
        for (b, e) in &self.bases {
            bits += e.to_f64().unwrap_or(f64::INFINITY).abs() * (b.bits() as f64);
        }
        bits + self.exp2.rational_part().to_f64().unwrap_or(f64::INFINITY).abs()
    }

    /// Exact test for equal absolute values.
    pub fn same_magnitude(&self, other: &Self) -> bool {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return true,
            (true, false) | (false, true) => return false,
            _ => {}
        }
        if self.bases == other.bases && self.exp2 == other.exp2 {
            return true;
        }
        let q = self.abs().div(&other.abs());
        q.bases.is_empty() && q.exp2.is_zero()
    }

    /// Exact equality of values.
    pub fn value_eq(&self, other: &Self) -> bool {
        self.sign == other.sign && self.same_magnitude(other)
    }

    /// `self / other` is rational.
    pub(crate) fn commensurable(&self, other: &Self) -> bool {
        let d = &self.exp2 - &other.exp2;
        d.is_integer()
    }

    /// Keys of the surd part (all surds are exponents of 2).
    pub fn surd_keys(&self) -> impl Iterator<Item = &BigUint> {
        self.exp2.terms().keys()
    }
}

impl Mul for &ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        let sign = self.sign.times(rhs.sign);
        if sign == Sign::Zero {
            return ExactScalar::zero();
        }
        let exp2 = &self.exp2 + &rhs.exp2;
        if self.bases.is_empty() || rhs.bases.is_empty() {
            let bases = if self.bases.is_empty() {
                rhs.bases.clone()
            } else {
                self.bases.clone()
            };
            return ExactScalar { sign, bases, exp2 };
        }
        let mut raw = self.bases.clone();
        for (b, e) in &rhs.bases {
            *raw.entry(b.clone()).or_insert_with(BigInt::zero) += e;
        }
        ExactScalar::from_parts(sign, &raw, exp2)
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;
    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Div for &ExactScalar {
    type Output = ExactScalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        self * &rhs.recip()
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar {
            sign: self.sign.flip(),
            bases: self.bases.clone(),
            exp2: self.exp2.clone(),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -&self
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Zero => return write!(f, "0"),
            Sign::Negative => write!(f, "-")?,
            Sign::Positive => {}
        }
        let mut parts: Vec<String> = self
            .bases
            .iter()
            .map(|(b, e)| if e.is_one() { b.to_string() } else { format!("{b}^({e})") })
            .collect();
        if !self.exp2.is_zero() {
            parts.push(format!("2^({})", self.exp2));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}
