use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::Zero;

use super::scalar::{ExactScalar, Sign};

/// Largest rational bit size we are willing to materialize when merging
/// commensurable terms.
const MERGE_BIT_BUDGET: f64 = (1u64 << 18) as f64;

/// A finite sum of [`ExactScalar`] terms.
///
/// Terms whose ratio is rational are merged by exact rational arithmetic
/// (cancellation included); what remains is sorted into a deterministic
/// order. The empty sum is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactSum {
    terms: Vec<ExactScalar>,
}

impl ExactSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ExactScalar>) -> Self {
        Self {
            terms: normalize(terms.into_iter().collect()),
        }
    }

    pub fn terms(&self) -> &[ExactScalar] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn single(&self) -> Option<&ExactScalar> {
        match self.terms.as_slice() {
            [t] => Some(t),
            _ => None,
        }
    }

    /// Sign when all terms agree; `None` for mixed signs.
    pub fn structural_sign(&self) -> Option<Sign> {
        let first = match self.terms.first() {
            None => return Some(Sign::Zero),
            Some(t) => t.sign(),
        };
        self.terms.iter().all(|t| t.sign() == first).then_some(first)
    }

    pub fn scale(&self, k: &ExactScalar) -> Self {
        Self::from_terms(self.terms.iter().map(|t| t * k))
    }

    pub fn push(&mut self, t: ExactScalar) {
        if t.is_zero() {
            return;
        }
        let mut all = std::mem::take(&mut self.terms);
        all.push(t);
        self.terms = normalize(all);
    }

    /// Exact equality of values.
    pub fn value_eq(&self, other: &Self) -> bool {
        self == other || (self - other).is_zero()
    }
}

impl From<ExactScalar> for ExactSum {
    fn from(t: ExactScalar) -> Self {
        Self::from_terms([t])
    }
}

fn normalize(terms: Vec<ExactScalar>) -> Vec<ExactScalar> {
    let mut groups: Vec<Vec<ExactScalar>> = Vec::new();
    for t in terms.into_iter().filter(|t| !t.is_zero()) {
        match groups.iter_mut().find(|g| g[0].commensurable(&t)) {
            Some(g) => g.push(t),
            None => groups.push(vec![t]),
        }
    }
    let mut out = Vec::new();
    for g in groups {
        if g.len() == 1 {
            out.extend(g);
            continue;
        }
        out.extend(merge_group(g));
    }
    out.sort();
    out
}

/// Sums terms that are rational multiples of each other.
fn merge_group(group: Vec<ExactScalar>) -> Vec<ExactScalar> {
    let reference = group[0].abs();
    let mut total = BigRational::zero();
    for t in &group {
        let ratio = t / &reference;
        if ratio.rational_bits() > MERGE_BIT_BUDGET {
            return fallback_merge(group);
        }
        match ratio.as_rational() {
            Some(q) => total += q,
            None => return fallback_merge(group),
        }
    }
    if total.is_zero() {
        return Vec::new();
    }
    vec![&ExactScalar::from_rational(&total) * &reference]
}

/// Pairwise cancellation of exactly opposite terms when the rational
/// coefficients are too large to materialize.
fn fallback_merge(group: Vec<ExactScalar>) -> Vec<ExactScalar> {
    let mut out: Vec<ExactScalar> = Vec::new();
    for t in group {
        if let Some(pos) = out.iter().position(|u| u.same_magnitude(&t) && u.sign() != t.sign()) {
            out.swap_remove(pos);
        } else {
            out.push(t);
        }
    }
    out
}

impl Add for &ExactSum {
    type Output = ExactSum;
    fn add(self, rhs: &ExactSum) -> ExactSum {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        ExactSum::from_terms(self.terms.iter().chain(rhs.terms.iter()).cloned())
    }
}

impl Add for ExactSum {
    type Output = ExactSum;
    fn add(self, rhs: ExactSum) -> ExactSum {
        &self + &rhs
    }
}

impl Neg for &ExactSum {
    type Output = ExactSum;
    fn neg(self) -> ExactSum {
        let mut terms: Vec<ExactScalar> = self.terms.iter().map(|t| -t).collect();
        terms.sort();
        ExactSum { terms }
    }
}

impl Neg for ExactSum {
    type Output = ExactSum;
    fn neg(self) -> ExactSum {
        -&self
    }
}

impl Sub for &ExactSum {
    type Output = ExactSum;
    fn sub(self, rhs: &ExactSum) -> ExactSum {
        self + &(-rhs)
    }
}

impl Mul<&ExactScalar> for &ExactSum {
    type Output = ExactSum;
    fn mul(self, rhs: &ExactScalar) -> ExactSum {
        self.scale(rhs)
    }
}

impl fmt::Display for ExactSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::SurdExponent;
    use num_bigint::BigUint;

    fn surd(n: i64, d: i64, m: u32) -> ExactScalar {
        ExactScalar::pow2(SurdExponent::surd(
            BigRational::new(n.into(), d.into()),
            &BigUint::from(m),
        ))
    }

    #[test]
    fn cancellation() {
        let x = ExactSum::from(surd(1, 2, 3));
        assert!((&x - &x).is_zero());
        assert_eq!(&x + &ExactSum::zero(), x);
    }

    #[test]
    fn commensurable_terms_merge() {
        let s = surd(1, 1, 5);
        let sum = ExactSum::from_terms([
            &ExactScalar::from_int(3) * &s,
            &ExactScalar::from_int(-2) * &s,
        ]);
        assert_eq!(sum.single(), Some(&s));
        // 1/64 + 1/32 = 3/64
        let r = ExactSum::from_terms([ExactScalar::pow_u(2, -6), ExactScalar::pow_u(2, -5)]);
        assert!(r.single().unwrap().value_eq(&ExactScalar::from_rational(&BigRational::new(3.into(), 64.into()))));
    }

    #[test]
    fn unlike_terms_stay_apart() {
        let a = surd(1, 1, 2);
        let b = surd(1, 1, 3);
        let ab = ExactSum::from_terms([a.clone(), b.clone()]);
        let ba = ExactSum::from_terms([b, a]);
        assert_eq!(ab.terms().len(), 2);
        assert_eq!(ab, ba);
        assert_eq!(ab.structural_sign(), Some(Sign::Positive));
    }
}
