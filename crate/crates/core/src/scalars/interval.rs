//! Certified enclosures of exact values.
//!
//! Every scalar is evaluated in the log domain: `log2|t| = sum n_p log2 p +
//! q0 + sum q_m / sqrt m`, each piece rounded outward with MPFR's directed
//! rounding, and only then exponentiated. Signs of mixed sums are decided by
//! scaling every term against the largest one, so values far outside the
//! hardware float range still compare correctly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::scalar::{ExactScalar, Sign};
use super::sum::ExactSum;

/// Starting precision for comparisons.
pub const START_COMPARE_BITS: u32 = 64;
/// Precision ceiling for comparisons before giving up with `Unknown`.
pub const MAX_COMPARE_BITS: u32 = 4096;
/// Default precision for evaluating entries into floats.
pub const DEFAULT_EVAL_BITS: u32 = 128;

/// Working precision added on top of the requested one in [`evaluate`].
const GUARD_BITS: u32 = 32;
/// Largest exponent spread for which dyadic sums are evaluated exactly.
const EXACT_DYADIC_SPREAD: i64 = 1 << 16;

/// Closed interval `[lo, hi]` with binary floating-point endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: Float) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::point(Float::new(prec))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn precision(&self) -> u32 {
        self.lo.prec().min(self.hi.prec())
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn width(&self) -> Float {
        let prec = self.lo.prec().max(self.hi.prec());
        Float::with_val_round(prec, &self.hi - &self.lo, Round::Up).0
    }

    /// Outward-rounded sum.
    pub fn add(&self, other: &Interval) -> Interval {
        let prec = self.precision().max(other.precision());
        Interval {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        let prec = self.lo.prec().max(self.hi.prec()) + 1;
        let mid = Float::with_val(prec, &self.lo + &self.hi) / 2u32;
        mid.to_f64()
    }

    /// True when every point of the interval is strictly below `bound`.
    pub fn certainly_below(&self, bound: &Float) -> bool {
        self.hi < *bound
    }

    pub fn certainly_above(&self, bound: &Float) -> bool {
        self.lo > *bound
    }

    /// Decimal rendering of the endpoints, rounded outward.
    pub fn to_decimal_strings(&self) -> (String, String) {
        let digits = decimal_digits(self.precision());
        (
            self.lo.to_string_radix_round(10, Some(digits), Round::Down),
            self.hi.to_string_radix_round(10, Some(digits), Round::Up),
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal_strings();
        write!(f, "[{lo}, {hi}]")
    }
}

fn decimal_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// Decimal endpoints for reading, rounded outward, and exact hexadecimal
/// endpoints for reloading.
#[derive(Serialize, Deserialize)]
struct IntervalJson {
    lo: String,
    hi: String,
    precision: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<[String; 2]>,
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let (lo, hi) = self.to_decimal_strings();
        IntervalJson {
            lo,
            hi,
            precision: self.lo.prec().max(self.hi.prec()),
            exact: Some([self.lo.to_string_radix(16, None), self.hi.to_string_radix(16, None)]),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = IntervalJson::deserialize(d)?;
        let parse = |s: &str, round| {
            Float::parse(s)
                .map(|p| Float::with_val_round(raw.precision, p, round).0)
                .map_err(|e| D::Error::custom(format!("bad float {s:?}: {e}")))
        };
        let (lo, hi) = match &raw.exact {
            Some([lo, hi]) => {
                let hex = |s: &str| {
                    Float::parse_radix(s, 16)
                        .map(|p| Float::with_val(raw.precision, p))
                        .map_err(|e| D::Error::custom(format!("bad float {s:?}: {e}")))
                };
                (hex(lo)?, hex(hi)?)
            }
            None => (parse(&raw.lo, Round::Down)?, parse(&raw.hi, Round::Up)?),
        };
        if lo > hi {
            return Err(D::Error::custom("inverted interval"));
        }
        Ok(Interval { lo, hi })
    }
}

/// Outcome of an exact comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparison {
    Less,
    Equal,
    Greater,
    Unknown,
}

impl Comparison {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Equal => Comparison::Equal,
            Ordering::Greater => Comparison::Greater,
        }
    }

    /// `Some(true)` when `x <= y` is certain, `Some(false)` when `x > y` is.
    pub fn is_le(self) -> Option<bool> {
        match self {
            Comparison::Less | Comparison::Equal => Some(true),
            Comparison::Greater => Some(false),
            Comparison::Unknown => None,
        }
    }
}

fn to_rug_uint(x: &BigUint) -> Integer {
    Integer::from_digits(&x.to_u64_digits(), rug::integer::Order::Lsf)
}

fn to_rug_int(x: &BigInt) -> Integer {
    let m = to_rug_uint(x.magnitude());
    if x.is_negative() {
        -m
    } else {
        m
    }
}

fn to_rug_rat(q: &BigRational) -> Rational {
    Rational::from((to_rug_int(q.numer()), to_rug_int(q.denom())))
}

fn rnd(prec: u32, x: &Integer, round: Round) -> Float {
    Float::with_val_round(prec, x, round).0
}

fn mul(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    Float::with_val_round(prec, a * b, round).0
}

fn add(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    Float::with_val_round(prec, a + b, round).0
}

fn sub(prec: u32, a: &Float, b: &Float, round: Round) -> Float {
    Float::with_val_round(prec, a - b, round).0
}

fn exp2(prec: u32, x: &Float, round: Round) -> Float {
    let mut y = Float::with_val(prec.max(x.prec()), x);
    y.exp2_round(round);
    if y.prec() != prec {
        y.set_prec_round(prec, round);
    }
    y
}

/// Enclosure `[lo, hi]` of `log2 |t|` for a nonzero scalar.
pub fn log2_bounds(t: &ExactScalar, prec: u32) -> (Float, Float) {
    assert!(!t.is_zero(), "log2 of zero");
    let mut lo = Float::new(prec);
    let mut hi = Float::new(prec);
    for (p, n) in t.bases() {
        let pi = to_rug_uint(p);
        let mut lp_lo = rnd(prec, &pi, Round::Down);
        lp_lo.log2_round(Round::Down);
        let mut lp_hi = rnd(prec, &pi, Round::Up);
        lp_hi.log2_round(Round::Up);
        let ni = to_rug_int(n);
        let n_lo = rnd(prec, &ni, Round::Down);
        let n_hi = rnd(prec, &ni, Round::Up);
        let (t_lo, t_hi) = if n.is_positive() {
            (mul(prec, &n_lo, &lp_lo, Round::Down), mul(prec, &n_hi, &lp_hi, Round::Up))
        } else {
            (mul(prec, &n_lo, &lp_hi, Round::Down), mul(prec, &n_hi, &lp_lo, Round::Up))
        };
        lo = add(prec, &lo, &t_lo, Round::Down);
        hi = add(prec, &hi, &t_hi, Round::Up);
    }
    let exp = t.exp2();
    if !exp.rational_part().is_zero() {
        let q = to_rug_rat(exp.rational_part());
        lo = add(prec, &lo, &Float::with_val_round(prec, &q, Round::Down).0, Round::Down);
        hi = add(prec, &hi, &Float::with_val_round(prec, &q, Round::Up).0, Round::Up);
    }
    for (m, c) in exp.terms() {
        let mi = to_rug_uint(m);
        let mut s_lo = rnd(prec, &mi, Round::Down);
        s_lo.sqrt_round(Round::Down);
        let mut s_hi = rnd(prec, &mi, Round::Up);
        s_hi.sqrt_round(Round::Up);
        let mut inv_lo = s_hi;
        inv_lo.recip_round(Round::Down);
        let mut inv_hi = s_lo;
        inv_hi.recip_round(Round::Up);
        let q = to_rug_rat(c);
        let q_lo = Float::with_val_round(prec, &q, Round::Down).0;
        let q_hi = Float::with_val_round(prec, &q, Round::Up).0;
        let (t_lo, t_hi) = if c.is_positive() {
            (mul(prec, &q_lo, &inv_lo, Round::Down), mul(prec, &q_hi, &inv_hi, Round::Up))
        } else {
            (mul(prec, &q_lo, &inv_hi, Round::Down), mul(prec, &q_hi, &inv_lo, Round::Up))
        };
        lo = add(prec, &lo, &t_lo, Round::Down);
        hi = add(prec, &hi, &t_hi, Round::Up);
    }
    (lo, hi)
}

fn is_dyadic(t: &ExactScalar) -> bool {
    t.bases().is_empty() && t.exp2().is_integer()
}

fn dyadic_exponent(t: &ExactScalar) -> Option<i64> {
    t.exp2().rational_part().to_integer().to_i64()
}

/// Exact sum of signed powers of two, when the exponent spread is modest.
fn exact_dyadic_sum(terms: &[ExactScalar]) -> Option<Float> {
    let exps: Vec<i64> = terms.iter().map(dyadic_exponent).collect::<Option<_>>()?;
    let (min, max) = (*exps.iter().min()?, *exps.iter().max()?);
    if max - min > EXACT_DYADIC_SPREAD || max.abs() > (1 << 29) || min.abs() > (1 << 29) {
        return None;
    }
    let prec = (max - min) as u32 + 2 + 64 - (terms.len() as u64).leading_zeros();
    let mut acc = Float::new(prec);
    for (t, e) in terms.iter().zip(&exps) {
        let mut p = Float::with_val(prec, 1u32);
        p <<= *e as i32;
        if t.is_negative() {
            acc -= p;
        } else {
            acc += p;
        }
    }
    Some(acc)
}

/// Certified enclosure of the value of `x`.
///
/// Nested in `precision`: the enclosure at `2p` lies inside the one at `p`.
/// Exactly dyadic sums come back as point intervals.
pub fn evaluate(x: &ExactSum, precision: u32) -> Interval {
    assert!(precision >= 16, "precision below 16 bits");
    let terms = x.terms();
    if terms.is_empty() {
        return Interval::zero(precision);
    }
    if terms.iter().all(is_dyadic) {
        if let Some(v) = exact_dyadic_sum(terms) {
            return Interval::point(v);
        }
    }
    let w = precision + GUARD_BITS;
    // reference exponent is computed at a fixed precision so that the padding
    // grid is the same for every requested precision
    let e_ref = terms
        .iter()
        .map(|t| {
            let (_, hi) = log2_bounds(t, 64);
            let mut c = hi;
            c.ceil_mut();
            c.to_f64().clamp(-1.0e12, 1.0e12) as i64
        })
        .max()
        .unwrap();
    let mut lo = Float::new(w);
    let mut hi = Float::new(w);
    for t in terms {
        let (e_lo, e_hi) = log2_bounds(t, w);
        let v_lo = exp2(w, &e_lo, Round::Down);
        let v_hi = exp2(w, &e_hi, Round::Up);
        if t.is_negative() {
            lo = sub(w, &lo, &v_hi, Round::Down);
            hi = sub(w, &hi, &v_lo, Round::Up);
        } else {
            lo = add(w, &lo, &v_lo, Round::Down);
            hi = add(w, &hi, &v_hi, Round::Up);
        }
    }
    let pad = exp2(w, &Float::with_val(64, e_ref - precision as i64), Round::Up);
    let lo = Float::with_val_round(precision, &lo - &pad, Round::Down).0;
    let hi = Float::with_val_round(precision, &hi + &pad, Round::Up).0;
    Interval { lo, hi }
}

pub fn evaluate_scalar(x: &ExactScalar, precision: u32) -> Interval {
    evaluate(&ExactSum::from(x.clone()), precision)
}

/// Sign decision at one precision, or `None` if the enclosure straddles 0.
fn sign_at(terms: &[ExactScalar], prec: u32) -> Option<Sign> {
    let bounds: Vec<(Float, Float)> = terms.iter().map(|t| log2_bounds(t, prec)).collect();
    let reference = bounds
        .iter()
        .map(|(_, hi)| hi.clone())
        .fold(Float::with_val(prec, f64::NEG_INFINITY), |a, b| if b > a { b } else { a });
    let mut lo = Float::new(prec);
    let mut hi = Float::new(prec);
    for (t, (e_lo, e_hi)) in terms.iter().zip(&bounds) {
        let r_lo = exp2(prec, &sub(prec, e_lo, &reference, Round::Down), Round::Down);
        let r_hi = exp2(prec, &sub(prec, e_hi, &reference, Round::Up), Round::Up);
        if t.is_negative() {
            lo = sub(prec, &lo, &r_hi, Round::Down);
            hi = sub(prec, &hi, &r_lo, Round::Up);
        } else {
            lo = add(prec, &lo, &r_lo, Round::Down);
            hi = add(prec, &hi, &r_hi, Round::Up);
        }
    }
    if lo > 0 {
        Some(Sign::Positive)
    } else if hi < 0 {
        Some(Sign::Negative)
    } else {
        None
    }
}

/// Sign of a sum: exact when structural, otherwise by interval refinement
/// from [`START_COMPARE_BITS`] doubling up to `max_precision`.
pub fn sign_of(x: &ExactSum, max_precision: u32) -> Option<Sign> {
    if let Some(s) = x.structural_sign() {
        return Some(s);
    }
    let mut prec = START_COMPARE_BITS;
    while prec <= max_precision {
        if let Some(s) = sign_at(x.terms(), prec) {
            return Some(s);
        }
        prec *= 2;
    }
    None
}

/// Compares two exact sums. `Equal` is reported only when `x - y` is
/// canonically zero.
pub fn compare(x: &ExactSum, y: &ExactSum, max_precision: u32) -> Comparison {
    let d = x - y;
    match sign_of(&d, max_precision) {
        Some(Sign::Zero) => Comparison::Equal,
        Some(Sign::Positive) => Comparison::Greater,
        Some(Sign::Negative) => Comparison::Less,
        None => Comparison::Unknown,
    }
}

pub fn compare_scalars(x: &ExactScalar, y: &ExactScalar, max_precision: u32) -> Comparison {
    compare(&ExactSum::from(x.clone()), &ExactSum::from(y.clone()), max_precision)
}

/// Advisory decimal rendering with `digits` significant digits. Values whose
/// binary exponent leaves the float range are rendered as `2^(e)`.
pub fn approx_decimal(x: &ExactSum, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if let Some(t) = x.single() {
        let (lo, hi) = log2_bounds(t, 96);
        let mid = Float::with_val(97, &lo + &hi) / 2u32;
        if mid.to_f64().abs() > 1.0e8 {
            let sign = if t.is_negative() { "-" } else { "" };
            return format!("{sign}2^({})", mid.to_string_radix(10, Some(digits)));
        }
    }
    let iv = evaluate(x, 96);
    let mid = Float::with_val(98, iv.lo() + iv.hi()) / 2u32;
    mid.to_string_radix(10, Some(digits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::SurdExponent;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pow2_surd(n: i64, d: i64, m: u32) -> ExactScalar {
        ExactScalar::pow2(SurdExponent::surd(q(n, d), &BigUint::from(m)))
    }

    #[test]
    fn one_is_a_point() {
        for p in [16, 64, 1000] {
            let iv = evaluate_scalar(&ExactScalar::one(), p);
            assert_eq!(iv.lo(), &1);
            assert_eq!(iv.hi(), &1);
        }
    }

    #[test]
    fn inverse_sqrt_two_power() {
        // 2^{-1/sqrt 2}; oracle: exp(-ln 2 / sqrt 2) computed independently at 300 bits
        let iv = evaluate_scalar(&pow2_surd(-1, 1, 2), 64);
        let ln2 = Float::with_val(300, rug::float::Constant::Log2);
        let oracle = (-ln2 / Float::with_val(300, 2).sqrt()).exp();
        assert!(iv.lo() <= &oracle && &oracle <= iv.hi());
        let bound = Float::with_val(64, 1u32) >> 60u32;
        assert!(iv.width() < bound);
        assert!((iv.midpoint_f64() - 0.612_547_326_536_066_8).abs() < 1e-15);
    }

    #[test]
    fn surd_ordering() {
        let a = ExactSum::from(pow2_surd(1, 1, 2));
        let b = ExactSum::from(pow2_surd(1, 1, 3));
        assert_eq!(compare(&a, &b, MAX_COMPARE_BITS), Comparison::Greater);
        assert_eq!(compare(&a, &a, MAX_COMPARE_BITS), Comparison::Equal);
    }

    #[test]
    fn tiny_values_keep_their_sign() {
        let tiny = ExactSum::from(ExactScalar::pow_u(2, -1_000_000));
        assert_eq!(compare(&ExactSum::zero(), &tiny, MAX_COMPARE_BITS), Comparison::Less);
        // astronomically small surd power against an equally small neighbour
        let big = BigUint::from(10u32).pow(30u32);
        let x = ExactScalar::pow2(SurdExponent::integer(-(BigInt::from(big.clone()))));
        let y = &x * &pow2_surd(1, 1, 7);
        assert_eq!(compare_scalars(&x, &y, MAX_COMPARE_BITS), Comparison::Less);
    }

    #[test]
    fn zero_sum_contains_zero() {
        let t = pow2_surd(3, 7, 11);
        let s = &ExactSum::from(t.clone()) - &ExactSum::from(t);
        assert!(evaluate(&s, 64).contains_zero());
    }

    #[test]
    fn mixed_sign_sums() {
        // 2^{1/sqrt 2} - 3/2 > 0 since 2^{0.7071} = 1.632
        let s = ExactSum::from_terms([pow2_surd(1, 1, 2), ExactScalar::from_rational(&q(-3, 2))]);
        assert_eq!(sign_of(&s, MAX_COMPARE_BITS), Some(Sign::Positive));
        let iv = evaluate(&s, 64);
        assert!(iv.certainly_above(&Float::with_val(64, 0.13)));
    }
}
