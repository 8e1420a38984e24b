//! JSON form of exact values.
//!
//! Integers that fit in 64 bits are written as JSON numbers, larger ones as
//! decimal strings; the reader accepts either.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::interval::approx_decimal;
use super::scalar::{ExactScalar, Sign};
use super::sum::ExactSum;
use super::surd::SurdExponent;

/// Significant digits of the advisory `approx` field.
const APPROX_DIGITS: usize = 20;

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(untagged)]
enum JsonInt {
    Num(i64),
    Str(String),
}

impl JsonInt {
    fn from_big(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => JsonInt::Num(v),
            None => JsonInt::Str(x.to_string()),
        }
    }

    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            JsonInt::Num(v) => Ok(BigInt::from(*v)),
            JsonInt::Str(s) => s.parse().map_err(|_| format!("bad integer {s:?}")),
        }
    }
}

fn rat_string(q: &BigRational) -> String {
    if q.is_integer() {
        format!("{}/1", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn parse_rat(s: &str) -> Result<BigRational, String> {
    let bad = || format!("bad rational {s:?}");
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

#[derive(Serialize, Deserialize)]
struct SurdJson {
    q0: String,
    terms: Vec<(JsonInt, String)>,
}

#[derive(Serialize, Deserialize)]
struct ScalarJson {
    sign: i64,
    bases: Vec<(String, JsonInt)>,
    surd: SurdJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    approx: Option<String>,
}

impl Serialize for SurdExponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        surd_json(self).serialize(s)
    }
}

fn surd_json(x: &SurdExponent) -> SurdJson {
    SurdJson {
        q0: rat_string(x.rational_part()),
        terms: x
            .terms()
            .iter()
            .map(|(m, c)| (JsonInt::from_big(&BigInt::from(m.clone())), rat_string(c)))
            .collect(),
    }
}

fn surd_from_json(raw: &SurdJson) -> Result<SurdExponent, String> {
    let q0 = parse_rat(&raw.q0)?;
    let mut terms = BTreeMap::new();
    for (m, c) in &raw.terms {
        let m = m.to_big()?;
        let m: BigUint = m
            .to_biguint()
            .filter(|m| *m >= BigUint::from(2u32))
            .ok_or_else(|| format!("surd key {m} must be at least 2"))?;
        let c = parse_rat(c)?;
        if c.is_zero() {
            return Err(format!("zero surd coefficient for key {m}"));
        }
        if terms.insert(m.clone(), c).is_some() {
            return Err(format!("duplicate surd key {m}"));
        }
    }
    Ok(SurdExponent::from_parts(q0, terms))
}

impl<'de> Deserialize<'de> for SurdExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        surd_from_json(&SurdJson::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ScalarJson {
            sign: self.sign().as_i8() as i64,
            bases: self
                .bases()
                .iter()
                .map(|(b, e)| (b.to_string(), JsonInt::from_big(e)))
                .collect(),
            surd: surd_json(self.exp2()),
            approx: Some(approx_decimal(&ExactSum::from(self.clone()), APPROX_DIGITS)),
        }
        .serialize(s)
    }
}

fn scalar_from_json(raw: &ScalarJson) -> Result<ExactScalar, String> {
    let sign = Sign::from_i64(raw.sign).ok_or_else(|| format!("bad sign {}", raw.sign))?;
    let mut bases = BTreeMap::new();
    for (b, e) in &raw.bases {
        let b: BigUint = b.parse().map_err(|_| format!("bad base {b:?}"))?;
        if b < BigUint::from(2u32) {
            return Err(format!("base {b} must be at least 2"));
        }
        let e = e.to_big()?;
        if bases.insert(b.clone(), e).is_some() {
            return Err(format!("duplicate base {b}"));
        }
    }
    let surd = surd_from_json(&raw.surd)?;
    if sign == Sign::Zero {
        if !bases.is_empty() || !surd.is_zero() {
            return Err("zero scalar with nonempty bases or surd".into());
        }
        return Ok(ExactScalar::zero());
    }
    Ok(ExactScalar::from_parts(sign, &bases, surd))
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        scalar_from_json(&ScalarJson::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for ExactSum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.terms().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExactSum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let terms = Vec::<ExactScalar>::deserialize(d)?;
        Ok(ExactSum::from_terms(terms))
    }
}

/// Compact one-line JSON of a sum, used in CSV cells.
pub fn sum_to_json(x: &ExactSum) -> String {
    serde_json::to_string(x).expect("sum serialization is infallible")
}

pub fn sum_from_json(s: &str) -> Result<ExactSum, serde_json::Error> {
    serde_json::from_str(s)
}

/// Decimal approximation with the advisory number of digits.
pub fn approx(x: &ExactSum) -> String {
    approx_decimal(x, APPROX_DIGITS)
}

/// Serde adapter writing an optional rational as a `"p/q"` string.
pub mod opt_rational {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref().map(rat_string).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| parse_rat(&s).map_err(D::Error::custom))
            .transpose()
    }
}
