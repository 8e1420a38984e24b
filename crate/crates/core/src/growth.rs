//! Growth sequences `d = (a1, b1, a2, b2, ...)`, block boundaries
//! `v_n = n (a_n + b_n)`, the two rapidity inequalities and a generator for
//! sequences satisfying them.

use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalars::{compare_scalars, log2_bounds, Comparison, ExactScalar, Interval, SurdExponent};
use crate::verdict::Verdict;

/// The parameters `a_1..a_L`, `b_1..b_L`; `a_0 = 1` and `v_0 = 0` are implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrowthSequence {
    a: Vec<BigUint>,
    b: Vec<BigUint>,
    v: Vec<BigUint>,
    v_small: Vec<Option<u64>>,
}

impl GrowthSequence {
    /// Builds a sequence from its `a` and `b` lists. Only shape is checked
    /// here; see [`GrowthSequence::validate_structural`].
    pub fn new(a: Vec<BigUint>, b: Vec<BigUint>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidSequence("at least one level is required".into()));
        }
        if a.len() != b.len() {
            return Err(Error::InvalidSequence(format!(
                "{} values of a but {} values of b",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|x| x.is_zero()) {
            return Err(Error::InvalidSequence("entries must be positive".into()));
        }
        let mut v = vec![BigUint::zero()];
        for (n, (an, bn)) in a.iter().zip(&b).enumerate() {
            v.push(BigUint::from(n + 1) * (an + bn));
        }
        let v_small = v.iter().map(|x| x.to_u64()).collect();
        Ok(Self { a, b, v, v_small })
    }

    /// From the interleaved list `(a1, b1, a2, b2, ...)`.
    pub fn from_interleaved(d: &[u64]) -> Result<Self> {
        if !d.len().is_multiple_of(2) {
            return Err(Error::InvalidSequence("interleaved list has odd length".into()));
        }
        let a = d.iter().step_by(2).map(|&x| BigUint::from(x)).collect();
        let b = d.iter().skip(1).step_by(2).map(|&x| BigUint::from(x)).collect();
        Self::new(a, b)
    }

    pub fn levels(&self) -> usize {
        self.a.len()
    }

    /// `a_n` for `0 <= n <= L`, with `a_0 = 1`.
    pub fn a(&self, n: usize) -> BigUint {
        if n == 0 {
            BigUint::one()
        } else {
            self.a[n - 1].clone()
        }
    }

    /// `b_n` for `1 <= n <= L`.
    pub fn b(&self, n: usize) -> BigUint {
        assert!(n >= 1, "b_0 is not defined");
        self.b[n - 1].clone()
    }

    pub fn a_list(&self) -> &[BigUint] {
        &self.a
    }

    pub fn b_list(&self) -> &[BigUint] {
        &self.b
    }

    pub fn v(&self, n: usize) -> Result<BigUint> {
        self.v.get(n).cloned().ok_or(Error::OutOfRange {
            index: n as u64,
            limit: self.levels() as u64,
        })
    }

    /// `v_n` when it fits in 64 bits.
    pub fn v_u64(&self, n: usize) -> Option<u64> {
        self.v_small.get(n).copied().flatten()
    }

    /// `a_n` when it fits in 64 bits.
    pub fn a_u64(&self, n: usize) -> Option<u64> {
        self.a(n).to_u64()
    }

    pub fn b_u64(&self, n: usize) -> Option<u64> {
        self.b(n).to_u64()
    }

    /// The largest index covered by the clauses, `v_L`, if it fits in 64 bits.
    pub fn max_index(&self) -> Option<u64> {
        self.v_u64(self.levels())
    }

    /// Level `n` with `v_{n-1} < i <= v_n`; 0 for `i = 0`; `None` beyond `v_L`.
    pub fn level_of(&self, i: u64) -> Option<usize> {
        if i == 0 {
            return Some(0);
        }
        let i = BigUint::from(i);
        if i > self.v[self.levels()] {
            return None;
        }
        Some(self.v.partition_point(|v| *v < i))
    }

    /// Structural predicate: interleaved strict increase, `a_n > v_{n-1}` and
    /// `b_n > (n-1) a_n` at every level.
    pub fn validate_structural(&self) -> StructuralReport {
        let mut checks = Vec::new();
        let mut prev = BigUint::zero();
        for n in 1..=self.levels() {
            let (a, b) = (self.a(n), self.b(n));
            let vprev = &self.v[n - 1];
            let mut violated = Vec::new();
            if a <= prev {
                violated.push(format!("a_{n} = {a} must exceed the previous entry {prev}"));
            }
            if b <= a {
                violated.push(format!("b_{n} = {b} must exceed a_{n} = {a}"));
            }
            if a <= *vprev {
                violated.push(format!("a_{n} = {a} must exceed v_{} = {vprev}", n - 1));
            }
            let bound = BigUint::from(n - 1) * &a;
            if b <= bound {
                violated.push(format!("b_{n} = {b} must exceed (n-1) a_{n} = {bound}"));
            }
            checks.push(LevelCheck {
                n,
                verdict: Verdict::from_bool(violated.is_empty()),
                violated,
            });
            prev = b;
        }
        let overall = Verdict::all(checks.iter().map(|c| c.verdict));
        StructuralReport { levels: checks, overall }
    }

    pub fn require_structural(&self) -> Result<()> {
        let report = self.validate_structural();
        match report.levels.iter().find(|c| !c.verdict.is_pass()) {
            None => Ok(()),
            Some(c) => Err(Error::InvalidSequence(format!("level {}: {}", c.n, c.violated.join("; ")))),
        }
    }

    /// Level `n` has `a_n >= v_{n-1} + 2`, so that the index after every
    /// clause-A endpoint of lower levels sits in a clause-B block.
    pub fn a_generic(&self, n: usize) -> bool {
        self.a(n) >= &self.v[n - 1] + 2u32
    }

    /// Level `n` has `b_n >= (n-1) a_n + 2`, so that `n a_n + 1` sits in
    /// clause D with `r = 0`.
    pub fn b_generic(&self, n: usize) -> bool {
        self.b(n) >= BigUint::from(n - 1) * self.a(n) + 2u32
    }

    /// Levels where the displayed closed forms of the negative part do not
    /// apply because the blocks are packed too tightly.
    pub fn degenerate_levels(&self) -> Vec<usize> {
        (1..=self.levels())
            .filter(|&n| !self.a_generic(n) || !self.b_generic(n))
            .collect()
    }

    pub fn is_generic(&self) -> bool {
        self.degenerate_levels().is_empty()
    }

    /// The smallest structurally valid next level: `a = v_L + 1`,
    /// `b = max(a, L a) + 1`.
    pub fn extend_minimal(&self) -> GrowthSequence {
        let l = self.levels();
        let a = &self.v[l] + 1u32;
        let b = (BigUint::from(l) * &a).max(a.clone()) + 1u32;
        let mut aa = self.a.clone();
        let mut bb = self.b.clone();
        aa.push(a);
        bb.push(b);
        GrowthSequence::new(aa, bb).expect("extension keeps the shape valid")
    }

    /// Both rapidity inequalities at every level, decided exactly.
    pub fn check_rapidity(&self, max_bits: u32) -> RapidityReport {
        let mut r1 = Vec::new();
        for n in 1..=self.levels() {
            for r in 1..=n {
                r1.push(r1_check(self, n, r, max_bits));
            }
        }
        let r2: Vec<_> = (1..=self.levels()).map(|n| r2_check(self, n, max_bits)).collect();
        let overall = Verdict::all(r1.iter().chain(&r2).map(|c| c.verdict));
        RapidityReport { r1, r2, overall }
    }

    pub fn to_json(&self) -> DFile {
        DFile {
            a: self.a.iter().map(|x| x.to_string()).collect(),
            b: self.b.iter().map(|x| x.to_string()).collect(),
        }
    }

    pub fn from_json(f: &DFile) -> Result<Self> {
        let parse = |s: &String| {
            s.trim()
                .parse::<BigUint>()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?} in d file")))
        };
        let a = f.a.iter().map(parse).collect::<Result<_>>()?;
        let b = f.b.iter().map(parse).collect::<Result<_>>()?;
        Self::new(a, b)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let f: DFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&self.to_json())?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

impl std::fmt::Display for GrowthSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .a
            .iter()
            .zip(&self.b)
            .flat_map(|(a, b)| [a.to_string(), b.to_string()])
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// On-disk form of a growth sequence; decimal strings because entries exceed
/// 64 bits from the third level on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DFile {
    pub a: Vec<String>,
    pub b: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub n: usize,
    pub verdict: Verdict,
    pub violated: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub levels: Vec<LevelCheck>,
    pub overall: Verdict,
}

/// One instance `lhs <= rhs` of a rapidity inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub n: usize,
    pub r: Option<usize>,
    pub lhs: ExactScalar,
    pub rhs: ExactScalar,
    /// Enclosures of `log2 lhs` and `log2 rhs`; the values themselves can lie
    /// far outside any float range.
    pub log2_lhs: Interval,
    pub log2_rhs: Interval,
    pub verdict: Verdict,
}

impl InequalityCheck {
    pub fn new(name: &str, n: usize, r: Option<usize>, lhs: ExactScalar, rhs: ExactScalar, max_bits: u32) -> Self {
        let verdict = Verdict::from_le(compare_scalars(&lhs, &rhs, max_bits));
        let enclose = |x: &ExactScalar| {
            let (lo, hi) = log2_bounds(x, 64);
            Interval::new(lo, hi)
        };
        Self {
            name: name.to_string(),
            n,
            r,
            log2_lhs: enclose(&lhs),
            log2_rhs: enclose(&rhs),
            lhs,
            rhs,
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RapidityReport {
    pub r1: Vec<InequalityCheck>,
    pub r2: Vec<InequalityCheck>,
    pub overall: Verdict,
}

impl RapidityReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.r1.iter().chain(&self.r2).filter(|c| !c.verdict.is_pass())
    }
}

fn big(x: &BigUint) -> BigInt {
    BigInt::from(x.clone())
}

/// `2^{(c - x/2)/sqrt(x)}`.
fn half_point_power(c: &BigUint, x: &BigUint) -> ExactScalar {
    let coeff = BigRational::from_integer(big(c)) - BigRational::new(big(x), BigInt::from(2));
    ExactScalar::pow2(SurdExponent::surd(coeff, x))
}

/// Left side of R1 at `m`: `a_m 2^{(1 + v_m - a_{m+1}/2)/sqrt(a_{m+1})}`,
/// with `a_{m+1}` passed explicitly so the generator can probe candidates.
pub(crate) fn r1_lhs(a_m: &BigUint, v_m: &BigUint, a_next: &BigUint) -> ExactScalar {
    &ExactScalar::from_biguint(a_m) * &half_point_power(&(v_m + 1u32), a_next)
}

/// `2^{-(1 + v_m)}`.
pub(crate) fn r1_rhs(v_m: &BigUint) -> ExactScalar {
    ExactScalar::pow2(SurdExponent::integer(-big(&(v_m + 1u32))))
}

/// Left side of R2 at `n`: `b 2^{(1 + n a - b/2)/sqrt(b)}`.
pub(crate) fn r2_lhs(n: usize, a_n: &BigUint, b_n: &BigUint) -> ExactScalar {
    &ExactScalar::from_biguint(b_n) * &half_point_power(&(BigUint::from(n) * a_n + 1u32), b_n)
}

pub(crate) fn r2_rhs(n: usize) -> ExactScalar {
    ExactScalar::pow2(SurdExponent::integer(-BigInt::from(n)))
}

fn r1_check(d: &GrowthSequence, n: usize, r: usize, max_bits: u32) -> InequalityCheck {
    let m = n - r;
    let v_m = &d.v[m];
    InequalityCheck::new("R1", n, Some(r), r1_lhs(&d.a(m), v_m, &d.a(m + 1)), r1_rhs(v_m), max_bits)
}

fn r2_check(d: &GrowthSequence, n: usize, max_bits: u32) -> InequalityCheck {
    InequalityCheck::new("R2", n, None, r2_lhs(n, &d.a(n), &d.b(n)), r2_rhs(n), max_bits)
}

/// Least `x >= lo` with `pred(x)`, for a predicate that is false below its
/// threshold and true from it on. Doubling, then bisection.
fn least_satisfying(lo: BigUint, mut pred: impl FnMut(&BigUint) -> Result<bool>) -> Result<BigUint> {
    if pred(&lo)? {
        return Ok(lo);
    }
    let mut bad = lo.clone();
    let mut step = BigUint::one();
    let good = loop {
        let probe = &lo + &step;
        if pred(&probe)? {
            break probe;
        }
        bad = probe;
        step <<= 1;
    };
    let mut good = good;
    while &good - &bad > BigUint::one() {
        let mid = (&good + &bad) >> 1;
        if pred(&mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

fn decide(c: Comparison, max_bits: u32, context: impl FnOnce() -> String) -> Result<bool> {
    c.is_le().ok_or_else(|| Error::PrecisionCeiling {
        bits: max_bits,
        context: context(),
    })
}

/// Generates `L` levels, each `a_n` and `b_n` the least value satisfying its
/// rapidity inequality above the structural lower bounds. `seed` is a lower
/// bound for `a_1`.
pub fn generate_rapid(levels: usize, seed: Option<u64>, max_bits: u32) -> Result<GrowthSequence> {
    if levels == 0 {
        return Err(Error::Usage("at least one level is required".into()));
    }
    if seed == Some(0) {
        return Err(Error::Usage("seed must be a positive integer".into()));
    }
    let mut a: Vec<BigUint> = Vec::new();
    let mut b: Vec<BigUint> = Vec::new();
    let mut v = BigUint::zero();
    for n in 1..=levels {
        let m = n - 1;
        let a_m = if m == 0 { BigUint::one() } else { a[m - 1].clone() };
        let mut lo = &v + 1u32;
        if let Some(prev) = b.last() {
            lo = lo.max(prev + 1u32);
        }
        if n == 1 {
            lo = lo.max(BigUint::from(seed.unwrap_or(1)));
        }
        let rhs = r1_rhs(&v);
        let an = least_satisfying(lo, |x| {
            decide(compare_scalars(&r1_lhs(&a_m, &v, x), &rhs, max_bits), max_bits, || {
                format!("R1 while searching a_{n}")
            })
        })?;
        let lo_b = (&an + 1u32).max(BigUint::from(n - 1) * &an + 1u32);
        let rhs = r2_rhs(n);
        let bn = least_satisfying(lo_b, |x| {
            decide(compare_scalars(&r2_lhs(n, &an, x), &rhs, max_bits), max_bits, || {
                format!("R2 while searching b_{n}")
            })
        })?;
        v = BigUint::from(n) * (&an + &bn);
        a.push(an);
        b.push(bn);
    }
    GrowthSequence::new(a, b)
}
