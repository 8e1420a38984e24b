//! The clause system relating the standard unit vectors `f_i` to the
//! sequence `e_i`, and the exact change of basis in both directions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;
use std::sync::{Arc, RwLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth::GrowthSequence;
use crate::scalars::{approx, ExactScalar, ExactSum, SurdExponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    Zero,
    A,
    B,
    C,
    D,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tag::Zero => "0",
            Tag::A => "A",
            Tag::B => "B",
            Tag::C => "C",
            Tag::D => "D",
        };
        f.write_str(s)
    }
}

/// The clause an index belongs to. Clause B below `a_n` is stored with
/// `r = 0`, as is clause D between `n a_n` and `a_n + b_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexClass {
    pub tag: Tag,
    pub n: usize,
    pub r: usize,
    /// Half point of clauses B and D.
    #[serde(with = "crate::scalars::opt_rational")]
    pub h: Option<BigRational>,
}

impl IndexClass {
    fn zero() -> Self {
        Self {
            tag: Tag::Zero,
            n: 0,
            r: 0,
            h: None,
        }
    }
}

impl fmt::Display for IndexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            Tag::Zero => write!(f, "0"),
            _ => write!(f, "{}(n={}, r={})", self.tag, self.n, self.r),
        }
    }
}

fn half(x: BigUint) -> BigRational {
    BigRational::new(BigInt::from(x), BigInt::from(2))
}

/// Every clause interval at level `n` that contains `i`.
fn matching_clauses(d: &GrowthSequence, n: usize, i: &BigUint) -> Vec<IndexClass> {
    let (a, b) = (d.a(n), d.b(n));
    let vprev = d.v(n - 1).expect("level in range");
    let mut out = Vec::new();
    let mut push = |tag, r, h| out.push(IndexClass { tag, n, r, h });
    if vprev < *i && *i < a {
        push(Tag::B, 0, Some(half(a.clone())));
    }
    for r in 1..=n {
        let ra = BigUint::from(r) * &a;
        let v = d.v(n - r).expect("level in range");
        let a_hi = &ra + &v;
        if ra <= *i && *i <= a_hi {
            push(Tag::A, r, None);
        }
        if r < n && a_hi < *i && *i < &ra + &a {
            push(Tag::B, r, Some(half(BigUint::from(2 * r + 1) * &a)));
        }
    }
    let na = BigUint::from(n) * &a;
    let ab = &a + &b;
    for r in 0..=n {
        let rb = BigUint::from(r) * &b;
        if r >= 1 && BigUint::from(r) * &ab <= *i && *i <= &na + &rb {
            push(Tag::C, r, None);
        }
        if r < n && &na + &rb < *i && *i < BigUint::from(r + 1) * &ab {
            push(Tag::D, r, Some(half(BigUint::from(2 * r + 1) * &b)));
        }
    }
    out
}

/// Clause of index `i`; errors signal a structurally invalid sequence.
pub fn classify(i: u64, d: &GrowthSequence) -> Result<IndexClass> {
    let n = d.level_of(i).ok_or(Error::OutOfRange {
        index: i,
        limit: d.max_index().unwrap_or(u64::MAX),
    })?;
    if n == 0 {
        return Ok(IndexClass::zero());
    }
    let mut found = matching_clauses(d, n, &BigUint::from(i));
    match found.len() {
        0 => Err(Error::Uncovered(i)),
        1 => Ok(found.pop().unwrap()),
        _ => Err(Error::Ambiguous {
            index: i,
            clauses: found.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "),
        }),
    }
}

/// `f_i = diag e_i + off.1 e_{off.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    pub i: u64,
    pub class: IndexClass,
    pub diag: ExactScalar,
    pub off: Option<(u64, ExactScalar)>,
}

/// `e_i = sum_j coeffs[j] f_j` along a strictly decreasing chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainExpansion {
    pub i: u64,
    pub coeffs: BTreeMap<u64, ExactScalar>,
}

/// Outcome of substituting the `e`-expansions back into the clause formula.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip {
    pub i: u64,
    pub ok: bool,
    /// Coefficients of the reconstruction that differ from `f_i`.
    pub diff: Vec<(u64, ExactSum)>,
}

/// Canonical atoms reused for every index of a level.
#[derive(Debug)]
struct LevelAtoms {
    n: ExactScalar,
    /// `2^{1/sqrt(a_n)}` and `2^{1/sqrt(b_n)}` exponents.
    a_unit: SurdExponent,
    b_unit: SurdExponent,
    a: BigUint,
    b: BigUint,
    b_scalar: ExactScalar,
}

/// Clause data for a fixed growth sequence, with a memo of `e`-expansions.
pub struct Basis {
    d: GrowthSequence,
    atoms: Vec<LevelAtoms>,
    small: Vec<ExactScalar>,
    a_scalars: Vec<ExactScalar>,
    memo: RwLock<HashMap<u64, Arc<ChainExpansion>>>,
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis").field("d", &self.d).finish_non_exhaustive()
    }
}

impl Basis {
    pub fn new(d: GrowthSequence) -> Self {
        let l = d.levels();
        let unit = |x: &BigUint| SurdExponent::surd(BigRational::from_integer(1.into()), x);
        let atoms = (1..=l)
            .map(|n| {
                let (a, b) = (d.a(n), d.b(n));
                LevelAtoms {
                    n: ExactScalar::from_int(n as i64),
                    a_unit: unit(&a),
                    b_unit: unit(&b),
                    b_scalar: ExactScalar::from_biguint(&b),
                    a,
                    b,
                }
            })
            .collect();
        let small = (0..=l as i64).map(ExactScalar::from_int).collect();
        let a_scalars = (0..=l).map(|m| ExactScalar::from_biguint(&d.a(m))).collect();
        Self {
            d,
            atoms,
            small,
            a_scalars,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn sequence(&self) -> &GrowthSequence {
        &self.d
    }

    pub fn classify(&self, i: u64) -> Result<IndexClass> {
        classify(i, &self.d)
    }

    fn atoms(&self, n: usize) -> &LevelAtoms {
        &self.atoms[n - 1]
    }

    /// `n^k`.
    fn level_pow(&self, n: usize, k: &BigInt) -> ExactScalar {
        self.atoms(n).n.powi(k)
    }

    /// `n^i 2^{(h - i)/sqrt(x)}` for clauses B and D.
    fn half_point_diag(&self, n: usize, i: u64, h: &BigRational, unit: &SurdExponent) -> ExactScalar {
        let shift = h - BigRational::from_integer(BigInt::from(i));
        &self.level_pow(n, &BigInt::from(i)) * &ExactScalar::pow2(unit.scale(&shift))
    }

    pub fn lambda_row(&self, i: u64) -> Result<LambdaRow> {
        let class = self.classify(i)?;
        let (diag, off) = match class.tag {
            Tag::Zero => (ExactScalar::one(), None),
            Tag::A => {
                let (n, r) = (class.n, class.r);
                let at = self.atoms(n);
                let ra = BigUint::from(r) * &at.a;
                let s = i - ra.to_u64().expect("index fits");
                let k = &self.small[n - r].powi(&BigInt::from(s)) * &self.a_scalars[n - r];
                let diag = &k * &self.level_pow(n, &BigInt::from(ra));
                (diag, Some((s, -k)))
            }
            Tag::B => {
                let at = self.atoms(class.n);
                (self.half_point_diag(class.n, i, class.h.as_ref().unwrap(), &at.a_unit), None)
            }
            Tag::C => {
                let n = class.n;
                let at = self.atoms(n);
                let j = i - at.b.to_u64().expect("index fits");
                let off = -(&at.b_scalar * &self.level_pow(n, &BigInt::from(j)));
                (self.level_pow(n, &BigInt::from(i)), Some((j, off)))
            }
            Tag::D => {
                let at = self.atoms(class.n);
                (self.half_point_diag(class.n, i, class.h.as_ref().unwrap(), &at.b_unit), None)
            }
        };
        Ok(LambdaRow { i, class, diag, off })
    }

    fn memo_get(&self, i: u64) -> Option<Arc<ChainExpansion>> {
        self.memo.read().expect("memo lock").get(&i).cloned()
    }

    /// `e_i` over the `f` basis, unrolled iteratively along partner chains.
    pub fn e_in_f(&self, i: u64) -> Result<Arc<ChainExpansion>> {
        if let Some(hit) = self.memo_get(i) {
            return Ok(hit);
        }
        let mut pending: Vec<LambdaRow> = Vec::new();
        let mut cursor = Some(i);
        let mut base: Option<Arc<ChainExpansion>> = None;
        while let Some(k) = cursor {
            if let Some(hit) = self.memo_get(k) {
                base = Some(hit);
                break;
            }
            let row = self.lambda_row(k)?;
            cursor = row.off.as_ref().map(|(j, _)| *j);
            pending.push(row);
        }
        while let Some(row) = pending.pop() {
            let inv = row.diag.recip();
            let mut coeffs = BTreeMap::new();
            if let (Some((_, off)), Some(below)) = (&row.off, &base) {
                let factor = -(off * &inv);
                for (j, c) in &below.coeffs {
                    coeffs.insert(*j, c * &factor);
                }
            }
            coeffs.insert(row.i, inv);
            let exp = Arc::new(ChainExpansion { i: row.i, coeffs });
            self.memo.write().expect("memo lock").insert(row.i, exp.clone());
            base = Some(exp);
        }
        Ok(base.expect("chain is nonempty"))
    }

    /// Same as [`Basis::e_in_f`] without touching the memo.
    pub fn e_in_f_uncached(&self, i: u64) -> Result<ChainExpansion> {
        let mut rows = Vec::new();
        let mut cursor = Some(i);
        while let Some(k) = cursor {
            let row = self.lambda_row(k)?;
            cursor = row.off.as_ref().map(|(j, _)| *j);
            rows.push(row);
        }
        let mut below: Option<ChainExpansion> = None;
        while let Some(row) = rows.pop() {
            let inv = row.diag.recip();
            let mut coeffs = BTreeMap::new();
            if let (Some((_, off)), Some(b)) = (&row.off, &below) {
                let factor = -(off * &inv);
                for (j, c) in &b.coeffs {
                    coeffs.insert(*j, c * &factor);
                }
            }
            coeffs.insert(row.i, inv);
            below = Some(ChainExpansion { i: row.i, coeffs });
        }
        Ok(below.expect("chain is nonempty"))
    }

    pub fn memo_len(&self) -> usize {
        self.memo.read().expect("memo lock").len()
    }

    /// Substitutes `e_i` and `e_j` back into `f_i = diag e_i + off e_j`.
    pub fn f_in_e_roundtrip(&self, i: u64) -> Result<RoundTrip> {
        self.roundtrip_with(i, |k| self.e_in_f(k))
    }

    /// [`Basis::f_in_e_roundtrip`] on [`Basis::e_in_f_uncached`], for sweeps
    /// too long to memoize.
    pub fn f_in_e_roundtrip_uncached(&self, i: u64) -> Result<RoundTrip> {
        self.roundtrip_with(i, |k| self.e_in_f_uncached(k).map(Arc::new))
    }

    fn roundtrip_with(&self, i: u64, expand: impl Fn(u64) -> Result<Arc<ChainExpansion>>) -> Result<RoundTrip> {
        let row = self.lambda_row(i)?;
        let mut acc: BTreeMap<u64, ExactSum> = BTreeMap::new();
        let mut add = |coeff: &ExactScalar, e: Arc<ChainExpansion>| {
            for (j, c) in &e.coeffs {
                let t = ExactSum::from(coeff * c);
                let slot = acc.entry(*j).or_default();
                *slot = &*slot + &t;
            }
        };
        add(&row.diag, expand(i)?);
        if let Some((j, off)) = &row.off {
            add(off, expand(*j)?);
        }
        let one = ExactSum::from(ExactScalar::one());
        let diff: Vec<(u64, ExactSum)> = acc
            .into_iter()
            .filter(|(j, s)| if *j == i { !s.value_eq(&one) } else { !s.is_zero() })
            .collect();
        Ok(RoundTrip { i, ok: diff.is_empty(), diff })
    }

    /// Every surd key of `x` divides some `a_n` or `b_n`, and the only
    /// irrational factors are powers of two.
    pub fn closure_ok(&self, x: &ExactScalar) -> bool {
        x.surd_keys().all(|k| {
            self.atoms
                .iter()
                .any(|at| at.a.is_multiple_of(k) || at.b.is_multiple_of(k))
        })
    }

    /// Writes the clause table for `0..=i_max` as CSV.
    pub fn write_debug_csv<W: Write>(&self, i_max: u64, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for i in 0..=i_max {
            let row = self.lambda_row(i)?;
            w.serialize(DebugRow {
                i,
                tag: row.class.tag.to_string(),
                n: row.class.n,
                r: row.class.r,
                h: row.class.h.as_ref().map(|h| h.to_string()).unwrap_or_default(),
                partner: row.off.as_ref().map(|(j, _)| j.to_string()).unwrap_or_default(),
                diag_approx: approx(&ExactSum::from(row.diag.clone())),
                off_approx: row
                    .off
                    .as_ref()
                    .map(|(_, c)| approx(&ExactSum::from(c.clone())))
                    .unwrap_or_default(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct DebugRow {
    i: u64,
    tag: String,
    n: usize,
    r: usize,
    h: String,
    partner: String,
    diag_approx: String,
    off_approx: String,
}

/// Checks that every index in `1..=i_max` lies in exactly one clause.
pub fn partition_check(d: &GrowthSequence, i_max: u64) -> Result<()> {
    for i in 1..=i_max {
        classify(i, d)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d2367() -> GrowthSequence {
        GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn rat(x: &ExactScalar) -> BigRational {
        x.as_rational().expect("rational value")
    }

    #[test]
    fn classes_of_the_small_sequence() {
        let d = d2367();
        let c = |i| classify(i, &d).unwrap();
        assert_eq!(c(0).tag, Tag::Zero);
        assert_eq!((c(1).tag, c(1).r, c(1).h.clone()), (Tag::B, 0, Some(q(1, 1))));
        assert_eq!((c(2).tag, c(2).n, c(2).r), (Tag::A, 1, 1));
        assert_eq!((c(3).tag, c(3).r, c(4).tag), (Tag::D, 0, Tag::D));
        assert_eq!((c(5).tag, c(5).n, c(5).r), (Tag::C, 1, 1));
        assert_eq!((c(6).tag, c(6).r), (Tag::A, 1));
        assert_eq!((c(12).tag, c(12).n, c(12).r), (Tag::A, 2, 2));
        assert_eq!((c(20).tag, c(20).r, c(20).h.clone()), (Tag::D, 1, Some(q(21, 2))));
        assert_eq!((c(26).tag, c(26).r), (Tag::C, 2));
        assert!(matches!(classify(27, &d), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn overlapping_blocks_are_reported() {
        let d = GrowthSequence::from_interleaved(&[2, 3, 4, 5]).unwrap();
        let errs: Vec<_> = (1..=18).filter_map(|i| classify(i, &d).err()).collect();
        assert!(!errs.is_empty());
        assert!(errs.iter().any(|e| matches!(e, Error::Ambiguous { .. })));
    }

    #[test]
    fn lambda_rows_by_hand() {
        let b = Basis::new(d2367());
        let r0 = b.lambda_row(0).unwrap();
        assert_eq!((r0.diag.clone(), r0.off.is_none()), (ExactScalar::one(), true));
        // f_1 = 2^{(1-1)/sqrt 2} e_1 = e_1
        assert_eq!(b.lambda_row(1).unwrap().diag, ExactScalar::one());
        // f_2 = (e_2 - e_0) 0^0 a_0
        let r2 = b.lambda_row(2).unwrap();
        assert_eq!(rat(&r2.diag), q(1, 1));
        assert_eq!(r2.off.as_ref().map(|(j, c)| (*j, rat(c))), Some((0, q(-1, 1))));
        // f_6 = (2^6 e_6 - e_0) * 1^0 * a_1, a_1 = 2
        let r6 = b.lambda_row(6).unwrap();
        assert_eq!(rat(&r6.diag), q(128, 1));
        assert_eq!(r6.off.as_ref().map(|(j, c)| (*j, rat(c))), Some((0, q(-2, 1))));
        // f_13 = 2^13 e_13 - 7 * 2^6 e_6
        let r13 = b.lambda_row(13).unwrap();
        assert_eq!(rat(&r13.diag), q(8192, 1));
        assert_eq!(r13.off.as_ref().map(|(j, c)| (*j, rat(c))), Some((6, q(-448, 1))));
    }

    #[test]
    fn chain_expansions_by_hand() {
        let b = Basis::new(d2367());
        let e = |i| b.e_in_f(i).unwrap().coeffs.iter().map(|(j, c)| (*j, rat(c))).collect::<Vec<_>>();
        assert_eq!(e(0), vec![(0, q(1, 1))]);
        assert_eq!(e(2), vec![(0, q(1, 1)), (2, q(1, 1))]);
        assert_eq!(e(6), vec![(0, q(1, 64)), (6, q(1, 128))]);
        assert_eq!(e(12), vec![(0, q(1, 4096)), (12, q(1, 4096))]);
        // e_13 = 2^-13 f_13 + 7 2^-7 e_6
        assert_eq!(e(13), vec![(0, q(7, 8192)), (6, q(7, 16384)), (13, q(1, 8192))]);
    }

    #[test]
    fn memo_matches_recomputation() {
        let b = Basis::new(d2367());
        for i in (0..=26).rev() {
            let memo = b.e_in_f(i).unwrap();
            let fresh = b.e_in_f_uncached(i).unwrap();
            assert_eq!(*memo, fresh);
            let keys: Vec<_> = memo.coeffs.keys().rev().copied().collect();
            assert_eq!(keys[0], i);
            assert!(keys.windows(2).all(|w| w[0] > w[1]));
        }
        assert!(b.memo_len() >= 27);
    }

    #[test]
    fn round_trip_small_sequence() {
        let b = Basis::new(d2367());
        for i in 0..=26 {
            let rt = b.f_in_e_roundtrip(i).unwrap();
            assert!(rt.ok, "index {i}: {:?}", rt.diff);
        }
    }

    #[test]
    fn closure_of_coefficients() {
        let b = Basis::new(d2367());
        for i in 0..=26 {
            let row = b.lambda_row(i).unwrap();
            assert!(b.closure_ok(&row.diag));
            for c in b.e_in_f(i).unwrap().coeffs.values() {
                assert!(b.closure_ok(c));
            }
        }
    }

    #[test]
    fn debug_dump() {
        let b = Basis::new(d2367());
        let mut buf = Vec::new();
        b.write_debug_csv(5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,tag,n,r,h,partner,diag_approx,off_approx"));
        assert!(text.lines().any(|l| l.starts_with("2,A,1,1,,0,")));
        assert_eq!(text.lines().count(), 7);
    }
}
