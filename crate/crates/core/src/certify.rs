//! Certificates for the nuclear-norm bound on the negative part and for the
//! column norms of `T`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::growth::{DFile, GrowthSequence, InequalityCheck, RapidityReport};
use crate::operator::{c_entry, modulus_split, t_column_oracle, tneg_rows_closed, Family};
use crate::scalars::{
    compare, compare_scalars, evaluate, Comparison, ExactScalar, ExactSum, Interval, SurdExponent,
};
use crate::verdict::Verdict;

/// Precision of the enclosures stored in reports.
const REPORT_BITS: u32 = 128;

/// Upper bound `sum_k ||T-_(k)||_inf < 2` for the negative part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearCertificate {
    pub sequence: DFile,
    pub n_max: usize,
    pub rapidity: RapidityReport,
    /// Row sup-norm inequalities: `A-row` at row `1 + v_m`, `C-entry` and
    /// `C-level` (the `n` equal entries of level `n` together) per level.
    pub row_checks: Vec<InequalityCheck>,
    pub rows: Vec<RowNorm>,
    pub finite_part: ExactSum,
    pub finite_enclosure: Interval,
    /// `2^{-v_{n_max}}` for the clause-A rows beyond the materialized levels.
    pub tail_a: ExactScalar,
    /// `2^{-n_max}` for the clause-C entries of the higher levels.
    pub tail_c: ExactScalar,
    pub total: ExactSum,
    pub total_enclosure: Interval,
    pub bound: ExactScalar,
    /// `total < bound`, decided exactly.
    pub bound_verdict: Verdict,
    /// Bound, rapidity and row checks together.
    pub verdict: Verdict,
    pub tail_conditional: bool,
    pub stamp: String,
    pub degenerate_levels: Vec<usize>,
    pub notes: Vec<String>,
    pub max_compare_bits: u32,
}

/// One materialized row of the negative part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowNorm {
    pub row: String,
    pub entries: usize,
    pub sup_norm: ExactScalar,
}

impl NuclearCertificate {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn pow2_int(e: BigInt) -> ExactScalar {
    ExactScalar::pow2(SurdExponent::integer(e))
}

fn prefix(d: &GrowthSequence, n_max: usize) -> Result<GrowthSequence> {
    GrowthSequence::new(d.a_list()[..n_max].to_vec(), d.b_list()[..n_max].to_vec())
}

/// Certifies the nuclear-norm bound from the symbolic rows of levels
/// `<= n_max`, closed by geometric tails.
///
/// The tails rest on the rapidity inequalities at every level beyond
/// `n_max`, which no finite computation checks, so the certificate is always
/// stamped conditional.
pub fn certify_nuclear(d: &GrowthSequence, n_max: usize, max_bits: u32) -> Result<NuclearCertificate> {
    if n_max == 0 || n_max > d.levels() {
        return Err(Error::Usage(format!(
            "n_max must lie in 1..={}, got {n_max}",
            d.levels()
        )));
    }
    let head = prefix(d, n_max)?;
    let rapidity = head.check_rapidity(max_bits);
    let rows = tneg_rows_closed(&head, n_max, max_bits)?;

    let mut row_checks = Vec::new();
    let v_of: BTreeMap<BigUint, usize> = (0..n_max).map(|m| (head.v(m).unwrap() + 1u32, m)).collect();
    for (row, r) in &rows {
        if r.entries.iter().any(|e| e.family == Family::A) {
            let m = v_of[row];
            let rhs = pow2_int(-BigInt::from(row.clone()));
            row_checks.push(InequalityCheck::new("A-row", m, None, r.sup_norm.clone(), rhs, max_bits));
        }
    }
    for n in 1..=n_max {
        let c = c_entry(&head, n);
        let rhs = pow2_int(-BigInt::from(n));
        let level = &c * &ExactScalar::from_int(n as i64);
        row_checks.push(InequalityCheck::new("C-entry", n, None, c, rhs.clone(), max_bits));
        row_checks.push(InequalityCheck::new("C-level", n, None, level, rhs, max_bits));
    }

    let finite_part = ExactSum::from_terms(rows.values().map(|r| r.sup_norm.clone()));
    let tail_a = pow2_int(-BigInt::from(head.v(n_max)?));
    let tail_c = pow2_int(-BigInt::from(n_max));
    let mut total = finite_part.clone();
    total.push(tail_a.clone());
    total.push(tail_c.clone());
    let bound = ExactScalar::from_int(2);
    let bound_verdict = match compare(&total, &ExactSum::from(bound.clone()), max_bits) {
        Comparison::Less => Verdict::Pass,
        Comparison::Equal | Comparison::Greater => Verdict::Fail,
        Comparison::Unknown => Verdict::Unknown,
    };
    let verdict = bound_verdict
        .and(rapidity.overall)
        .and(Verdict::all(row_checks.iter().map(|c| c.verdict)));

    let degenerate_levels = head.degenerate_levels();
    let mut notes = Vec::new();
    if !degenerate_levels.is_empty() {
        notes.push(format!(
            "levels {degenerate_levels:?} are packed too tightly for the closed row values; the rows above are the closed forms, not the actual negative part"
        ));
    }
    for f in rapidity.failures() {
        let r = f.r.map(|r| format!(", r = {r}")).unwrap_or_default();
        notes.push(format!("{} violated at n = {}{r}", f.name, f.n));
    }

    Ok(NuclearCertificate {
        sequence: head.to_json(),
        n_max,
        rapidity,
        row_checks,
        rows: rows
            .values()
            .map(|r| RowNorm {
                row: r.row.to_string(),
                entries: r.entries.len(),
                sup_norm: r.sup_norm.clone(),
            })
            .collect(),
        finite_enclosure: evaluate(&finite_part, REPORT_BITS),
        finite_part,
        tail_a,
        tail_c,
        total_enclosure: evaluate(&total, REPORT_BITS),
        total,
        bound,
        bound_verdict,
        verdict,
        tail_conditional: true,
        stamp: format!("conditional on rapidity beyond level {n_max}"),
        degenerate_levels,
        notes,
        max_compare_bits: max_bits,
    })
}

/// `sum_k max_i |s_{k,i}|` over the given entries: the exact sum of row
/// sup-norms and its enclosure.
pub fn nuclear_norm_upper<'a>(
    entries: impl IntoIterator<Item = (u64, u64, &'a ExactSum)>,
    max_bits: u32,
) -> Result<(ExactSum, Interval)> {
    let mut best: BTreeMap<u64, ExactSum> = BTreeMap::new();
    for (row, col, v) in entries {
        let m = match v.structural_sign() {
            Some(s) if s.as_i8() < 0 => -v,
            Some(_) => v.clone(),
            None => match compare(v, &ExactSum::zero(), max_bits) {
                Comparison::Less => -v,
                Comparison::Unknown => return Err(Error::UndecidableSign { row, col, bits: max_bits }),
                _ => v.clone(),
            },
        };
        match best.get(&row) {
            None => {
                best.insert(row, m);
            }
            Some(cur) => match compare(&m, cur, max_bits) {
                Comparison::Greater => {
                    best.insert(row, m);
                }
                Comparison::Unknown => {
                    return Err(Error::PrecisionCeiling {
                        bits: max_bits,
                        context: format!("row {row} supremum"),
                    })
                }
                _ => {}
            },
        }
    }
    let mut total = ExactSum::zero();
    for v in best.values() {
        total = &total + v;
    }
    let enc = evaluate(&total, REPORT_BITS);
    Ok((total, enc))
}

/// `||T f_i||_1` for one column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnNorm {
    pub i: u64,
    pub norm: ExactSum,
    pub enclosure: Interval,
    /// `norm <= 1`.
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnNormReport {
    pub i_max: u64,
    pub columns: Vec<ColumnNorm>,
    pub failures: Vec<u64>,
    pub worst: u64,
    pub overall: Verdict,
}

impl ColumnNormReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Column `l1` norms of `T` on `0..=i_max`, each compared exactly with 1.
/// Failures are reported, not raised.
pub fn check_column_norms(basis: &Basis, i_max: u64, max_bits: u32) -> Result<ColumnNormReport> {
    let columns = (0..=i_max)
        .into_par_iter()
        .map(|i| {
            let split = modulus_split(&t_column_oracle(basis, i)?, max_bits)?;
            let norm = ExactSum::from_terms(
                split
                    .modulus
                    .entries
                    .values()
                    .flat_map(|v| v.terms().iter().cloned()),
            );
            let verdict = Verdict::from_le(compare_scalars_sum(&norm, max_bits));
            Ok(ColumnNorm {
                i,
                enclosure: evaluate(&norm, REPORT_BITS),
                norm,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = columns.iter().filter(|c| !c.verdict.is_pass()).map(|c| c.i).collect();
    let worst = columns
        .iter()
        .max_by(|x, y| x.enclosure.hi().partial_cmp(y.enclosure.hi()).unwrap())
        .map(|c| c.i)
        .unwrap_or(0);
    let overall = Verdict::all(columns.iter().map(|c| c.verdict));
    Ok(ColumnNormReport {
        i_max,
        columns,
        failures,
        worst,
        overall,
    })
}

fn compare_scalars_sum(norm: &ExactSum, max_bits: u32) -> Comparison {
    match norm.single() {
        Some(t) => compare_scalars(t, &ExactScalar::one(), max_bits),
        None => compare(norm, &ExactSum::from(ExactScalar::one()), max_bits),
    }
}
