use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::column::{t_column_oracle, SparseColumn};
use super::split::modulus_split;
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::scalars::{evaluate, ExactSum, Sign, DEFAULT_EVAL_BITS};
use crate::verdict::Verdict;

/// Which matrix of the lattice decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    #[serde(rename = "T")]
    T,
    #[serde(rename = "T+")]
    Plus,
    #[serde(rename = "T-")]
    Minus,
    #[serde(rename = "|T|")]
    Modulus,
}

impl Part {
    pub const ALL: [Part; 4] = [Part::T, Part::Plus, Part::Minus, Part::Modulus];

    pub fn is_nonnegative(self) -> bool {
        self != Part::T
    }

    /// File-name friendly tag.
    pub fn slug(self) -> &'static str {
        match self {
            Part::T => "t",
            Part::Plus => "tplus",
            Part::Minus => "tminus",
            Part::Modulus => "modulus",
        }
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::T => "T",
            Part::Plus => "T+",
            Part::Minus => "T-",
            Part::Modulus => "|T|",
        })
    }
}

impl FromStr for Part {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(Part::T),
            "t+" | "plus" | "tplus" => Ok(Part::Plus),
            "t-" | "minus" | "tminus" => Ok(Part::Minus),
            "|t|" | "modulus" | "abs" => Ok(Part::Modulus),
            _ => Err(Error::Usage(format!("unknown operator part {s:?}"))),
        }
    }
}

/// Outcome of the structural checks run on construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    /// No entries below the subdiagonal.
    pub hessenberg: Verdict,
    /// `t_{i+1,i} > 0` for `i < N`.
    pub subdiagonal_positive: Verdict,
    /// `T = T+ - T-`, `|T| = T+ + T-`, `min(T+, T-) = 0`.
    pub lattice: Verdict,
    pub violations: Vec<String>,
}

/// The compression `P_N T P_N` with its lattice parts.
#[derive(Clone, Debug)]
pub struct TruncatedOperator {
    n: u64,
    t: Vec<SparseColumn>,
    plus: Vec<SparseColumn>,
    minus: Vec<SparseColumn>,
    modulus: Vec<SparseColumn>,
    signs: Vec<std::collections::BTreeMap<u64, Sign>>,
    flagged: Vec<u64>,
    structure: StructureReport,
}

/// Builds columns `0..=n` with rows `> n` dropped. Requires `n + 1 <= v_L`.
pub fn truncate(basis: &Basis, n: u64, max_bits: u32) -> Result<TruncatedOperator> {
    let full: Vec<SparseColumn> = (0..=n)
        .into_par_iter()
        .map(|i| t_column_oracle(basis, i))
        .collect::<Result<_>>()?;
    TruncatedOperator::from_columns(n, full, max_bits)
}

impl TruncatedOperator {
    /// Assembles a truncation from untruncated columns `0..=n`.
    pub fn from_columns(n: u64, full: Vec<SparseColumn>, max_bits: u32) -> Result<Self> {
        assert_eq!(full.len() as u64, n + 1, "one column per index");
        let splits = full
            .par_iter()
            .map(|c| modulus_split(c, max_bits))
            .collect::<Result<Vec<_>>>()?;
        let mut violations = Vec::new();
        let mut hess = true;
        let mut sub = true;
        for c in &full {
            if let Some(k) = c.entries.keys().find(|&&k| k > c.i + 1) {
                hess = false;
                violations.push(format!("entry ({k}, {}) below the subdiagonal", c.i));
            }
        }
        let flagged = full.iter().filter(|c| c.max_row().is_some_and(|k| k > n)).map(|c| c.i).collect();
        let mut out = Self {
            n,
            t: full.iter().map(|c| c.truncated(n)).collect(),
            plus: splits.iter().map(|s| s.positive.truncated(n)).collect(),
            minus: splits.iter().map(|s| s.negative.truncated(n)).collect(),
            modulus: splits.iter().map(|s| s.modulus.truncated(n)).collect(),
            signs: splits.into_iter().map(|s| s.signs).collect(),
            flagged,
            structure: StructureReport {
                hessenberg: Verdict::Pass,
                subdiagonal_positive: Verdict::Pass,
                lattice: Verdict::Pass,
                violations: Vec::new(),
            },
        };
        for i in 0..n {
            if out.signs[i as usize].get(&(i + 1)) != Some(&Sign::Positive) {
                sub = false;
                violations.push(format!("subdiagonal entry ({}, {i}) is not positive", i + 1));
            }
        }
        let lattice = out.lattice_violations();
        out.structure = StructureReport {
            hessenberg: Verdict::from_bool(hess),
            subdiagonal_positive: Verdict::from_bool(sub),
            lattice: Verdict::from_bool(lattice.is_empty()),
            violations: violations.into_iter().chain(lattice).collect(),
        };
        Ok(out)
    }

    fn lattice_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let zero = ExactSum::zero();
        for i in 0..=self.n as usize {
            let rows: std::collections::BTreeSet<u64> = [&self.t[i], &self.plus[i], &self.minus[i], &self.modulus[i]]
                .iter()
                .flat_map(|c| c.entries.keys().copied())
                .collect();
            for k in rows {
                let get = |c: &SparseColumn| c.get(k).cloned().unwrap_or_default();
                let (t, p, m, a) = (get(&self.t[i]), get(&self.plus[i]), get(&self.minus[i]), get(&self.modulus[i]));
                if !(&p - &m).value_eq(&t) {
                    out.push(format!("T != T+ - T- at ({k}, {i})"));
                }
                if !(&p + &m).value_eq(&a) {
                    out.push(format!("|T| != T+ + T- at ({k}, {i})"));
                }
                if !p.value_eq(&zero) && !m.value_eq(&zero) {
                    out.push(format!("T+ and T- both nonzero at ({k}, {i})"));
                }
            }
        }
        out
    }

    /// Largest index `N`; the matrix is `(N+1) x (N+1)`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.n as usize + 1
    }

    pub fn part(&self, part: Part) -> &[SparseColumn] {
        match part {
            Part::T => &self.t,
            Part::Plus => &self.plus,
            Part::Minus => &self.minus,
            Part::Modulus => &self.modulus,
        }
    }

    /// Columns whose untruncated image reaches rows beyond `N`.
    pub fn flagged(&self) -> &[u64] {
        &self.flagged
    }

    pub fn structure(&self) -> &StructureReport {
        &self.structure
    }

    /// Sign of entry `(row, col)` of `T`.
    pub fn sign(&self, row: u64, col: u64) -> Sign {
        self.signs
            .get(col as usize)
            .and_then(|s| s.get(&row))
            .copied()
            .unwrap_or(Sign::Zero)
    }

    /// `(row, col, value)` over the nonzero entries of a part, column-major.
    pub fn entries(&self, part: Part) -> impl Iterator<Item = (u64, u64, &ExactSum)> {
        self.part(part)
            .iter()
            .flat_map(|c| c.entries.iter().map(move |(k, v)| (*k, c.i, v)))
    }

    pub fn nnz(&self, part: Part) -> usize {
        self.part(part).iter().map(|c| c.entries.len()).sum()
    }

    /// Nonzero pattern `(row, col)`.
    pub fn pattern(&self, part: Part) -> Vec<(usize, usize)> {
        self.entries(part).map(|(k, i, _)| (k as usize, i as usize)).collect()
    }

    /// Entries evaluated once at `bits` and rounded to the nearest double.
    pub fn triplets_f64(&self, part: Part, bits: u32) -> Vec<(usize, usize, f64)> {
        let entries: Vec<_> = self.entries(part).collect();
        entries
            .par_iter()
            .map(|(k, i, v)| (*k as usize, *i as usize, evaluate(v, bits).midpoint_f64()))
            .collect()
    }

    pub fn triplets_default(&self, part: Part) -> Vec<(usize, usize, f64)> {
        self.triplets_f64(part, DEFAULT_EVAL_BITS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthSequence;
    use crate::scalars::MAX_COMPARE_BITS;

    fn basis() -> Basis {
        Basis::new(GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap())
    }

    #[test]
    fn two_by_two() {
        let t = truncate(&basis(), 1, MAX_COMPARE_BITS).unwrap();
        assert_eq!(t.dimension(), 2);
        let e: Vec<_> = t.entries(Part::T).map(|(k, i, _)| (k, i)).collect();
        // T f_1 = f_2 + f_0; row 2 drops out
        assert_eq!(e, vec![(1, 0), (0, 1)]);
        assert_eq!(t.flagged(), &[1]);
    }

    #[test]
    fn structure_holds_on_the_first_block() {
        let t = truncate(&basis(), 5, MAX_COMPARE_BITS).unwrap();
        let s = t.structure();
        assert!(s.hessenberg.is_pass() && s.subdiagonal_positive.is_pass() && s.lattice.is_pass());
        assert_eq!(t.flagged(), &[5]);
        // negative entries: (1, 2) from the A endpoint and (3, 5) from the C endpoint
        let neg: Vec<_> = t.entries(Part::Minus).map(|(k, i, _)| (k, i)).collect();
        assert_eq!(neg, vec![(1, 2), (3, 5)]);
    }

    #[test]
    fn refuses_the_last_index() {
        assert!(matches!(truncate(&basis(), 26, MAX_COMPARE_BITS), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn part_names() {
        for p in Part::ALL {
            assert_eq!(p.to_string().parse::<Part>().unwrap(), p);
        }
        assert!("X".parse::<Part>().is_err());
    }
}
