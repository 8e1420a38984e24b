use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::column::SparseColumn;
use crate::error::{Error, Result};
use crate::scalars::{sign_of, ExactSum, Sign};

/// Entrywise lattice parts of one column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitColumn {
    pub positive: SparseColumn,
    pub negative: SparseColumn,
    pub modulus: SparseColumn,
    pub signs: BTreeMap<u64, Sign>,
}

/// Positive part, negative part (as nonnegative values) and modulus of a
/// column. Single-term entries are signed structurally; sums are compared
/// against zero with precision escalation up to `max_bits`.
pub fn modulus_split(col: &SparseColumn, max_bits: u32) -> Result<SplitColumn> {
    let mut pos = BTreeMap::new();
    let mut neg = BTreeMap::new();
    let mut modulus = BTreeMap::new();
    let mut signs = BTreeMap::new();
    for (&row, v) in &col.entries {
        let s = sign_of(v, max_bits).ok_or(Error::UndecidableSign {
            row,
            col: col.i,
            bits: max_bits,
        })?;
        match s {
            Sign::Positive => {
                pos.insert(row, v.clone());
                modulus.insert(row, v.clone());
            }
            Sign::Negative => {
                let m: ExactSum = -v;
                neg.insert(row, m.clone());
                modulus.insert(row, m);
            }
            Sign::Zero => continue,
        }
        signs.insert(row, s);
    }
    Ok(SplitColumn {
        positive: SparseColumn::new(col.i, pos),
        negative: SparseColumn::new(col.i, neg),
        modulus: SparseColumn::new(col.i, modulus),
        signs,
    })
}
