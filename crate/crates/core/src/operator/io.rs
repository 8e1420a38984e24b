use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::truncation::{Part, TruncatedOperator};
use crate::error::{Error, Result};
use crate::scalars::{approx, sign_of, sum_from_json, sum_to_json, ExactSum, Sign, MAX_COMPARE_BITS};

#[derive(Debug, Serialize, Deserialize)]
struct CoordRow {
    row: u64,
    col: u64,
    sign: i8,
    approx_decimal: String,
    exact_json: String,
}

/// One imported matrix entry.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordEntry {
    pub row: u64,
    pub col: u64,
    pub value: ExactSum,
}

/// Coordinate-format CSV of one part: `row,col,sign,approx_decimal,exact_json`.
pub fn export_coordinates<W: Write>(op: &TruncatedOperator, part: Part, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (row, col, v) in op.entries(part) {
        let sign = match part {
            Part::T => op.sign(row, col),
            _ => Sign::Positive,
        };
        w.serialize(CoordRow {
            row,
            col,
            sign: sign.as_i8(),
            approx_decimal: approx(v),
            exact_json: sum_to_json(v),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a coordinate CSV back, checking that each recorded sign matches the
/// exact value.
pub fn import_coordinates<R: Read>(input: R) -> Result<Vec<CoordEntry>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        let rec: CoordRow = rec?;
        let value = sum_from_json(&rec.exact_json)?;
        let sign = sign_of(&value, MAX_COMPARE_BITS);
        if sign.map(|s| s.as_i8()) != Some(rec.sign) {
            return Err(Error::Parse(format!(
                "entry ({}, {}) recorded with sign {} but its value disagrees",
                rec.row, rec.col, rec.sign
            )));
        }
        out.push(CoordEntry {
            row: rec.row,
            col: rec.col,
            value,
        });
    }
    Ok(out)
}

/// Human-readable differences between two coordinate lists.
pub fn diff_coordinates(left: &[CoordEntry], right: &[CoordEntry]) -> Vec<String> {
    use std::collections::BTreeMap;
    let index = |v: &[CoordEntry]| -> BTreeMap<(u64, u64), ExactSum> {
        v.iter().map(|e| ((e.row, e.col), e.value.clone())).collect()
    };
    let (l, r) = (index(left), index(right));
    let mut out = Vec::new();
    for (k, v) in &l {
        match r.get(k) {
            None => out.push(format!("({}, {}) only on the left", k.0, k.1)),
            Some(w) if !v.value_eq(w) => out.push(format!("({}, {}) differs: {} vs {}", k.0, k.1, approx(v), approx(w))),
            _ => {}
        }
    }
    for k in r.keys().filter(|k| !l.contains_key(k)) {
        out.push(format!("({}, {}) only on the right", k.0, k.1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Basis;
    use crate::growth::GrowthSequence;
    use crate::operator::truncate;

    #[test]
    fn csv_round_trip() {
        let b = Basis::new(GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap());
        let op = truncate(&b, 12, MAX_COMPARE_BITS).unwrap();
        for part in Part::ALL {
            let mut buf = Vec::new();
            export_coordinates(&op, part, &mut buf).unwrap();
            let back = import_coordinates(buf.as_slice()).unwrap();
            assert_eq!(back.len(), op.nnz(part));
            let orig: Vec<_> = op
                .entries(part)
                .map(|(row, col, v)| CoordEntry { row, col, value: v.clone() })
                .collect();
            assert!(diff_coordinates(&orig, &back).is_empty());
        }
    }

    #[test]
    fn diff_reports_changes() {
        let e = |row, v: i64| CoordEntry {
            row,
            col: 0,
            value: ExactSum::from(crate::scalars::ExactScalar::from_int(v)),
        };
        let d = diff_coordinates(&[e(1, 1), e(2, 1)], &[e(1, 2), e(3, 1)]);
        assert_eq!(d.len(), 3);
    }
}
