//! Numerical witnesses on truncations: Perron data of the nonnegative parts,
//! norms of powers and strong connectivity of nonzero patterns.
//!
//! Nothing here proves anything about the infinite operator; reports carry
//! the label `witness`.

use std::io::Write;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::operator::{modulus_split, t_column_oracle, Part, TruncatedOperator};
use crate::scalars::MAX_COMPARE_BITS;
use crate::verdict::Verdict;

pub const WITNESS: &str = "witness";

/// Sparse matrix as `(row, col, value)` triplets of dimension `dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triplets {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(dim: usize, entries: Vec<(usize, usize, f64)>) -> Self {
        assert!(entries.iter().all(|&(k, i, _)| k < dim && i < dim), "entry outside the matrix");
        Self { dim, entries }
    }

    pub fn from_operator(op: &TruncatedOperator, part: Part, eval_bits: u32) -> Self {
        Self::new(op.dimension(), op.triplets_f64(part, eval_bits))
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(k, i, x) in &self.entries {
            out[k] += x * v[i];
        }
        out
    }

    pub fn pattern(&self) -> Vec<(usize, usize)> {
        self.entries.iter().filter(|e| e.2 != 0.0).map(|&(k, i, _)| (k, i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub operator: Part,
    pub dimension: usize,
    pub eigenvalue: f64,
    /// Nonnegative, `l1`-normalized.
    pub eigenvector: Vec<f64>,
    /// `||M v - lambda v||_1`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub eval_bits: u32,
    pub label: String,
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Power iteration `v <- M v / ||M v||_1` from the uniform vector, stopping
/// when successive eigenvalue estimates differ by less than `tol`.
pub fn power_iteration(m: &Triplets, operator: Part, tol: f64, max_iter: usize, eval_bits: u32) -> Result<SpectralReport> {
    if !operator.is_nonnegative() || m.entries.iter().any(|e| e.2 < 0.0) {
        return Err(Error::Usage(format!("{operator} is not entrywise nonnegative")));
    }
    if m.dim < 2 {
        return Err(Error::Usage("power iteration needs N >= 1".into()));
    }
    let mut v = vec![1.0 / m.dim as f64; m.dim];
    let mut lambda = f64::NAN;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let w = m.apply(&v);
        let norm = l1(&w);
        if norm == 0.0 {
            return Err(Error::ZeroImage);
        }
        iterations += 1;
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let settled = (norm - lambda).abs() < tol;
        lambda = norm;
        v = next;
        if settled {
            converged = true;
            break;
        }
    }
    let mv = m.apply(&v);
    let residual = mv.iter().zip(&v).map(|(a, b)| (a - lambda * b).abs()).sum();
    Ok(SpectralReport {
        operator,
        dimension: m.dim,
        eigenvalue: lambda,
        eigenvector: v,
        residual,
        iterations,
        converged,
        eval_bits,
        label: WITNESS.into(),
    })
}

/// `||M^k||_1^{1/k}` for `k = 1..=k_max`, with powers rescaled at every step
/// so that neither overflow nor underflow can occur.
pub fn power_norm_sequence(m: &Triplets, k_max: usize) -> Vec<f64> {
    assert!(k_max >= 1, "k_max must be positive");
    let n = m.dim;
    // columns of the current power, scaled by 2^{-log_scale}
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut log_scale = 0.0f64;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        cols = cols.iter().map(|c| m.apply(c)).collect();
        let norm = cols.iter().map(|c| l1(c)).fold(0.0, f64::max);
        if norm == 0.0 {
            out.extend(std::iter::repeat_n(0.0, k_max - k + 1));
            break;
        }
        log_scale += norm.log2();
        for c in &mut cols {
            c.iter_mut().for_each(|x| *x /= norm);
        }
        out.push((log_scale / k as f64).exp2());
    }
    out
}

/// Strong connectivity of a nonzero pattern, with the two mechanisms behind
/// it reported separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibilityReport {
    pub dimension: usize,
    pub strongly_connected: bool,
    /// Component sizes, largest first.
    pub scc_sizes: Vec<usize>,
    /// Indices in the component of 0, ascending.
    pub component_of_zero: Vec<usize>,
    /// Every `(i+1, i)` entry present.
    pub subdiagonal: Verdict,
    /// Columns with an entry in row 0.
    pub row0_columns: Vec<usize>,
}

/// SCC analysis of the graph with an edge `j -> k` for each entry `(k, j)`.
pub fn irreducibility_check(pattern: &[(usize, usize)], dim: usize) -> IrreducibilityReport {
    let mut g = DiGraph::<(), ()>::with_capacity(dim, pattern.len());
    let nodes: Vec<_> = (0..dim).map(|_| g.add_node(())).collect();
    for &(k, j) in pattern {
        g.add_edge(nodes[j], nodes[k], ());
    }
    let sccs = tarjan_scc(&g);
    let mut scc_sizes: Vec<usize> = sccs.iter().map(Vec::len).collect();
    scc_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let mut component_of_zero: Vec<usize> = sccs
        .iter()
        .find(|c| c.iter().any(|n| n.index() == 0))
        .map(|c| c.iter().map(|n| n.index()).collect())
        .unwrap_or_default();
    component_of_zero.sort_unstable();
    let present: std::collections::HashSet<(usize, usize)> = pattern.iter().copied().collect();
    let subdiagonal = Verdict::from_bool((0..dim.saturating_sub(1)).all(|i| present.contains(&(i + 1, i))));
    let mut row0_columns: Vec<usize> = pattern.iter().filter(|e| e.0 == 0).map(|e| e.1).collect();
    row0_columns.sort_unstable();
    row0_columns.dedup();
    IrreducibilityReport {
        dimension: dim,
        strongly_connected: dim > 0 && scc_sizes.len() == 1,
        scc_sizes,
        component_of_zero,
        subdiagonal,
        row0_columns,
    }
}

/// The pattern with every row-0 entry deleted.
pub fn without_row_zero(pattern: &[(usize, usize)]) -> Vec<(usize, usize)> {
    pattern.iter().copied().filter(|e| e.0 != 0).collect()
}

/// Column 0 of the negative part is empty, so `f_0` is an eigenvector of
/// `T-` with eigenvalue 0.
pub fn tminus_eigenvector_check(basis: &Basis) -> Result<bool> {
    let split = modulus_split(&t_column_oracle(basis, 0)?, MAX_COMPARE_BITS)?;
    Ok(split.negative.is_empty())
}

/// `index,value` rows.
pub fn write_eigenvector_csv<W: Write>(report: &SpectralReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "value"])?;
    for (i, x) in report.eigenvector.iter().enumerate() {
        w.write_record([i.to_string(), format!("{x:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// `k,norm_root` rows for plotting.
pub fn write_powers_csv<W: Write>(roots: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "norm_root"])?;
    for (k, x) in roots.iter().enumerate() {
        w.write_record([(k + 1).to_string(), format!("{x:e}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthSequence;
    use crate::operator::truncate;
    use crate::scalars::DEFAULT_EVAL_BITS;

    #[test]
    fn perron_pair_of_a_small_matrix() {
        // [[1, 2], [3, 4]]: eigenvalue (5 + sqrt 33)/2
        let m = Triplets::new(2, vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 1, 4.0)]);
        let r = power_iteration(&m, Part::Modulus, 1e-14, 1000, 53).unwrap();
        assert!(r.converged);
        assert!((r.eigenvalue - (5.0 + 33f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((l1(&r.eigenvector) - 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-10);
        assert_eq!(r.label, "witness");
    }

    #[test]
    fn nilpotent_matrix_has_zero_image() {
        let m = Triplets::new(2, vec![(1, 0, 1.0)]);
        assert!(matches!(power_iteration(&m, Part::Minus, 1e-12, 10, 53), Err(Error::ZeroImage)));
        let signed = Triplets::new(2, vec![(1, 0, -1.0)]);
        assert!(matches!(power_iteration(&signed, Part::T, 1e-12, 10, 53), Err(Error::Usage(_))));
    }

    #[test]
    fn power_norms() {
        let z = Triplets::new(3, vec![]);
        assert_eq!(power_norm_sequence(&z, 4), vec![0.0; 4]);
        let d = Triplets::new(2, vec![(0, 0, 0.5), (1, 1, 3.0)]);
        for x in power_norm_sequence(&d, 10) {
            assert!((x - 3.0).abs() < 1e-12);
        }
        let big = Triplets::new(1, vec![(0, 0, 1e300)]);
        assert!((power_norm_sequence(&big, 50)[49] / 1e300 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scc_of_a_cycle_and_its_control() {
        // 0 -> 1 -> 2 -> 0
        let p = vec![(1, 0), (2, 1), (0, 2)];
        let r = irreducibility_check(&p, 3);
        assert!(r.strongly_connected);
        assert_eq!(r.row0_columns, vec![2]);
        assert_eq!(r.subdiagonal, Verdict::Pass);
        let c = irreducibility_check(&without_row_zero(&p), 3);
        assert!(!c.strongly_connected);
        assert_eq!(c.scc_sizes, vec![1, 1, 1]);
    }

    #[test]
    fn first_block_of_the_small_sequence() {
        let b = Basis::new(GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap());
        assert!(tminus_eigenvector_check(&b).unwrap());
        let op = truncate(&b, 5, MAX_COMPARE_BITS).unwrap();
        let m = Triplets::from_operator(&op, Part::Modulus, DEFAULT_EVAL_BITS);
        let irr = irreducibility_check(&m.pattern(), m.dim);
        assert!(irr.strongly_connected);
        let r = power_iteration(&m, Part::Modulus, 1e-13, 100_000, DEFAULT_EVAL_BITS).unwrap();
        assert!(r.converged && r.eigenvalue > 0.0 && r.residual < 1e-8, "{r:?}");
        assert!(r.eigenvector.iter().all(|&x| x > 0.0));
    }
}
