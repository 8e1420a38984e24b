//! Acceptance criteria, one line each.
//!
//! Runs without the test harness so that every line is printed. The process
//! fails when a criterion fails unexpectedly; the two known failures are
//! listed in `EXPECTED_FAILURES` with the reason and still print FAIL.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use readop::basis::{classify, Basis, Tag};
use readop::certify::certify_nuclear;
use readop::cli::{cmd_verify, DSource, RunConfig, Size};
use readop::operator::{
    modulus_split, t_column_closed, t_column_oracle, tneg_from_endpoint_columns, tneg_rows_closed, truncate, Part, TruncatedOperator,
};
use readop::scalars::{sign_of, ExactSum, Sign, DEFAULT_EVAL_BITS, MAX_COMPARE_BITS};
use readop::spectral::{irreducibility_check, power_iteration, without_row_zero, Triplets};
use readop::{generate_rapid, GrowthSequence, Verdict};

const EXPECTED_FAILURES: &[(u32, &str)] = &[
    (3, "(2, 3, 6, 7) has a_2 = v_1 + 1, so the index after a level-1 clause-A endpoint is not in clause B and the displayed values do not apply at level 2"),
    (9, "v_2 of the generated sequence is 7.3 million; the exhaustive sweep is correct but cannot meet 10 s on this machine"),
];

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

const RESIDUAL_TOL: f64 = 1e-8;
const NORMALIZATION_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn small() -> GrowthSequence {
    GrowthSequence::from_interleaved(&[2, 3, 6, 7]).unwrap()
}

fn rapid() -> GrowthSequence {
    generate_rapid(2, None, MAX_COMPARE_BITS).unwrap()
}

fn within(budget: Duration, t: Instant) -> (bool, String) {
    let e = t.elapsed();
    (e <= budget, format!("{:.2} s of {} s", e.as_secs_f64(), budget.as_secs()))
}

fn partition() -> Outcome {
    let t = Instant::now();
    let d = small();
    let mut ok = (1..=26).all(|i| classify(i, &d).is_ok());
    let spots: Vec<(u64, Tag, usize, usize)> = [(2, Tag::A, 1, 1), (5, Tag::C, 1, 1), (12, Tag::A, 2, 2), (26, Tag::C, 2, 2)]
        .into_iter()
        .chain((13..=19).map(|i| (i, Tag::C, 2, 1)))
        .chain((20..=25).map(|i| (i, Tag::D, 2, 1)))
        .collect();
    for (i, tag, n, r) in &spots {
        let c = classify(*i, &d).unwrap();
        ok &= c.tag == *tag && c.n == *n && c.r == *r;
    }
    let (fast, time) = within(Duration::from_secs(1), t);
    Outcome {
        pass: ok && fast,
        detail: format!("indices 1..=26 each in one clause, {} spot classes; {time}", spots.len()),
    }
}

fn columns_agree(b: &Basis, range: std::ops::RangeInclusive<u64>) -> Vec<u64> {
    range
        .into_par_iter()
        .filter(|&i| !t_column_closed(b, i).unwrap().value_eq(&t_column_oracle(b, i).unwrap()))
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let bad_small = columns_agree(&Basis::new(small()), 0..=25);
    let d = rapid();
    let top = d.v_u64(1).unwrap().min(5000);
    let bad_rapid = columns_agree(&Basis::new(d), 0..=top);
    let (fast, time) = within(Duration::from_secs(60), t);
    Outcome {
        pass: bad_small.is_empty() && bad_rapid.is_empty() && fast,
        detail: format!(
            "(2, 3, 6, 7) columns 0..=25: {} differ; generated columns 0..={top}: {} differ; {time}",
            bad_small.len(),
            bad_rapid.len()
        ),
    }
}

fn actual_tneg(d: &GrowthSequence, top: u64) -> BTreeMap<(u64, u64), ExactSum> {
    let b = Basis::new(d.clone());
    (0..=top)
        .into_par_iter()
        .flat_map_iter(|i| {
            let s = modulus_split(&t_column_oracle(&b, i).unwrap(), MAX_COMPARE_BITS).unwrap();
            s.negative.entries.into_iter().map(move |(k, v)| ((k, i), v))
        })
        .collect()
}

/// Actual negative entries in columns `0..=top` against the closed families,
/// as the `(row, col)` positions that disagree.
fn tneg_mismatches(
    d: &GrowthSequence,
    actual: &BTreeMap<(u64, u64), ExactSum>,
    top: u64,
) -> (Vec<(u64, u64)>, usize, bool) {
    let col0_empty = !actual.keys().any(|&(_, i)| i == 0);
    let levels = d.level_of(top).unwrap().min(d.levels());
    let mut closed = BTreeMap::new();
    for row in tneg_rows_closed(d, levels, MAX_COMPARE_BITS).unwrap().values() {
        for e in &row.entries {
            let col: u64 = e.col.clone().try_into().unwrap();
            if col <= top {
                closed.insert((row.row.clone().try_into().unwrap(), col), ExactSum::from(e.value.clone()));
            }
        }
    }
    let keys: std::collections::BTreeSet<_> = actual.keys().chain(closed.keys()).copied().collect();
    let bad = keys
        .iter()
        .filter(|k| match (actual.get(k), closed.get(k)) {
            (Some(a), Some(c)) => !a.value_eq(c),
            _ => true,
        })
        .copied()
        .collect();
    (bad, keys.len(), col0_empty)
}

fn tminus_support() -> Outcome {
    let t = Instant::now();
    // every column off the clause endpoints is a positive multiple of the
    // next basis vector, so the endpoints carry the whole negative part
    let d = generate_rapid(3, None, MAX_COMPARE_BITS).unwrap();
    let top = d.v_u64(2).unwrap();
    let actual = tneg_from_endpoint_columns(&Basis::new(d.clone()), top, MAX_COMPARE_BITS).unwrap();
    let actual = actual.into_iter().filter(|((k, _), _)| *k <= top).collect();
    let (bad_rapid, n_rapid, c0_rapid) = tneg_mismatches(&d, &actual, top);
    let dense = rapid();
    let v1 = dense.v_u64(1).unwrap();
    let (bad_dense, _, _) = tneg_mismatches(&dense, &actual_tneg(&dense, v1), v1);
    let s = small();
    let (bad_small, n_small, c0_small) = tneg_mismatches(&s, &actual_tneg(&s, 25), 25);
    // every mismatch of the small sequence sits in a column of its
    // degenerate level
    let confined = bad_small.iter().all(|&(_, col)| s.degenerate_levels().contains(&s.level_of(col).unwrap()));
    assert!(
        bad_rapid.is_empty() && bad_dense.is_empty() && c0_rapid && c0_small,
        "generic part of criterion 3 broke"
    );
    let (_, time) = within(Duration::from_secs(60), t);
    assert!(confined, "mismatches outside the degenerate level: {bad_small:?}");
    Outcome {
        pass: bad_small.is_empty(),
        detail: format!(
            "generated d, columns 0..={top}: {n_rapid} entries all exact (every column to {v1}); (2, 3, 6, 7), columns 0..=25: {} of {n_small} entries off the displayed families {:?}, all in degenerate level 2; column 0 of T- empty for both; {time}",
            bad_small.len(),
            bad_small
        ),
    }
}

fn nuclear() -> Outcome {
    let t = Instant::now();
    let c = certify_nuclear(&rapid(), 2, MAX_COMPARE_BITS).unwrap();
    let rows_ok = c.row_checks.iter().all(|r| r.verdict.is_pass());
    let (fast, time) = within(Duration::from_secs(60), t);
    Outcome {
        pass: c.verdict == Verdict::Pass && c.bound_verdict == Verdict::Pass && rows_ok && fast,
        detail: format!(
            "total in {} < 2 decided exactly, {} row inequalities hold, {}; {time}",
            c.total_enclosure,
            c.row_checks.len(),
            c.stamp
        ),
    }
}

fn truncations() -> Vec<TruncatedOperator> {
    let small = Basis::new(small().extend_minimal());
    let mut out: Vec<_> = (1..=26).map(|n| truncate(&small, n, MAX_COMPARE_BITS).unwrap()).collect();
    let d = rapid();
    out.push(truncate(&Basis::new(d.clone()), d.v_u64(1).unwrap(), MAX_COMPARE_BITS).unwrap());
    out
}

fn structure(ops: &[TruncatedOperator]) -> Outcome {
    let mut entries = 0;
    let mut ok = true;
    for op in ops {
        for (k, i, v) in op.entries(Part::T) {
            entries += 1;
            ok &= k <= i + 1;
            if k == i + 1 {
                ok &= sign_of(v, MAX_COMPARE_BITS) == Some(Sign::Positive);
            }
        }
        for i in 0..op.n() {
            ok &= op.part(Part::T)[i as usize].get(i + 1).is_some();
        }
        let s = op.structure();
        ok &= s.hessenberg.is_pass() && s.subdiagonal_positive.is_pass();
    }
    Outcome {
        pass: ok,
        detail: format!("{} truncations, {entries} entries of T checked exactly", ops.len()),
    }
}

fn lattice(ops: &[TruncatedOperator]) -> Outcome {
    let mut checked = 0;
    let mut ok = true;
    for op in ops {
        for i in 0..op.dimension() {
            let col = |p: Part| &op.part(p)[i];
            let rows: std::collections::BTreeSet<u64> =
                Part::ALL.iter().flat_map(|&p| col(p).entries.keys().copied()).collect();
            for k in rows {
                let get = |p: Part| col(p).get(k).cloned().unwrap_or_default();
                let (t, plus, minus, modulus) = (get(Part::T), get(Part::Plus), get(Part::Minus), get(Part::Modulus));
                ok &= (&plus - &minus).value_eq(&t);
                ok &= (&plus + &minus).value_eq(&modulus);
                ok &= plus.is_zero() || minus.is_zero();
                checked += 1;
            }
        }
        ok &= op.structure().lattice.is_pass();
    }
    Outcome {
        pass: ok,
        detail: format!("{checked} entries satisfy T = T+ - T-, |T| = T+ + T-, min(T+, T-) = 0"),
    }
}

fn perron() -> Outcome {
    let t = Instant::now();
    let b = Basis::new(small().extend_minimal());
    let op = truncate(&b, 26, MAX_COMPARE_BITS).unwrap();
    let mut ok = true;
    let mut lambdas = Vec::new();
    for part in [Part::Modulus, Part::Plus] {
        let m = Triplets::from_operator(&op, part, DEFAULT_EVAL_BITS);
        let r = power_iteration(&m, part, 1e-13, 100_000, DEFAULT_EVAL_BITS).unwrap();
        let scc = irreducibility_check(&m.pattern(), m.dim).component_of_zero;
        ok &= r.converged && r.residual < RESIDUAL_TOL && r.eigenvalue > 0.0;
        ok &= scc.iter().all(|&i| r.eigenvector[i] > 0.0);
        ok &= (r.eigenvector.iter().sum::<f64>() - 1.0).abs() < NORMALIZATION_TOL;
        lambdas.push((r.eigenvalue, r.residual));
    }
    ok &= lambdas[1].0 <= lambdas[0].0;
    let (fast, time) = within(Duration::from_secs(10), t);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "N = 26: lambda(|T|) = {:.10} (residual {:.1e}), lambda(T+) = {:.10} (residual {:.1e}); truncation witness only; {time}",
            lambdas[0].0, lambdas[0].1, lambdas[1].0, lambdas[1].1
        ),
    }
}

fn irreducibility() -> Outcome {
    let t = Instant::now();
    let b = Basis::new(small().extend_minimal());
    let mut ok = true;
    for n in [5, 26] {
        let op = truncate(&b, n, MAX_COMPARE_BITS).unwrap();
        for part in [Part::Modulus, Part::Plus] {
            let p = op.pattern(part);
            ok &= irreducibility_check(&p, op.dimension()).strongly_connected;
            ok &= !irreducibility_check(&without_row_zero(&p), op.dimension()).strongly_connected;
        }
    }
    let (fast, time) = within(Duration::from_secs(1), t);
    Outcome {
        pass: ok && fast,
        detail: format!("|T| and T+ strongly connected at N = 5 and N = 26, not after deleting row 0; {time}"),
    }
}

fn round_trip() -> Outcome {
    let t = Instant::now();
    let b = Basis::new(small());
    let small_ok = (0..=26).all(|i| b.f_in_e_roundtrip(i).unwrap().ok);
    let d = rapid();
    let v2 = d.v_u64(2).unwrap();
    let b = Basis::new(d);
    let bad = (0..=v2)
        .into_par_iter()
        .filter(|&i| !b.f_in_e_roundtrip_uncached(i).unwrap().ok)
        .count();
    let (fast, time) = within(Duration::from_secs(10), t);
    Outcome {
        pass: small_ok && bad == 0 && fast,
        detail: format!(
            "(2, 3, 6, 7) indices 0..=26 exact: {small_ok}; generated indices 0..={v2} exhaustively, {bad} failures; {time}"
        ),
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    small().save(&path).unwrap();
    let config = RunConfig::new(DSource::File(path), Some(Size::Block(2)), dir.path());
    let a = cmd_verify(&config).unwrap().to_json().unwrap();
    let b = cmd_verify(&config).unwrap().to_json().unwrap();
    Outcome {
        pass: a == b,
        detail: format!("two verify runs, {} bytes each, identical: {}", a.len(), a == b),
    }
}

fn main() {
    let ops = truncations();
    let criteria: Vec<Criterion> = vec![
        (1, "partition", Box::new(partition)),
        (2, "oracle equivalence", Box::new(oracle_equivalence)),
        (3, "T- support and values", Box::new(tminus_support)),
        (4, "nuclear certificate", Box::new(nuclear)),
        (5, "matrix structure", Box::new(|| structure(&ops))),
        (6, "lattice identities", Box::new(|| lattice(&ops))),
        (7, "Perron witness", Box::new(perron)),
        (8, "irreducibility", Box::new(irreducibility)),
        (9, "round-trip invertibility", Box::new(round_trip)),
        (10, "determinism", Box::new(determinism)),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let o = run();
        let expected = EXPECTED_FAILURES.iter().find(|e| e.0 == id);
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {status} {name}: {}", o.detail);
        match (o.pass, expected) {
            (false, Some((_, why))) => println!("             known failure: {why}"),
            (false, None) => unexpected.push(id),
            _ => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
