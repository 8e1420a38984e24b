//! Columns of `T` built twice, by inverting the clause relations and from
//! the per-clause closed forms, then split into `T+`, `T-` and `|T|` and
//! written in coordinate form.

use readop::basis::Basis;
use readop::operator::{export_coordinates, modulus_split, t_column_closed, t_column_oracle, truncate, Part};
use readop::scalars::{approx, MAX_COMPARE_BITS};
use readop::GrowthSequence;

fn main() -> readop::Result<()> {
    let basis = Basis::new(GrowthSequence::from_interleaved(&[2, 3, 6, 7])?);
    for i in [0, 4, 11, 12, 19, 25] {
        let oracle = t_column_oracle(&basis, i)?;
        let closed = t_column_closed(&basis, i)?;
        let split = modulus_split(&oracle, MAX_COMPARE_BITS)?;
        let terms: Vec<String> = oracle
            .entries
            .iter()
            .map(|(k, v)| format!("{} f_{k}", approx(v)))
            .collect();
        println!("T f_{i} = {}", terms.join(" + "));
        println!(
            "  closed form agrees: {}, negative rows: {:?}",
            oracle.value_eq(&closed),
            split.negative.entries.keys().collect::<Vec<_>>()
        );
    }
    let op = truncate(&basis, 5, MAX_COMPARE_BITS)?;
    println!("truncation N = 5: {:?}", op.structure());
    println!("columns reaching past N: {:?}", op.flagged());
    export_coordinates(&op, Part::Minus, std::io::stdout())?;
    Ok(())
}
