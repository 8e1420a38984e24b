//! Column `l1` norms of `T` against 1. Interior clause-B columns of the
//! first level exceed 1 for every sequence.

use readop::basis::Basis;
use readop::certify::check_column_norms;
use readop::scalars::{approx, MAX_COMPARE_BITS};
use readop::{generate_rapid, GrowthSequence};

fn main() -> readop::Result<()> {
    for d in [GrowthSequence::from_interleaved(&[2, 3, 6, 7])?, generate_rapid(2, None, MAX_COMPARE_BITS)?] {
        let r = check_column_norms(&Basis::new(d.clone()), 25, MAX_COMPARE_BITS)?;
        println!("d = {d}");
        for c in &r.columns {
            println!("  ||T f_{:<2}||_1 = {:<24} {:?}", c.i, approx(&c.norm), c.verdict);
        }
        println!("  worst column {}, {} failures", r.worst, r.failures.len());
    }
    Ok(())
}
