//! Strong connectivity of the patterns of `|T|` and `T+`, the two mechanisms
//! behind it, and the negative control without row 0.

use readop::basis::Basis;
use readop::operator::{truncate, Part};
use readop::scalars::MAX_COMPARE_BITS;
use readop::spectral::{irreducibility_check, tminus_eigenvector_check, without_row_zero};
use readop::GrowthSequence;

fn main() -> readop::Result<()> {
    let basis = Basis::new(GrowthSequence::from_interleaved(&[2, 3, 6, 7])?.extend_minimal());
    println!("T- f_0 = 0: {}", tminus_eigenvector_check(&basis)?);
    for n in [5, 26] {
        let op = truncate(&basis, n, MAX_COMPARE_BITS)?;
        for part in Part::ALL {
            let p: Vec<_> = op.pattern(part);
            let r = irreducibility_check(&p, op.dimension());
            let c = irreducibility_check(&without_row_zero(&p), op.dimension());
            println!(
                "N={n:>2} {part:<3} connected {:<5} components {:<3} subdiagonal {:?} row-0 columns {:?}; without row 0: {}",
                r.strongly_connected,
                r.scc_sizes.len(),
                r.subdiagonal,
                r.row0_columns,
                c.strongly_connected
            );
        }
    }
    Ok(())
}
