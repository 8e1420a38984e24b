//! Perron data of `|T|` and `T+` on block-aligned truncations, next to the
//! root sequence `||M^k||^(1/k)`. Numerical witnesses only.

use readop::basis::Basis;
use readop::operator::{truncate, Part};
use readop::scalars::{DEFAULT_EVAL_BITS, MAX_COMPARE_BITS};
use readop::spectral::{power_iteration, power_norm_sequence, Triplets};
use readop::GrowthSequence;

fn main() -> readop::Result<()> {
    let d = GrowthSequence::from_interleaved(&[2, 3, 6, 7])?.extend_minimal();
    let basis = Basis::new(d);
    for n in [5, 26] {
        let op = truncate(&basis, n, MAX_COMPARE_BITS)?;
        for part in [Part::Modulus, Part::Plus] {
            let m = Triplets::from_operator(&op, part, DEFAULT_EVAL_BITS);
            let r = power_iteration(&m, part, 1e-13, 100_000, DEFAULT_EVAL_BITS)?;
            let roots = power_norm_sequence(&m, 64);
            let min = r.eigenvector.iter().cloned().fold(f64::INFINITY, f64::min);
            println!(
                "N={n:>2} {part:<3} lambda {:.10} residual {:.2e} min v {:.2e}  ||M^64||^(1/64) {:.6}",
                r.eigenvalue,
                r.residual,
                min,
                roots[63]
            );
        }
        let t = Triplets::from_operator(&op, Part::T, DEFAULT_EVAL_BITS);
        println!("N={n:>2} T   ||T^64||^(1/64) {:.6}", power_norm_sequence(&t, 64)[63]);
    }
    Ok(())
}
