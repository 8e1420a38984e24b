//! Clause table of the small sequence: which of the five clauses defines
//! each `f_i`, and the chain expansion of a few `e_k` over the `f` basis.

use readop::basis::Basis;
use readop::scalars::{approx, ExactSum};
use readop::GrowthSequence;

fn main() -> readop::Result<()> {
    let d = GrowthSequence::from_interleaved(&[2, 3, 6, 7])?;
    let basis = Basis::new(d);
    println!("{:>3} {:>3} {:>2} {:>2} {:>6}  f_i in terms of e", "i", "tag", "n", "r", "h");
    for i in 0..=26 {
        let row = basis.lambda_row(i)?;
        let c = &row.class;
        let h = c.h.as_ref().map(|h| h.to_string()).unwrap_or_default();
        let mut rhs = format!("{} e_{i}", approx(&ExactSum::from(row.diag.clone())));
        if let Some((j, x)) = &row.off {
            rhs += &format!(" + ({}) e_{j}", approx(&ExactSum::from(x.clone())));
        }
        println!("{i:>3} {:>3} {:>2} {:>2} {h:>6}  {rhs}", c.tag.to_string(), c.n, c.r);
    }
    for k in [6, 12, 13, 26] {
        let e = basis.e_in_f(k)?;
        let terms: Vec<String> = e
            .coeffs
            .iter()
            .map(|(j, c)| format!("{} f_{j}", approx(&ExactSum::from(c.clone()))))
            .collect();
        println!("e_{k} = {}", terms.join(" + "));
    }
    basis.write_debug_csv(26, std::io::stdout())?;
    Ok(())
}
