//! Certifies `sum_k ||T-_(k)||_inf < 2` for a generated sequence and shows
//! the failing certificate of the small one.

use readop::certify::{certify_nuclear, nuclear_norm_upper};
use readop::basis::Basis;
use readop::operator::tneg_from_endpoint_columns;
use readop::scalars::MAX_COMPARE_BITS;
use readop::{generate_rapid, GrowthSequence};

fn main() -> readop::Result<()> {
    let d = generate_rapid(3, None, MAX_COMPARE_BITS)?;
    let cert = certify_nuclear(&d, 2, MAX_COMPARE_BITS)?;
    for c in &cert.row_checks {
        println!("{:<8} n={}: log2 {} <= log2 {} {:?}", c.name, c.n, c.log2_lhs, c.log2_rhs, c.verdict);
    }
    println!("finite part {}", cert.finite_enclosure);
    println!("total       {} < 2: {:?} ({})", cert.total_enclosure, cert.verdict, cert.stamp);

    // the same finite part from actual columns at the clause endpoints
    let v2 = d.v_u64(2).expect("v_2 fits");
    let tneg = tneg_from_endpoint_columns(&Basis::new(d), v2, MAX_COMPARE_BITS)?;
    let rows = tneg.iter().filter(|((k, _), _)| *k <= v2).map(|((k, i), v)| (*k, *i, v));
    let (sum, enc) = nuclear_norm_upper(rows, MAX_COMPARE_BITS)?;
    println!("from columns {enc}, equal: {}", sum.value_eq(&cert.finite_part));

    let small = certify_nuclear(&GrowthSequence::from_interleaved(&[2, 3, 6, 7])?, 2, MAX_COMPARE_BITS)?;
    println!("(2, 3, 6, 7): {:?}, {:?}", small.verdict, small.notes);
    Ok(())
}
