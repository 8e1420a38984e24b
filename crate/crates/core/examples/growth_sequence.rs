//! Generates a rapidly increasing growth sequence and audits both rapidity
//! inequalities exactly. The small sequence (2, 3, 6, 7) fails them.

use readop::scalars::MAX_COMPARE_BITS;
use readop::{generate_rapid, GrowthSequence};

fn audit(d: &GrowthSequence) {
    println!("d = {d}, generic: {}", d.is_generic());
    let r = d.check_rapidity(MAX_COMPARE_BITS);
    for c in r.r1.iter().chain(&r.r2) {
        let r = c.r.map(|r| format!(" r={r}")).unwrap_or_default();
        println!("  {} n={}{r}: log2 lhs {} vs log2 rhs {} -> {:?}", c.name, c.n, c.log2_lhs, c.log2_rhs, c.verdict);
    }
    println!("  overall {:?}", r.overall);
}

fn main() -> readop::Result<()> {
    let levels = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let d = generate_rapid(levels, None, MAX_COMPARE_BITS)?;
    audit(&d);
    for n in 0..=d.levels() {
        println!("  v_{n} = {}", d.v(n)?);
    }
    audit(&GrowthSequence::from_interleaved(&[2, 3, 6, 7])?);
    println!("{}", serde_json::to_string(&d.to_json())?);
    Ok(())
}
