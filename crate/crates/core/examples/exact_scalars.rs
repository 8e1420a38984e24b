//! Exact scalars of the form `± prod p^n * 2^(q0 + sum q_m / sqrt m)`,
//! their sums, certified enclosures and exact comparisons.

use num_bigint::BigUint;
use num_rational::BigRational;
use readop::scalars::{
    compare, evaluate, sign_of, sum_to_json, ExactScalar, ExactSum, SurdExponent, MAX_COMPARE_BITS,
};

fn main() {
    let surd = |p: i64, q: i64, m: u32| {
        ExactScalar::pow2(SurdExponent::surd(BigRational::new(p.into(), q.into()), &BigUint::from(m)))
    };
    // 3 * 2^{(3/2)/sqrt 3} and 6^2 / 4
    let x = &ExactScalar::from_int(3) * &surd(3, 2, 3);
    let y = &ExactScalar::pow_u(6, 2) * &ExactScalar::pow_u(4, -1);
    println!("x = {x}");
    println!("y = {y} (canonical: 3^2)");

    for bits in [64, 256, 1024] {
        println!("x at {bits:>4} bits: {}", evaluate(&ExactSum::from(x.clone()), bits));
    }

    // 2^{1/sqrt 2} - 2^{1/sqrt 3}: close values, sign decided by refinement
    let d = ExactSum::from_terms([surd(1, 1, 2), -&surd(1, 1, 3)]);
    println!("sign of 2^(1/sqrt 2) - 2^(1/sqrt 3): {:?}", sign_of(&d, MAX_COMPARE_BITS));
    println!("compare x, y: {:?}", compare(&ExactSum::from(x.clone()), &ExactSum::from(y), MAX_COMPARE_BITS));
    println!("x as json: {}", sum_to_json(&ExactSum::from(x)));
}
