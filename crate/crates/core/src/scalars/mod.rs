//! Exact scalars: signed products of coprime integer powers times a power of
//! two with a surd exponent, finite sums of them, and certified enclosures.

mod coprime;
pub mod interval;
mod json;
mod scalar;
mod sum;
mod surd;

pub use coprime::{canonicalize, coprime_basis, perfect_power_root};
pub use interval::{
    compare, compare_scalars, evaluate, evaluate_scalar, log2_bounds, sign_of, Comparison, Interval,
    DEFAULT_EVAL_BITS, MAX_COMPARE_BITS, START_COMPARE_BITS,
};
pub use json::{approx, opt_rational, sum_from_json, sum_to_json};
pub use scalar::{ExactScalar, Sign};
pub use sum::ExactSum;
pub use surd::SurdExponent;
