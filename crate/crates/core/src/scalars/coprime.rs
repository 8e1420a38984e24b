//! Gcd-free (coprime) basis refinement.
//!
//! Values in this crate are products of powers of a handful of integer atoms
//! (levels `n`, differences `n - r`, and the growth parameters `a_n`, `b_n`).
//! The growth parameters can be far too large to factor, so instead of prime
//! factorizations we strip small primes by trial division and refine whatever
//! is left into a pairwise coprime set. Every input is then a product of basis
//! elements, and the exponent vector over that basis is unique.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

/// Trial division bound for the small-prime sieve.
const TRIAL_BOUND: usize = 1000;

pub(crate) fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut composite = vec![false; TRIAL_BOUND];
        let mut out = Vec::new();
        for p in 2..TRIAL_BOUND {
            if composite[p] {
                continue;
            }
            out.push(p as u32);
            let mut q = p * p;
            while q < TRIAL_BOUND {
                composite[q] = true;
                q += p;
            }
        }
        out
    })
}

/// Removes all small prime factors of `x`, returning their multiplicities and
/// the remaining cofactor (which has no prime factor below the trial bound).
pub(crate) fn strip_small(x: &BigUint) -> (Vec<(u32, u64)>, BigUint) {
    let mut rest = x.clone();
    let mut found = Vec::new();
    if rest.is_zero() {
        return (found, rest);
    }
    for &p in small_primes() {
        let pb = BigUint::from(p);
        let mut k = 0u64;
        loop {
            let (q, r) = rest.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            rest = q;
            k += 1;
        }
        if k > 0 {
            found.push((p, k));
        }
        if rest.is_one() {
            break;
        }
    }
    (found, rest)
}

/// Writes `x = root^k` with `root` not itself a perfect power.
pub fn perfect_power_root(x: &BigUint) -> (BigUint, u32) {
    let mut root = x.clone();
    let mut power = 1u32;
    if root <= BigUint::one() {
        return (root, power);
    }
    'outer: loop {
        let bits = root.bits() as u32;
        for &k in small_primes() {
            if k > bits {
                break;
            }
            let r = root.nth_root(k);
            if r > BigUint::one() && num_traits::pow(r.clone(), k as usize) == root {
                root = r;
                power *= k;
                continue 'outer;
            }
        }
        return (root, power);
    }
}

/// Refines `values` into a sorted, pairwise coprime set of integers > 1, none
/// of which is a perfect power, such that every input is a product of powers
/// of the output elements.
pub fn coprime_basis<'a>(values: impl IntoIterator<Item = &'a BigUint>) -> Vec<BigUint> {
    let mut basis: Vec<BigUint> = Vec::new();
    let mut pending: Vec<BigUint> = values
        .into_iter()
        .filter(|v| **v > BigUint::one())
        .cloned()
        .collect();
    while let Some(x) = pending.pop() {
        let hit = basis.iter().enumerate().find_map(|(idx, y)| {
            let g = x.gcd(y);
            (!g.is_one()).then_some((idx, g))
        });
        match hit {
            Some((idx, g)) => {
                let y = basis.swap_remove(idx);
                for part in [&y / &g, &x / &g, g] {
                    if part > BigUint::one() {
                        pending.push(part);
                    }
                }
            }
            None => basis.push(x),
        }
    }
    let mut out: Vec<BigUint> = basis.iter().map(|b| perfect_power_root(b).0).collect();
    out.sort();
    out.dedup();
    out
}

/// Exponents of `x` over `basis`. Panics if `x` is not a product of basis
/// elements, which would mean the basis was built from the wrong inputs.
pub(crate) fn factor_over(x: &BigUint, basis: &[BigUint]) -> Vec<(usize, u64)> {
    let mut rest = x.clone();
    let mut out = Vec::new();
    for (idx, p) in basis.iter().enumerate() {
        let mut k = 0u64;
        loop {
            let (q, r) = rest.div_rem(p);
            if !r.is_zero() {
                break;
            }
            rest = q;
            k += 1;
        }
        if k > 0 {
            out.push((idx, k));
        }
    }
    assert!(rest.is_one(), "value {x} does not factor over its coprime basis");
    out
}

/// A factorization of an integer into small primes and coprime cofactor
/// powers, shared between base maps and surd keys.
pub(crate) struct Factorization {
    /// (factor, multiplicity) with pairwise coprime factors.
    pub factors: BTreeMap<BigUint, u64>,
}

/// Jointly factors several integers so that all results are expressed over a
/// single pairwise coprime basis.
pub(crate) fn joint_factor(values: &[&BigUint]) -> Vec<Factorization> {
    let stripped: Vec<_> = values.iter().map(|v| strip_small(v)).collect();
    let basis = coprime_basis(stripped.iter().map(|(_, c)| c));
    stripped
        .into_iter()
        .map(|(small, cof)| {
            let mut factors = BTreeMap::new();
            for (p, k) in small {
                *factors.entry(BigUint::from(p)).or_insert(0) += k;
            }
            if cof > BigUint::one() {
                for (idx, k) in factor_over(&cof, &basis) {
                    *factors.entry(basis[idx].clone()).or_insert(0) += k;
                }
            }
            Factorization { factors }
        })
        .collect()
}

/// Canonical form of a product `prod base^exp`: keys pairwise coprime, none
/// equal to 1 or 2, no zero exponents. The power of two is returned
/// separately because it lives in the surd exponent of [`ExactScalar`].
///
/// [`ExactScalar`]: super::ExactScalar
pub fn canonicalize(raw: &BTreeMap<BigUint, BigInt>) -> (BTreeMap<BigUint, BigInt>, BigInt) {
    let keys: Vec<&BigUint> = raw.keys().collect();
    let facts = joint_factor(&keys);
    let mut acc: BTreeMap<BigUint, BigInt> = BTreeMap::new();
    for (fact, exp) in facts.iter().zip(raw.values()) {
        if exp.is_zero() {
            continue;
        }
        for (p, k) in &fact.factors {
            *acc.entry(p.clone()).or_insert_with(BigInt::zero) += exp * BigInt::from(*k);
        }
    }
    let two = BigUint::from(2u32);
    let pow2 = acc.remove(&two).unwrap_or_default();
    acc.retain(|_, e| !e.is_zero());
    (acc, pow2)
}
