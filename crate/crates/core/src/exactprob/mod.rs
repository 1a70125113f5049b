//! Exact and certified probability oracles.

pub mod ball;
pub mod binomial;
pub mod poisson;

pub use ball::{Certified, Dyadic, HighPrecisionReal};
pub use binomial::{
    binomial_cdf_exact, binomial_cdf_rational, chvatal_q, chvatal_q_strict, QTable, TailQuery,
};
pub use poisson::{
    poisson_cdf, poisson_cdf_table, poisson_mean_pair, total_variation_binomial_poisson,
    verify_poisson_monotonicity, PoissonMonotonicityReport, DEFAULT_PRECISION_BITS,
};

use num_bigint::BigUint;

/// `num / den` rounded to `f64` (relative error below one ulp).
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    use num_bigint::BigInt;
    if num.bits() == 0 {
        return 0.0;
    }
    let shift = 66 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    Dyadic::new(BigInt::from(q), -shift).to_f64()
}

/// Converts an exact rational to `f64` through [`ratio_to_f64`].
pub fn rational_to_f64(q: &num_rational::BigRational) -> f64 {
    let v = ratio_to_f64(q.numer().magnitude(), q.denom().magnitude());
    if q.numer().sign() == num_bigint::Sign::Minus {
        -v
    } else {
        v
    }
}
