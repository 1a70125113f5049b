//! Hermite polynomials, Bernoulli numbers and polynomials, and the periodic
//! Bernoulli functions `psi_r`.

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Coeff, Polynomial};

/// Probabilists' Hermite polynomial `He_r`, via
/// `He_{r+1} = x He_r - r He_{r-1}`.
pub fn hermite<T: Coeff>(r: usize) -> Polynomial<T> {
    hermite_table(r).pop().expect("table is nonempty")
}

/// `He_0, ..., He_r`.
pub fn hermite_table<T: Coeff>(r: usize) -> Vec<Polynomial<T>> {
    let mut out = vec![Polynomial::one()];
    if r == 0 {
        return out;
    }
    out.push(Polynomial::x());
    for k in 1..r {
        let next = &out[k].shift(1) - &out[k - 1].scale(&T::from_i64(k as i64));
        out.push(next);
    }
    out
}

/// `B_0, ..., B_{r_max}` with `B_1 = -1/2`, from
/// `sum_{j=0}^{r} C(r+1, j) B_j = 0`.
pub fn bernoulli_numbers(r_max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(r_max + 1);
    b.push(BigRational::one());
    for r in 1..=r_max {
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            let c = binomial(BigInt::from(r + 1), BigInt::from(j));
            acc += bj * BigRational::from_integer(c);
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(r + 1)));
    }
    b
}

/// `B_r(x) = sum_k C(r,k) B_k x^{r-k}`.
pub fn bernoulli_polynomial(r: usize) -> Polynomial<BigRational> {
    let b = bernoulli_numbers(r);
    let mut coeffs = vec![BigRational::zero(); r + 1];
    for (k, bk) in b.iter().enumerate() {
        let c = binomial(BigInt::from(r), BigInt::from(k));
        coeffs[r - k] = bk * BigRational::from_integer(c);
    }
    Polynomial::new(coeffs)
}

fn factorial(r: usize) -> BigInt {
    (1..=r).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// `-B_r(x) / r!` as a polynomial in `x` (valid for `x` in `[0, 1)`).
pub fn psi_polynomial(r: usize) -> Polynomial<BigRational> {
    let scale = -BigRational::from_integer(factorial(r)).recip();
    bernoulli_polynomial(r).scale(&scale)
}

/// `psi_r(x)`: `1/2 - {x}` for `r = 1` (right-continuous), and
/// `-B_r({x}) / r!` for `r >= 2`. Period 1.
pub fn psi(r: usize, x: f64) -> f64 {
    assert!(r >= 1, "psi is defined for r >= 1");
    let f = frac(x);
    if r == 1 {
        return 0.5 - f;
    }
    psi_polynomial(r).eval_f64(f)
}

/// Exact `psi_r(x)` at a rational point.
pub fn psi_exact(r: usize, x: &BigRational) -> BigRational {
    assert!(r >= 1, "psi is defined for r >= 1");
    let f = x - x.floor();
    psi_polynomial(r).eval(&f)
}

/// Cached `psi_1 .. psi_{r_max}` polynomials in `f64`, evaluated from a
/// fractional part that the caller has already computed.
#[derive(Debug, Clone)]
pub struct PsiTable {
    polys: Vec<Polynomial<f64>>,
}

impl PsiTable {
    pub fn new(r_max: usize) -> Self {
        let polys = (0..=r_max)
            .map(|r| {
                if r == 0 {
                    Polynomial::zero()
                } else {
                    psi_polynomial(r).to_f64()
                }
            })
            .collect();
        Self { polys }
    }

    /// `psi_r` at a point whose fractional part is `f`. With `left_limit`,
    /// `psi_1` takes its left-continuous value `psi_1(x-)` when `f == 0`.
    pub fn eval(&self, r: usize, f: f64, left_limit: bool) -> f64 {
        if r == 1 {
            let v = 0.5 - f;
            return if left_limit && f == 0.0 { v - 1.0 } else { v };
        }
        self.polys[r].eval_f64(f)
    }
}
