//! Closed-form expansion coefficients for `P(Bi(n, p) <= np)`.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::cumulants::bernoulli_distribution;
use crate::edgeworth::EdgeworthModel;
use crate::error::{domain, Result};
use crate::exactprob::rational_to_f64;

fn sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt()
}

fn check_p(p: &BigRational) -> Result<f64> {
    if !p.is_positive() || p >= &BigRational::one() {
        return domain(format!("p must lie in (0, 1), got {p}"));
    }
    Ok(rational_to_f64(p))
}

/// `h1(p) = (2 - p) / (3 sqrt(2 pi) sqrt(p(1-p)))`
pub fn h1(p: f64) -> f64 {
    (2.0 - p) / (3.0 * sqrt_2pi() * (p * (1.0 - p)).sqrt())
}

/// `h3(p) = (2 - p)(p^2 + 23p - 23) / (540 sqrt(2 pi) (p(1-p))^{3/2})`
pub fn h3(p: f64) -> f64 {
    (2.0 - p) * (p * p + 23.0 * p - 23.0) / (540.0 * sqrt_2pi() * (p * (1.0 - p)).powf(1.5))
}

/// `h1'(p) = (3p - 2) / (6 sqrt(2 pi) (p(1-p))^{3/2})`
pub fn h1_derivative(p: f64) -> f64 {
    (3.0 * p - 2.0) / (6.0 * sqrt_2pi() * (p * (1.0 - p)).powf(1.5))
}

pub fn h1_closed(p: &BigRational) -> Result<f64> {
    Ok(h1(check_p(p)?))
}

pub fn h3_closed(p: &BigRational) -> Result<f64> {
    Ok(h3(check_p(p)?))
}

pub fn h1_prime(p: &BigRational) -> Result<f64> {
    Ok(h1_derivative(check_p(p)?))
}

/// `h1'` by extrapolated central differences, as a cross-check of
/// [`h1_prime`].
pub fn h1_prime_numeric(p: &BigRational) -> Result<f64> {
    let x = check_p(p)?;
    let step = 0.01 * x.min(1.0 - x);
    Ok(derivative(h1, x, 1, step))
}

/// Fourth-order central difference for the first or second derivative,
/// followed by one Richardson step (`h` and `h/2`), so the error is
/// `O(h^6)`.
pub fn derivative(f: impl Fn(f64) -> f64, x: f64, order: u32, h: f64) -> f64 {
    let stencil = |h: f64| match order {
        1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
        2 => {
            (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
                / (12.0 * h * h)
        }
        _ => panic!("only first and second derivatives are supported"),
    };
    (16.0 * stencil(h / 2.0) - stencil(h)) / 15.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalConstants {
    /// `h1''(2/3)`
    pub h1_pp_23: f64,
    /// `h3'(2/3)`
    pub h3_p_23: f64,
    pub ratio: f64,
}

pub fn critical_constants() -> CriticalConstants {
    let x = 2.0 / 3.0;
    let h1_pp_23 = derivative(h1, x, 2, 0.01);
    let h3_p_23 = derivative(h3, x, 1, 0.01);
    CriticalConstants {
        h1_pp_23,
        h3_p_23,
        ratio: h3_p_23 / h1_pp_23,
    }
}

/// Expansion coefficients of `P(Bi(n, p) <= np)` at one `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSet {
    #[serde(serialize_with = "ser_rational")]
    pub p: BigRational,
    pub h1: f64,
    pub h3: f64,
    /// read off the order-6 expansion
    pub h5: f64,
    pub h1_prime: f64,
}

fn ser_rational<S: serde::Serializer>(
    q: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl CoefficientSet {
    pub fn new(p: &BigRational) -> Result<Self> {
        let x = check_p(p)?;
        let dist = bernoulli_distribution(p, 8)?;
        let h5 = EdgeworthModel::new(&dist, 6)?
            .integer_mean_coefficients(false)
            .coefficient(5);
        Ok(Self {
            p: p.clone(),
            h1: h1(x),
            h3: h3(x),
            h5,
            h1_prime: h1_derivative(x),
        })
    }
}

/// `q_m ~ G(n) + H(m - 2n/3) n^{-5/2}` near `m = 2n/3`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalExpansion {
    pub at_two_thirds: CoefficientSet,
    pub constants: CriticalConstants,
}

impl CriticalExpansion {
    pub fn new() -> Self {
        Self {
            at_two_thirds: CoefficientSet::new(&BigRational::new(2.into(), 3.into()))
                .expect("2/3 is inside (0, 1)"),
            constants: critical_constants(),
        }
    }

    /// `G(n) = 1/2 + h1 n^{-1/2} + h3 n^{-3/2} + h5 n^{-5/2}` at `p = 2/3`.
    pub fn g(&self, n: f64) -> f64 {
        let c = &self.at_two_thirds;
        0.5 + c.h1 * n.powf(-0.5) + c.h3 * n.powf(-1.5) + c.h5 * n.powf(-2.5)
    }

    /// `H(x) = h1''(2/3) x^2 / 2 + h3'(2/3) x`.
    pub fn h(&self, x: f64) -> f64 {
        0.5 * self.constants.h1_pp_23 * x * x + self.constants.h3_p_23 * x
    }
}

impl Default for CriticalExpansion {
    fn default() -> Self {
        Self::new()
    }
}
