use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_rational::BigRational;

use crate::series::{Coeff, Polynomial};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function, through `erfc`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// `phi(0) = 1 / sqrt(2 pi)`.
pub fn phi0() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}

/// `a * Phi(x) + phi(x) * P(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussCombo<T> {
    pub phi_part: T,
    pub poly_part: Polynomial<T>,
}

impl<T: Coeff> GaussCombo<T> {
    pub fn new(phi_part: T, poly_part: Polynomial<T>) -> Self {
        Self {
            phi_part,
            poly_part,
        }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), Polynomial::zero())
    }

    /// `Phi` itself.
    pub fn normal_cdf() -> Self {
        Self::new(T::one(), Polynomial::zero())
    }

    /// `phi(x) * P(x)`.
    pub fn density_times(p: Polynomial<T>) -> Self {
        Self::new(T::zero(), p)
    }

    pub fn is_zero(&self) -> bool {
        self.phi_part.is_zero() && self.poly_part.is_zero()
    }

    /// `(a Phi + phi P)' = phi (a + P' - x P)`
    pub fn derivative(&self) -> Self {
        let p = &self.poly_part;
        let poly = &(&p.derivative() - &p.shift(1)) + &Polynomial::constant(self.phi_part.clone());
        Self::new(T::zero(), poly)
    }

    /// Derivatives of orders `0..=order`.
    pub fn derivatives(&self, order: usize) -> Vec<Self> {
        let mut out = vec![self.clone()];
        for _ in 0..order {
            let next = out.last().expect("nonempty").derivative();
            out.push(next);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.phi_part.clone() + other.phi_part.clone(),
            &self.poly_part + &other.poly_part,
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.phi_part.clone() * c.clone(), self.poly_part.scale(c))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with(x, normal_cdf(x), normal_pdf(x))
    }

    /// Evaluation with `Phi(x)` and `phi(x)` supplied by the caller.
    pub fn eval_with(&self, x: f64, cdf: f64, pdf: f64) -> f64 {
        self.phi_part.to_f64() * cdf + pdf * self.poly_part.eval_f64(x)
    }

    pub fn to_f64(&self) -> GaussCombo<f64> {
        GaussCombo::new(self.phi_part.to_f64(), self.poly_part.to_f64())
    }
}

impl GaussCombo<BigRational> {
    /// Value at 0 divided by `phi(0)`, ignoring the `Phi` part.
    pub fn density_part_at_zero(&self) -> BigRational {
        self.poly_part.coeff(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-8.0) - 6.22096057427174e-16).abs() < 1e-28);
        assert!((normal_pdf(0.0) - phi0()).abs() < 1e-17);
    }

    #[test]
    fn derivative_of_cdf_is_density() {
        let d = GaussCombo::<f64>::normal_cdf().derivative();
        assert_eq!(d.phi_part, 0.0);
        assert_eq!(d.poly_part, Polynomial::one());
        // phi'' = (x^2 - 1) phi
        let d2 = d.derivative().derivative();
        assert_eq!(d2.poly_part.coeffs(), &[-1.0, 0.0, 1.0]);
    }
}
