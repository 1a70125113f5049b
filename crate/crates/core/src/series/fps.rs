use super::poly::{Coeff, Polynomial};
use crate::error::{domain, Result};

/// Power series in `z` truncated after `z^order`, whose coefficients are
/// polynomials in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedUSeries<T> {
    order: usize,
    coeffs: Vec<Polynomial<T>>,
}

impl<T: Coeff> TruncatedUSeries<T> {
    /// Coefficients beyond `order` are dropped; missing ones are zero.
    pub fn new(order: usize, mut coeffs: Vec<Polynomial<T>>) -> Self {
        coeffs.resize(order + 1, Polynomial::zero());
        Self { order, coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(order, Vec::new())
    }

    pub fn one(order: usize) -> Self {
        Self::new(order, vec![Polynomial::one()])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient of `z^j`.
    pub fn coeff(&self, j: usize) -> &Polynomial<T> {
        &self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[Polynomial<T>] {
        &self.coeffs
    }

    pub fn neg(&self) -> Self {
        Self::new(self.order, self.coeffs.iter().map(|p| -p).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        Self::new(
            order,
            (0..=order)
                .map(|j| &self.coeffs[j] + &other.coeffs[j])
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order)
            .map(|j| {
                (0..=j).fold(Polynomial::zero(), |acc, i| {
                    &acc + &(&self.coeffs[i] * &other.coeffs[j - i])
                })
            })
            .collect();
        Self::new(order, coeffs)
    }

    /// `exp(S)` through `E' = S' E`, i.e.
    /// `j E_j = sum_{i=1}^{j} i S_i E_{j-i}`; needs `S_0 = 0`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return domain("series exponential needs a zero constant term");
        }
        let mut e: Vec<Polynomial<T>> = vec![Polynomial::one()];
        for j in 1..=self.order {
            let mut acc = Polynomial::zero();
            for i in 1..=j {
                if self.coeffs[i].is_zero() || e[j - i].is_zero() {
                    continue;
                }
                let term = (&self.coeffs[i] * &e[j - i]).scale(&T::from_i64(i as i64));
                acc = &acc + &term;
            }
            let inv = T::one() / T::from_i64(j as i64);
            e.push(acc.scale(&inv));
        }
        Ok(Self::new(self.order, e))
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == Polynomial::one() && self.coeffs[1..].iter().all(|p| p.is_zero())
    }
}
