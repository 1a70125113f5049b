//! Moments, cumulants and the scale-free descriptors `lambda_j`, `Lambda_j`
//! of integer-valued distributions.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::{binomial, Integer};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exactprob::rational_to_f64;
use crate::series::Coeff;

/// Cumulants from raw moments. `raw[j]` is `E X^j` (`raw[0]` is ignored and
/// taken as 1); the output has the same length with `out[0] = 0`.
///
/// `g_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) g_k m_{n-k}`
pub fn moments_to_cumulants<T: Coeff>(raw: &[T]) -> Vec<T> {
    let mut g: Vec<T> = Vec::with_capacity(raw.len());
    if raw.is_empty() {
        return g;
    }
    g.push(T::zero());
    for n in 1..raw.len() {
        let mut acc = raw[n].clone();
        for k in 1..n {
            let c = binomial(n as i64 - 1, k as i64 - 1);
            acc = acc - T::from_i64(c) * g[k].clone() * raw[n - k].clone();
        }
        g.push(acc);
    }
    g
}

/// Where a distribution came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Pmf,
    Bernoulli(BigRational),
    /// Poisson with rate 1; infinite support, described by its cumulants.
    Poisson1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution {
    pub family: Family,
    /// `(value, probability)` pairs with positive probability; empty for
    /// analytic families.
    pub pmf: Vec<(i64, BigRational)>,
    /// Highest order `J` for which moments and cumulants are stored.
    pub order: usize,
    pub mean: BigRational,
    pub variance: BigRational,
    /// `cumulants[j] = gamma_j`, `j = 0..=J`, with `gamma_0 = 0`.
    pub cumulants: Vec<BigRational>,
    /// `E|X - mu|^j`, `j = 0..=J`.
    pub abs_central_moments: Vec<f64>,
    /// Exact `E|X - mu|^j` when the support is finite.
    pub abs_central_moments_exact: Option<Vec<BigRational>>,
    pub span: u64,
}

impl LatticeDistribution {
    pub fn sigma(&self) -> f64 {
        rational_to_f64(&self.variance).sqrt()
    }

    /// `lambda_j = gamma_j / sigma^j`.
    pub fn lambda(&self, j: usize) -> f64 {
        rational_to_f64(&self.cumulants[j]) / self.sigma().powi(j as i32)
    }

    /// `Lambda_j = beta_j / sigma^j`.
    pub fn big_lambda(&self, j: usize) -> f64 {
        self.abs_central_moments[j] / self.sigma().powi(j as i32)
    }

    pub fn cumulant(&self, j: usize) -> Option<&BigRational> {
        self.cumulants.get(j)
    }

    /// `P(X = v)`, exact for finite support and for the Poisson family up
    /// to `f64` rounding.
    pub fn prob(&self, v: i64) -> f64 {
        match self.family {
            Family::Poisson1 => {
                if v < 0 {
                    0.0
                } else {
                    (-1.0 - libm::lgamma(v as f64 + 1.0)).exp()
                }
            }
            _ => self
                .pmf
                .iter()
                .find(|(x, _)| *x == v)
                .map_or(0.0, |(_, p)| rational_to_f64(p)),
        }
    }

    /// `|E e^{itX}|`.
    pub fn char_function_abs(&self, t: f64) -> f64 {
        match self.family {
            Family::Poisson1 => (t.cos() - 1.0).exp(),
            _ => {
                let (mut re, mut im) = (0.0, 0.0);
                for (x, p) in &self.pmf {
                    let p = rational_to_f64(p);
                    let a = t * *x as f64;
                    re += p * a.cos();
                    im += p * a.sin();
                }
                re.hypot(im)
            }
        }
    }
}

fn check_order(order: usize) -> Result<()> {
    if order < 2 {
        return domain(format!("order must be at least 2, got {order}"));
    }
    Ok(())
}

/// Builds the full descriptor from a finite pmf. Probabilities must be
/// nonnegative and sum to exactly 1; zero-probability points are dropped.
pub fn lattice_stats(pmf: &[(i64, BigRational)], order: usize) -> Result<LatticeDistribution> {
    check_order(order)?;
    if pmf.iter().any(|(_, p)| p.is_negative()) {
        return domain("negative probability in pmf");
    }
    let total: BigRational = pmf.iter().map(|(_, p)| p.clone()).sum();
    if !total.is_one() {
        return domain(format!("probabilities sum to {total}, not 1"));
    }
    let mut support: Vec<(i64, BigRational)> = Vec::new();
    for (x, p) in pmf.iter().filter(|(_, p)| !p.is_zero()) {
        match support.iter_mut().find(|(y, _)| y == x) {
            Some((_, q)) => *q += p,
            None => support.push((*x, p.clone())),
        }
    }
    support.sort_by_key(|(x, _)| *x);
    if support.len() < 2 {
        return domain("support must contain at least two points");
    }

    let base = support[0].0;
    let span = support
        .iter()
        .fold(0u64, |g, (x, _)| g.gcd(&(x - base).unsigned_abs()));

    let mut raw = vec![BigRational::one(); order + 1];
    for (j, m) in raw.iter_mut().enumerate().skip(1) {
        *m = support
            .iter()
            .map(|(x, p)| BigRational::from_integer(BigInt::from(*x).pow(j as u32)) * p)
            .sum();
    }
    let cumulants = moments_to_cumulants(&raw);
    let mean = raw[1].clone();

    let mut beta = vec![BigRational::one(); order + 1];
    for (j, b) in beta.iter_mut().enumerate().skip(1) {
        *b = support
            .iter()
            .map(|(x, p)| {
                let d = (BigRational::from_integer(BigInt::from(*x)) - &mean).abs();
                num_traits::pow(d, j) * p
            })
            .sum();
    }

    Ok(LatticeDistribution {
        family: Family::Pmf,
        pmf: support,
        order,
        variance: cumulants[2].clone(),
        mean,
        cumulants,
        abs_central_moments: beta.iter().map(rational_to_f64).collect(),
        abs_central_moments_exact: Some(beta),
        span,
    })
}

/// `Be(p)` with exact moments and cumulants.
pub fn bernoulli_distribution(p: &BigRational, order: usize) -> Result<LatticeDistribution> {
    if !p.is_positive() || p >= &BigRational::one() {
        return domain(format!("p must lie in (0, 1), got {p}"));
    }
    let q = BigRational::one() - p;
    let mut d = lattice_stats(&[(0, q), (1, p.clone())], order)?;
    d.family = Family::Bernoulli(p.clone());
    Ok(d)
}

/// `Po(1)`: every cumulant equals 1.
pub fn poisson1_analytic(order: usize) -> Result<LatticeDistribution> {
    check_order(order)?;
    let mut cumulants = vec![BigRational::one(); order + 1];
    cumulants[0] = BigRational::zero();
    let beta = (0..=order).map(poisson1_abs_central_moment).collect();
    Ok(LatticeDistribution {
        family: Family::Poisson1,
        pmf: Vec::new(),
        order,
        mean: BigRational::one(),
        variance: BigRational::one(),
        cumulants,
        abs_central_moments: beta,
        abs_central_moments_exact: None,
        span: 1,
    })
}

/// `E|X - 1|^j` for `X ~ Po(1)`, summed until the terms are negligible.
fn poisson1_abs_central_moment(j: usize) -> f64 {
    if j == 0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut pk = (-1.0f64).exp();
    for k in 0..400u32 {
        if k > 0 {
            pk /= k as f64;
        }
        let term = pk * (k as f64 - 1.0).abs().powi(j as i32);
        sum += term;
        if k as usize > j + 10 && term < sum * 1e-18 {
            break;
        }
    }
    sum
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharBoundReport {
    pub a: f64,
    pub points: usize,
    /// `min_t (1 - a t^2 / pi^2 - |E e^{itX}|)` over the grid
    pub worst_margin: f64,
    pub worst_t: f64,
    pub holds: bool,
}

/// Checks `|E e^{itX}| <= 1 - (a / pi^2) t^2` on the grid points with
/// `|t| <= pi`. Needs `P(X=0) >= a` and `P(X=1) >= a`.
pub fn char_function_bound_check(
    dist: &LatticeDistribution,
    a: f64,
    t_grid: &[f64],
) -> Result<CharBoundReport> {
    if a.is_nan() || a < 0.0 {
        return domain(format!("a must be nonnegative, got {a}"));
    }
    let slack = 1e-15;
    if dist.prob(0) + slack < a || dist.prob(1) + slack < a {
        return domain(format!("P(X=0) and P(X=1) must both be at least {a}"));
    }
    let mut worst_margin = f64::INFINITY;
    let mut worst_t = f64::NAN;
    let mut points = 0;
    for &t in t_grid.iter().filter(|t| t.abs() <= PI) {
        let margin = 1.0 - a * t * t / (PI * PI) - dist.char_function_abs(t);
        points += 1;
        if margin < worst_margin {
            worst_margin = margin;
            worst_t = t;
        }
    }
    Ok(CharBoundReport {
        a,
        points,
        worst_margin,
        worst_t,
        holds: worst_margin >= -1e-14,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn bernoulli_half_cumulants() {
        let raw = vec![q(1, 1), q(1, 2), q(1, 2), q(1, 2), q(1, 2)];
        let g = moments_to_cumulants(&raw);
        assert_eq!(g[1], q(1, 2));
        assert_eq!(g[2], q(1, 4));
        assert_eq!(g[3], q(0, 1));
        assert_eq!(g[4], q(-1, 8));
    }

    #[test]
    fn degenerate_cumulants_vanish() {
        let c = 3.0f64;
        let raw: Vec<f64> = (0..7).map(|j| c.powi(j)).collect();
        let g = moments_to_cumulants(&raw);
        assert_eq!(g[1], 3.0);
        for gj in &g[2..] {
            assert!(gj.abs() < 1e-9);
        }
    }

    #[test]
    fn stats_of_small_pmfs() {
        let d = bernoulli_distribution(&q(2, 3), 5).unwrap();
        assert_eq!(d.mean, q(2, 3));
        assert_eq!(d.variance, q(2, 9));
        assert_eq!(d.cumulants[3], q(-2, 27));
        assert_eq!(d.span, 1);
        let b = bernoulli_distribution(&q(1, 3), 5).unwrap();
        assert_eq!(b.cumulants[3], -d.cumulants[3].clone());
        let h = bernoulli_distribution(&q(1, 2), 4).unwrap();
        assert_eq!(h.lambda(3), 0.0);
        assert!((h.big_lambda(2) - 1.0).abs() < 1e-15);

        let two = lattice_stats(&[(0, q(1, 2)), (2, q(1, 2))], 3).unwrap();
        assert_eq!(two.span, 2);
    }

    #[test]
    fn invalid_inputs() {
        assert!(lattice_stats(&[(4, q(1, 1))], 4).is_err());
        assert!(lattice_stats(&[(0, q(1, 2)), (1, q(1, 3))], 4).is_err());
        assert!(lattice_stats(&[(0, q(3, 2)), (1, q(-1, 2))], 4).is_err());
        assert!(bernoulli_distribution(&q(0, 1), 4).is_err());
        assert!(bernoulli_distribution(&q(1, 1), 4).is_err());
    }

    #[test]
    fn poisson_descriptor() {
        let d = poisson1_analytic(5).unwrap();
        for j in 3..=5 {
            assert_eq!(d.lambda(j), 1.0);
        }
        assert_eq!(d.mean, q(1, 1));
        let d = poisson1_analytic(2).unwrap();
        assert!((d.big_lambda(2) - 1.0).abs() < 1e-14);
        // E|X-1| = 2/e
        assert!((d.abs_central_moments[1] - 2.0 / std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn char_bound_examples() {
        let half = bernoulli_distribution(&q(1, 2), 3).unwrap();
        let r = char_function_bound_check(&half, 0.5, &[0.0, PI]).unwrap();
        assert!(r.holds);
        assert!((half.char_function_abs(PI)).abs() < 1e-15);
        assert!(r.worst_margin.abs() < 1e-15);

        let third = bernoulli_distribution(&q(1, 3), 3).unwrap();
        let r = char_function_bound_check(&third, 1.0 / 3.0, &[PI / 2.0]).unwrap();
        assert!(r.worst_margin > 0.0);
        assert!(char_function_bound_check(&third, 0.5, &[1.0]).is_err());
    }
}
