use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::gauss::{normal_cdf, normal_pdf, phi0, GaussCombo};
use crate::cumulants::LatticeDistribution;
use crate::error::{domain, Error, Result};
use crate::exactprob::rational_to_f64;
use crate::series::{bernoulli_numbers, hermite_table, Polynomial, PsiTable, TruncatedUSeries};

fn factorial(r: usize) -> BigInt {
    (1..=r).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Largest expansion order accepted anywhere in the engine.
pub const MAX_ORDER: usize = 8;

/// Coefficients of the polynomials `P_j(u) = sum_r pi_{jr} u^r`.
///
/// Stored with raw cumulants `gamma_i` in place of `lambda_i`, so that
/// `pi_{jr} = pi_hat_{jr} * sigma^{-r}` and everything stays rational.
#[derive(Debug, Clone, PartialEq)]
pub struct PiTable {
    order: usize,
    sigma2: BigRational,
    p_hat: Vec<Polynomial<BigRational>>,
}

impl PiTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `pi_hat_{jr}`; zero outside the stored range.
    pub fn pi_hat(&self, j: usize, r: usize) -> BigRational {
        self.p_hat
            .get(j)
            .map_or_else(BigRational::zero, |p| p.coeff(r))
    }

    /// `pi_{jr}`.
    pub fn pi(&self, j: usize, r: usize) -> f64 {
        let sigma = rational_to_f64(&self.sigma2).sqrt();
        rational_to_f64(&self.pi_hat(j, r)) / sigma.powi(r as i32)
    }

    /// `P_j` with raw cumulants (`P_0 = 1`).
    pub fn p_hat(&self, j: usize) -> &Polynomial<BigRational> {
        &self.p_hat[j]
    }
}

fn check_cumulants(dist: &LatticeDistribution, k: usize) -> Result<()> {
    if k == 0 || k > MAX_ORDER {
        return domain(format!(
            "expansion order must be in 1..={MAX_ORDER}, got {k}"
        ));
    }
    if dist.order < k + 2 || dist.cumulants.len() < k + 3 {
        return Err(Error::MissingCumulant {
            order: k + 2,
            available: dist.order,
        });
    }
    Ok(())
}

/// Expands `exp(sum_{i=1}^k gamma_{i+2} u^{i+2} z^i / (i+2)!)` to order `k`.
pub fn edgeworth_polynomials(dist: &LatticeDistribution, k: usize) -> Result<PiTable> {
    check_cumulants(dist, k)?;
    let mut s = vec![Polynomial::zero()];
    for i in 1..=k {
        let c = dist.cumulants[i + 2].clone() / BigRational::from_integer(factorial(i + 2));
        s.push(Polynomial::monomial(c, i + 2));
    }
    let e = TruncatedUSeries::new(k, s).exp()?;
    Ok(PiTable {
        order: k,
        sigma2: dist.variance.clone(),
        p_hat: e.coeffs().to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticePosition {
    pub floor: i64,
    pub frac: f64,
    pub on_lattice: bool,
}

/// Which lattice correction to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// every correction term uses the full `H_{n,k}` derivative
    Full,
    /// the `l`-th correction uses `H_{n,k-l}`
    Simplified,
}

/// Order-`k` expansion for sums of i.i.d. copies of one distribution.
///
/// `Q_j = sigma^{-j} Qhat_j` where `Qhat_j` has rational coefficients.
/// With `s = sigma sqrt(n)`, `H_{n,k} = Phi + sum_j s^{-j} Qhat_j`.
#[derive(Debug, Clone)]
pub struct EdgeworthModel {
    order: usize,
    mean: BigRational,
    sigma2: BigRational,
    sigma: f64,
    span: u64,
    pi: PiTable,
    /// `[j][l]` = `Qhat_j^{(l)}`, exact
    q_hat: Vec<Vec<GaussCombo<BigRational>>>,
    q_hat_f64: Vec<Vec<GaussCombo<f64>>>,
    psi: PsiTable,
}

impl EdgeworthModel {
    pub fn new(dist: &LatticeDistribution, k: usize) -> Result<Self> {
        let pi = edgeworth_polynomials(dist, k)?;
        let hermite = hermite_table::<BigRational>(3 * k);
        let inv_sigma2 = dist.variance.recip();

        let mut q_hat = vec![GaussCombo::<BigRational>::normal_cdf().derivatives(k)];
        for j in 1..=k {
            let mut poly = Polynomial::zero();
            for r in (j + 2..=3 * j).step_by(2) {
                let c = pi.pi_hat(j, r) * num_traits::pow(inv_sigma2.clone(), (r - j) / 2);
                poly = &poly - &hermite[r - 1].scale(&c);
            }
            q_hat.push(GaussCombo::density_times(poly).derivatives(k));
        }
        let q_hat_f64 = q_hat
            .iter()
            .map(|ds| ds.iter().map(GaussCombo::to_f64).collect())
            .collect();

        Ok(Self {
            order: k,
            mean: dist.mean.clone(),
            sigma: rational_to_f64(&dist.variance).sqrt(),
            sigma2: dist.variance.clone(),
            span: dist.span,
            pi,
            q_hat,
            q_hat_f64,
            psi: PsiTable::new(k),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> &BigRational {
        &self.mean
    }

    pub fn pi_table(&self) -> &PiTable {
        &self.pi
    }

    /// `Qhat_j^{(l)}` with exact coefficients.
    pub fn q_hat(&self, j: usize, l: usize) -> &GaussCombo<BigRational> {
        &self.q_hat[j][l]
    }

    /// `Q_j^{(l)}` in `f64`.
    pub fn q_function(&self, j: usize, l: usize) -> GaussCombo<f64> {
        self.q_hat_f64[j][l].scale(&self.sigma.powi(-(j as i32)))
    }

    /// `Q_0, ..., Q_k` (with `Q_0 = Phi`).
    pub fn q_functions(&self) -> Vec<GaussCombo<f64>> {
        (0..=self.order).map(|j| self.q_function(j, 0)).collect()
    }

    fn scale_factor(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return domain("n must be positive");
        }
        Ok(self.sigma * (n as f64).sqrt())
    }

    /// `H_{n,k} = Phi + sum_{j=1}^k n^{-j/2} Q_j`.
    pub fn h_function(&self, n: u64) -> Result<GaussCombo<f64>> {
        self.h_function_order(n, self.order)
    }

    /// `H_{n,j}` for `j <= k`.
    pub fn h_function_order(&self, n: u64, j_max: usize) -> Result<GaussCombo<f64>> {
        let s = self.scale_factor(n)?;
        let mut h = GaussCombo::normal_cdf();
        for j in 1..=j_max.min(self.order) {
            h = h.add(&self.q_hat_f64[j][0].scale(&s.powi(-(j as i32))));
        }
        Ok(h)
    }

    /// `sigma sqrt(n) >= ln n`, the regime with a quantitative error bound.
    pub fn within_guarantee(&self, n: u64) -> bool {
        self.sigma * (n as f64).sqrt() >= (n as f64).ln()
    }

    fn check_span(&self) -> Result<()> {
        if self.span != 1 {
            return Err(Error::Span(self.span));
        }
        Ok(())
    }

    /// Lattice-corrected approximation of `P(S_n <= n mu + x sigma sqrt(n))`
    /// (`<` when `strict`).
    pub fn lattice_cdf_approx(
        &self,
        n: u64,
        x: f64,
        variant: Variant,
        strict: bool,
    ) -> Result<f64> {
        self.check_span()?;
        let s = self.scale_factor(n)?;
        let pos = self.locate(n, x);
        Ok(self.eval_core(s, x, pos.frac, strict && pos.on_lattice, variant))
    }

    /// Where `n mu + x sigma sqrt(n)` falls on the integer lattice. Points
    /// within a relative `1e-9` of an integer are treated as lattice points.
    pub fn locate(&self, n: u64, x: f64) -> LatticePosition {
        let center = rational_to_f64(&(&self.mean * rat(n as i64)));
        let y = center + x * self.sigma * (n as f64).sqrt();
        let nearest = y.round();
        if (y - nearest).abs() < 1e-9 * y.abs().max(1.0) {
            LatticePosition {
                floor: nearest as i64,
                frac: 0.0,
                on_lattice: true,
            }
        } else {
            LatticePosition {
                floor: y.floor() as i64,
                frac: y - y.floor(),
                on_lattice: false,
            }
        }
    }

    /// Approximation of `P(S_n <= t)` (`P(S_n < t)` when `strict`) at an
    /// integer threshold, with no rounding in locating the lattice point.
    pub fn lattice_cdf_at(&self, n: u64, t: i64, variant: Variant, strict: bool) -> Result<f64> {
        self.check_span()?;
        let s = self.scale_factor(n)?;
        let x = rational_to_f64(&(rat(t) - &self.mean * rat(n as i64))) / s;
        Ok(self.eval_core(s, x, 0.0, strict, variant))
    }

    /// Standardized coordinate of the integer threshold `t`.
    pub fn standardize(&self, n: u64, t: i64) -> f64 {
        rational_to_f64(&(rat(t) - &self.mean * rat(n as i64))) / (self.sigma * (n as f64).sqrt())
    }

    fn eval_core(&self, s: f64, x: f64, frac: f64, left: bool, variant: Variant) -> f64 {
        let k = self.order;
        let cdf = normal_cdf(x);
        let pdf = normal_pdf(x);
        let inv = 1.0 / s;
        let h = |l: usize, top: usize| -> f64 {
            let mut acc = 0.0;
            let mut w = 1.0;
            for j in 0..=top {
                acc += w * self.q_hat_f64[j][l].eval_with(x, cdf, pdf);
                w *= inv;
            }
            acc
        };
        let mut total = h(0, k);
        let mut w = 1.0;
        for l in 1..=k {
            w *= inv;
            let top = match variant {
                Variant::Full => k,
                Variant::Simplified => k - l,
            };
            let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * w * self.psi.eval(l, frac, left) * h(l, top);
        }
        total
    }

    /// Exact coefficients of the expansion at an integer mean; see
    /// [`IntegerMeanCoefficients`].
    pub fn integer_mean_coefficients(&self, strict: bool) -> IntegerMeanCoefficients {
        let bern = bernoulli_numbers(self.order);
        let mut c = vec![BigRational::zero(); self.order + 1];
        for (m, cm) in c.iter_mut().enumerate().skip(1) {
            for (l, bl) in bern.iter().enumerate().take(m + 1) {
                let mut w = bl / BigRational::from_integer(factorial(l));
                if l % 2 == 1 {
                    w = -w;
                }
                if strict && l == 1 {
                    w = -w;
                }
                *cm += w * self.q_hat[m - l][l].density_part_at_zero();
            }
        }
        IntegerMeanCoefficients {
            sigma2: self.sigma2.clone(),
            strict,
            c,
        }
    }
}

/// `P(S_n <= n mu) ~ 1/2 + sum_m h_m n^{-m/2}` with
/// `h_m = phi(0) sigma^{-m} c_m` and `c_m` rational.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerMeanCoefficients {
    pub sigma2: BigRational,
    pub strict: bool,
    /// `c[m]`, `m = 0..=k`; `c[0]` is unused and zero
    pub c: Vec<BigRational>,
}

impl IntegerMeanCoefficients {
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    /// `h_m`, the coefficient of `n^{-m/2}`.
    pub fn coefficient(&self, m: usize) -> f64 {
        let sigma = rational_to_f64(&self.sigma2).sqrt();
        phi0() * rational_to_f64(&self.c[m]) / sigma.powi(m as i32)
    }

    pub fn eval(&self, n: u64) -> f64 {
        let r = 1.0 / (n as f64).sqrt();
        let mut total = 0.5;
        let mut w = 1.0;
        for m in 1..=self.order() {
            w *= r;
            total += self.coefficient(m) * w;
        }
        total
    }
}

/// `P(S_n <= n mu)` (or `<`) from the integer-mean expansion of order `k`.
pub fn integer_mean_expansion(
    dist: &LatticeDistribution,
    n: u64,
    k: usize,
    strict: bool,
) -> Result<f64> {
    if n == 0 {
        return domain("n must be positive");
    }
    if !(&dist.mean * rat(n as i64)).is_integer() {
        return domain(format!(
            "n * mean = {} is not an integer",
            &dist.mean * rat(n as i64)
        ));
    }
    let model = EdgeworthModel::new(dist, k)?;
    model.check_span()?;
    Ok(model.integer_mean_coefficients(strict).eval(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::{bernoulli_distribution, lattice_stats, poisson1_analytic};

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn low_order_pi_coefficients() {
        let d = bernoulli_distribution(&q(3, 10), 6).unwrap();
        let t = edgeworth_polynomials(&d, 3).unwrap();
        let l3 = d.lambda(3);
        assert!((t.pi(1, 3) - l3 / 6.0).abs() < 1e-15);
        for r in 0..=9 {
            if r != 3 {
                assert_eq!(t.pi(1, r), 0.0);
            }
        }
        assert!((t.pi(2, 6) - l3 * l3 / 72.0).abs() < 1e-14);
        let half = bernoulli_distribution(&q(1, 2), 4).unwrap();
        assert!(edgeworth_polynomials(&half, 1).unwrap().p_hat(1).is_zero());
    }

    #[test]
    fn missing_cumulants_rejected() {
        let d = bernoulli_distribution(&q(1, 3), 4).unwrap();
        assert_eq!(
            edgeworth_polynomials(&d, 3).unwrap_err(),
            Error::MissingCumulant {
                order: 5,
                available: 4
            }
        );
    }

    #[test]
    fn q1_at_zero() {
        let d = bernoulli_distribution(&q(1, 5), 5).unwrap();
        let m = EdgeworthModel::new(&d, 3).unwrap();
        let v = m.q_function(1, 0).eval(0.0);
        assert!((v - d.lambda(3) / 6.0 * phi0()).abs() < 1e-15);
    }

    #[test]
    fn h_function_values() {
        let half = bernoulli_distribution(&q(1, 2), 6).unwrap();
        let m = EdgeworthModel::new(&half, 3).unwrap();
        for n in [1, 10, 1000] {
            assert!((m.h_function(n).unwrap().eval(0.0) - 0.5).abs() < 1e-16);
        }
        let d = bernoulli_distribution(&q(1, 5), 6).unwrap();
        let m = EdgeworthModel::new(&d, 3).unwrap();
        let far = m.h_function(100_000_000).unwrap().eval(0.7);
        assert!((far - normal_cdf(0.7)).abs() < 1e-4);
    }

    #[test]
    fn lattice_correction_at_mean() {
        let half = bernoulli_distribution(&q(1, 2), 4).unwrap();
        let m = EdgeworthModel::new(&half, 1).unwrap();
        let v = m
            .lattice_cdf_approx(100, 0.0, Variant::Simplified, false)
            .unwrap();
        let want = 0.5 + 1.0 / (10.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((v - want).abs() < 1e-15);
        assert!((want - 0.539894).abs() < 1e-6);
        let at = m
            .lattice_cdf_at(100, 50, Variant::Simplified, false)
            .unwrap();
        assert!((at - v).abs() < 1e-15);
        // off the lattice the strict flag does nothing
        let a = m
            .lattice_cdf_approx(100, 0.13, Variant::Full, false)
            .unwrap();
        let b = m
            .lattice_cdf_approx(100, 0.13, Variant::Full, true)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn span_two_rejected() {
        let d = lattice_stats(&[(0, q(1, 2)), (2, q(1, 2))], 5).unwrap();
        let m = EdgeworthModel::new(&d, 2).unwrap();
        assert_eq!(
            m.lattice_cdf_approx(10, 0.0, Variant::Full, false)
                .unwrap_err(),
            Error::Span(2)
        );
    }

    #[test]
    fn integer_mean_closed_forms() {
        for (a, b) in [(3, 10), (1, 2), (2, 3), (9, 10)] {
            let p = q(a, b);
            let d = bernoulli_distribution(&p, 8).unwrap();
            let c = EdgeworthModel::new(&d, 4)
                .unwrap()
                .integer_mean_coefficients(false);
            assert_eq!(c.c[1], (rat(2) - &p) / rat(3));
            assert_eq!(
                c.c[3],
                (rat(2) - &p) * (&p * &p + rat(23) * &p - rat(23)) / rat(540)
            );
            assert!(c.c[2].is_zero() && c.c[4].is_zero());
        }
        let po = poisson1_analytic(8).unwrap();
        let model = EdgeworthModel::new(&po, 4).unwrap();
        let strict = model.integer_mean_coefficients(true);
        assert_eq!(strict.c[1], q(-1, 3));
        assert_eq!(strict.c[3], q(-1, 540));
        let le = model.integer_mean_coefficients(false);
        assert_eq!(le.c[1], q(2, 3));
        assert_eq!(le.c[3], q(-23, 270));
    }

    #[test]
    fn integer_mean_matches_lattice_formula() {
        let d = bernoulli_distribution(&q(3, 10), 8).unwrap();
        let m = EdgeworthModel::new(&d, 5).unwrap();
        for strict in [false, true] {
            let c = m.integer_mean_coefficients(strict);
            let direct = m
                .lattice_cdf_at(50, 15, Variant::Simplified, strict)
                .unwrap();
            assert!((c.eval(50) - direct).abs() < 1e-14);
        }
        assert!(integer_mean_expansion(&d, 7, 2, false).is_err());
        let half = bernoulli_distribution(&q(1, 2), 4).unwrap();
        let v = integer_mean_expansion(&half, 64, 1, false).unwrap();
        assert!((v - (0.5 + phi0() / 8.0)).abs() < 1e-15);
    }
}
