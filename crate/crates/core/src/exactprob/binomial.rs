//! Exact binomial distribution functions over the rationals.
//!
//! Every probability `P(Bi(n, a/(a+b)) <= t)` is a ratio with denominator
//! `(a+b)^n`; the numerators are accumulated as big integers with a Horner
//! scheme so that no binomial coefficient is ever recomputed from scratch.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// A tail probability request `P(Bi(n, m/n) <= t)` or `P(Bi(n, m/n) < t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailQuery {
    pub n: u64,
    pub m: u64,
    pub threshold: i64,
    pub strict: bool,
}

impl TailQuery {
    pub fn new(n: u64, m: u64, threshold: i64, strict: bool) -> Result<Self> {
        check_nm(n, m)?;
        Ok(Self {
            n,
            m,
            threshold,
            strict,
        })
    }

    /// `q_m`: the non-strict query at the mean.
    pub fn at_mean(n: u64, m: u64) -> Result<Self> {
        Self::new(n, m, m as i64, false)
    }

    pub fn eval(&self) -> BigRational {
        let num = cdf_numerator(self.n, self.m, self.n - self.m, self.threshold, self.strict);
        to_rational(num, BigUint::from(self.n).pow(self.n as u32))
    }
}

fn check_nm(n: u64, m: u64) -> Result<()> {
    if n == 0 {
        return domain("n must be positive");
    }
    if n > u32::MAX as u64 {
        return domain(format!("n = {n} is too large"));
    }
    if m > n {
        return domain(format!("m = {m} outside [0, {n}]"));
    }
    Ok(())
}

pub(crate) fn to_rational(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `sum_{k=0}^{t} C(n,k) a^k b^(n-k)` for `t <= n`.
pub(crate) fn partial_weighted_sum(n: u64, a: u64, b: u64, t: u64) -> BigUint {
    debug_assert!(t <= n);
    if b == 0 {
        // only the k = n term survives
        return if t == n {
            BigUint::from(a).pow(n as u32)
        } else {
            BigUint::zero()
        };
    }
    let mut acc = BigUint::zero();
    // C(n,k) a^k
    let mut term = BigUint::one();
    for k in 0..=t {
        if k > 0 {
            if a == 0 {
                term.set_zero();
            } else {
                match a.checked_mul(n - k + 1) {
                    Some(f) => term *= f,
                    None => {
                        term *= a;
                        term *= n - k + 1;
                    }
                }
                term /= k;
            }
        }
        acc *= b;
        acc += &term;
    }
    acc * BigUint::from(b).pow((n - t) as u32)
}

/// Numerator over `(a+b)^n` of `P(S <= t)` (or `P(S < t)`), `S ~ Bi(n, a/(a+b))`.
///
/// Picks whichever tail has fewer terms.
pub(crate) fn cdf_numerator(n: u64, a: u64, b: u64, t: i64, strict: bool) -> BigUint {
    let t = if strict { t - 1 } else { t };
    let total = BigUint::from(a + b).pow(n as u32);
    if t < 0 {
        return BigUint::zero();
    }
    let t = t as u64;
    if t >= n {
        return total;
    }
    // degenerate laws carry all mass at 0 or n
    if a == 0 {
        return total;
    }
    if b == 0 {
        return BigUint::zero();
    }
    if t <= n / 2 {
        partial_weighted_sum(n, a, b, t)
    } else {
        // P(S > t) = P(n - S <= n - t - 1), with the roles of a and b swapped
        total - partial_weighted_sum(n, b, a, n - t - 1)
    }
}

/// Exact `P(Bi(n, m/n) <= t)`, or `P(Bi(n, m/n) < t)` when `strict`.
pub fn binomial_cdf_exact(n: u64, m: u64, t: i64, strict: bool) -> Result<BigRational> {
    Ok(TailQuery::new(n, m, t, strict)?.eval())
}

fn split_probability(p: &BigRational) -> Result<(u64, u64)> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return domain(format!("probability {p} outside [0, 1]"));
    }
    let num = p.numer().to_u64();
    let den = p.denom().to_u64();
    match (num, den) {
        (Some(a), Some(d)) if d < u32::MAX as u64 => Ok((a, d - a)),
        _ => domain(format!(
            "probability {p} has a numerator or denominator too large"
        )),
    }
}

/// Exact `P(Bi(n, p) <= t)` for a rational `p` in `[0, 1]`.
pub fn binomial_cdf_rational(n: u64, p: &BigRational, t: i64, strict: bool) -> Result<BigRational> {
    if n == 0 || n > u32::MAX as u64 {
        return domain(format!("n = {n} out of range"));
    }
    let (a, b) = split_probability(p)?;
    let num = cdf_numerator(n, a, b, t, strict);
    Ok(to_rational(num, BigUint::from(a + b).pow(n as u32)))
}

/// `q_m = P(Bi(n, m/n) <= m)`.
pub fn chvatal_q(n: u64, m: u64) -> Result<BigRational> {
    binomial_cdf_exact(n, m, m as i64, false)
}

/// `q'_m = P(Bi(n, m/n) < m)`.
pub fn chvatal_q_strict(n: u64, m: u64) -> Result<BigRational> {
    binomial_cdf_exact(n, m, m as i64, true)
}

/// All `q_m` and `q'_m` for one `n`, as numerators over the shared
/// denominator `n^n`.
#[derive(Debug, Clone)]
pub struct QTable {
    pub n: u64,
    pub denominator: BigUint,
    /// numerators of `q_m`, `m = 0..=n`
    pub le: Vec<BigUint>,
    /// numerators of `q'_m`, `m = 0..=n`
    pub lt: Vec<BigUint>,
}

impl QTable {
    pub fn new(n: u64) -> Result<Self> {
        check_nm(n, 0)?;
        let denominator = BigUint::from(n).pow(n as u32);
        let le: Vec<BigUint> = (0..=n)
            .map(|m| cdf_numerator(n, m, n - m, m as i64, false))
            .collect();
        // 1 - q_m = q'_{n-m}
        let lt = (0..=n)
            .map(|m| &denominator - &le[(n - m) as usize])
            .collect();
        Ok(Self {
            n,
            denominator,
            le,
            lt,
        })
    }

    pub fn q(&self, m: u64) -> BigRational {
        to_rational(self.le[m as usize].clone(), self.denominator.clone())
    }

    pub fn q_strict(&self, m: u64) -> BigRational {
        to_rational(self.lt[m as usize].clone(), self.denominator.clone())
    }
}

/// Cumulative numerators `N_t = (a+b)^n P(S <= t)`, `t = 0..=n`, for
/// `S ~ Bi(n, a/(a+b))`, together with the denominator `(a+b)^n`.
pub fn cdf_table(n: u64, a: u64, b: u64) -> (Vec<BigUint>, BigUint) {
    let denominator = BigUint::from(a + b).pow(n as u32);
    let mut cumulative = Vec::with_capacity(n as usize + 1);
    if b == 0 {
        cumulative.resize(n as usize, BigUint::zero());
        cumulative.push(denominator.clone());
        return (cumulative, denominator);
    }
    // pmf numerators C(n,k) a^k b^(n-k); each update divides exactly
    let mut pmf = BigUint::from(b).pow(n as u32);
    let mut running = pmf.clone();
    cumulative.push(running.clone());
    for k in 1..=n {
        pmf *= a;
        pmf *= n - k + 1;
        pmf /= k;
        pmf /= b;
        running += &pmf;
        cumulative.push(running.clone());
    }
    (cumulative, denominator)
}
