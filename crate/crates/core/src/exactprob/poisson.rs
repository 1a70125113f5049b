//! Certified Poisson probabilities and the binomial/Poisson total variation
//! distance.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::ball::{Certified, Dyadic, HighPrecisionReal};
use crate::error::{domain, Result};

pub const DEFAULT_PRECISION_BITS: u32 = 192;

fn check_rate(rate: &BigRational) -> Result<()> {
    if !rate.is_positive() {
        return domain(format!("Poisson rate must be positive, got {rate}"));
    }
    Ok(())
}

/// Index after which the pmf sum is cut off: `rate + 20 sqrt(rate) + 50`.
pub fn truncation_cutoff(rate: f64) -> u64 {
    (rate + 20.0 * rate.sqrt() + 50.0).ceil() as u64
}

/// Upper bound on `P(Po(rate) >= a)` for `a > rate`:
/// `exp(-rate + a (1 + ln rate - ln a))`, rounded up to a power of two with
/// one extra binade of slack for the `f64` evaluation.
pub fn chernoff_tail(rate: f64, a: u64) -> Dyadic {
    let a = a as f64;
    assert!(a > rate);
    let ln_bound = -rate + a * (1.0 + rate.ln() - a.ln());
    let log2 = ln_bound / std::f64::consts::LN_2;
    Dyadic::pow2(log2.ceil() as i64 + 1)
}

/// Running sums `sum_{i<=j} rate^i / i!` for `j = 0..=upto`, multiplied by
/// `e^{-rate}`. Entry `j` is `P(Po(rate) <= j)` up to the ball radius.
fn pmf_prefix_sums(rate: &BigRational, upto: u64, wp: u32) -> Vec<HighPrecisionReal> {
    let num = rate.numer().magnitude().clone();
    let den = rate.denom().magnitude().clone();
    let weight = HighPrecisionReal::exp_neg(rate, wp);
    let mut term = weight.clone();
    let mut sum = weight;
    let mut out = Vec::with_capacity(upto as usize + 1);
    out.push(sum.clone());
    for i in 1..=upto {
        term = term.mul_biguint(&num).div_biguint(&(&den * i));
        sum = sum.add(&term);
        out.push(sum.clone());
    }
    out
}

fn working_precision(precision: u32, terms: u64) -> u32 {
    precision + 40 + (64 - terms.leading_zeros())
}

/// `P(Po(rate) <= t)`, or `P(Po(rate) < t)` when `strict`, with a certified
/// error bound covering rounding and the series cutoff.
pub fn poisson_cdf(
    rate: &BigRational,
    t: i64,
    strict: bool,
    precision_bits: u32,
) -> Result<HighPrecisionReal> {
    check_rate(rate)?;
    if t < 0 {
        return domain(format!("threshold must be nonnegative, got {t}"));
    }
    let last = if strict { t - 1 } else { t };
    if last < 0 {
        return Ok(HighPrecisionReal::zero(precision_bits));
    }
    let last = last as u64;
    let rate_f = rate.to_f64().unwrap_or(f64::MAX);
    let cutoff = truncation_cutoff(rate_f);
    let upto = last.min(cutoff);
    let wp = working_precision(precision_bits, upto);
    let mut value = pmf_prefix_sums(rate, upto, wp).pop().expect("nonempty");
    if last > cutoff {
        value = value.add_error(&chernoff_tail(rate_f, cutoff + 1));
    }
    Ok(value.with_precision(precision_bits))
}

/// `P(Po(rate) <= t)` for every `t = 0..=upto`. Entries past the series
/// cutoff carry the cutoff tail bound in their radius.
pub fn poisson_cdf_table(
    rate: &BigRational,
    upto: u64,
    precision_bits: u32,
) -> Result<Vec<HighPrecisionReal>> {
    check_rate(rate)?;
    let rate_f = rate.to_f64().unwrap_or(f64::MAX);
    let cutoff = truncation_cutoff(rate_f);
    let summed = upto.min(cutoff);
    let wp = working_precision(precision_bits, summed);
    let mut table: Vec<_> = pmf_prefix_sums(rate, summed, wp)
        .iter()
        .map(|v| v.with_precision(precision_bits))
        .collect();
    if upto > cutoff {
        let last = table[cutoff as usize].add_error(&chernoff_tail(rate_f, cutoff + 1));
        table.resize(upto as usize + 1, last);
    }
    Ok(table)
}

/// `P(Po(m) < m)` and `P(Po(m) <= m)` for an integer rate `m >= 1`,
/// sharing one pmf sum.
pub fn poisson_mean_pair(m: u64, precision_bits: u32) -> (HighPrecisionReal, HighPrecisionReal) {
    assert!(m >= 1);
    let rate = BigRational::from_integer(BigInt::from(m));
    let wp = working_precision(precision_bits, m);
    let sums = pmf_prefix_sums(&rate, m, wp);
    (
        sums[m as usize - 1].with_precision(precision_bits),
        sums[m as usize].with_precision(precision_bits),
    )
}

/// `d_TV(Bi(n, p), Po(np))`.
///
/// The Poisson mass beyond `n` is taken as `1 - P(Po(np) <= n)`, which is
/// certified by the same ball arithmetic as the rest of the sum.
pub fn total_variation_binomial_poisson(
    n: u64,
    p: &BigRational,
    precision_bits: u32,
) -> Result<HighPrecisionReal> {
    if !p.is_positive() || p >= &BigRational::one() {
        return domain(format!("p must lie in (0, 1), got {p}"));
    }
    if n == 0 {
        return domain("n must be positive");
    }
    let a = p.numer().magnitude().clone();
    let den = p.denom().magnitude().clone();
    let b = &den - &a;
    let rate = p * BigRational::from_integer(BigInt::from(n));
    let wp = working_precision(precision_bits, n) + 32;

    let bin_den: BigUint = num_traits::pow(den.clone(), n as usize);
    let mut bin_num: BigUint = num_traits::pow(b.clone(), n as usize);
    let poisson = pmf_prefix_sums(&rate, n, wp);

    let mut abs_sum = HighPrecisionReal::zero(wp);
    let mut prev = HighPrecisionReal::zero(wp);
    for k in 0..=n {
        if k > 0 {
            bin_num *= &a;
            bin_num *= n - k + 1;
            bin_num /= k;
            bin_num /= &b;
        }
        let po_k = poisson[k as usize].sub(&prev);
        prev = poisson[k as usize].clone();
        let bin_k = HighPrecisionReal::from_integer(BigInt::from(bin_num.clone()), wp)
            .div_biguint(&bin_den);
        abs_sum = abs_sum.add(&bin_k.sub(&po_k).abs());
    }
    let tail = HighPrecisionReal::one(wp).sub(&poisson[n as usize]);
    Ok(abs_sum.add(&tail).div_u64(2).with_precision(precision_bits))
}

/// One of the four inequalities checked per `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PoissonRelation {
    /// `P(Po(m) < m) < P(Po(m+1) < m+1)`
    StrictIncreasing,
    /// `P(Po(m) < m) < 1/2`
    StrictBelowHalf,
    /// `P(Po(m) <= m) > P(Po(m+1) <= m+1)`
    NonStrictDecreasing,
    /// `P(Po(m) <= m) > 1/2`
    NonStrictAboveHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckOutcome {
    Violated,
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonFinding {
    pub m: u64,
    pub relation: PoissonRelation,
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonMonotonicityReport {
    pub m_max: u64,
    pub precision_bits: u32,
    pub checks: usize,
    /// Any inequality that failed or could not be certified.
    pub findings: Vec<PoissonFinding>,
}

impl PoissonMonotonicityReport {
    pub fn violations(&self) -> usize {
        self.count(CheckOutcome::Violated)
    }

    pub fn uncertified(&self) -> usize {
        self.count(CheckOutcome::Uncertified)
    }

    fn count(&self, o: CheckOutcome) -> usize {
        self.findings.iter().filter(|f| f.outcome == o).count()
    }

    pub fn all_certified(&self) -> bool {
        self.findings.is_empty()
    }
}

fn judge(
    got: Certified,
    want: Certified,
    m: u64,
    relation: PoissonRelation,
) -> Option<PoissonFinding> {
    let outcome = match got {
        g if g == want => return None,
        Certified::Uncertified => CheckOutcome::Uncertified,
        _ => CheckOutcome::Violated,
    };
    Some(PoissonFinding {
        m,
        relation,
        outcome,
    })
}

/// Checks both Poisson monotonicity chains for every pair `(m, m+1)` with
/// `1 <= m <= m_max`, and the half bounds for every `1 <= m <= m_max + 1`.
pub fn verify_poisson_monotonicity(
    m_max: u64,
    precision_bits: u32,
) -> Result<PoissonMonotonicityReport> {
    if m_max < 1 {
        return domain("m_max must be at least 1");
    }
    let values: Vec<_> = (1..=m_max + 1)
        .into_par_iter()
        .map(|m| poisson_mean_pair(m, precision_bits))
        .collect();
    let half = Dyadic::pow2(-1);
    let mut findings = Vec::new();
    let mut checks = 0;
    for (i, (lt, le)) in values.iter().enumerate() {
        let m = i as u64 + 1;
        findings.extend(judge(
            lt.compare_exact(&half),
            Certified::Less,
            m,
            PoissonRelation::StrictBelowHalf,
        ));
        findings.extend(judge(
            le.compare_exact(&half),
            Certified::Greater,
            m,
            PoissonRelation::NonStrictAboveHalf,
        ));
        checks += 2;
        if let Some((lt_next, le_next)) = values.get(i + 1) {
            findings.extend(judge(
                lt.compare_certified(lt_next),
                Certified::Less,
                m,
                PoissonRelation::StrictIncreasing,
            ));
            findings.extend(judge(
                le.compare_certified(le_next),
                Certified::Greater,
                m,
                PoissonRelation::NonStrictDecreasing,
            ));
            checks += 2;
        }
    }
    Ok(PoissonMonotonicityReport {
        m_max,
        precision_bits,
        checks,
        findings,
    })
}
