//! Midpoint-radius ("ball") arithmetic over dyadic rationals.
//!
//! A [`HighPrecisionReal`] is a pair `(mid, rad)` with the guarantee that the
//! true value lies in `[mid - rad, mid + rad]`. Midpoints carry a configurable
//! number of mantissa bits; every rounding step adds its worst-case error to
//! the radius, so the radius is a certified bound on all accumulated rounding
//! and truncation error.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Radius mantissas are kept this short; they only need to be upper bounds.
const RAD_BITS: u64 = 30;

/// `man * 2^exp`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn new(man: BigInt, exp: i64) -> Self {
        Self { man, exp }
    }

    pub fn from_int(v: impl Into<BigInt>) -> Self {
        Self::new(v.into(), 0)
    }

    /// `2^e`
    pub fn pow2(e: i64) -> Self {
        Self::new(BigInt::one(), e)
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn abs(&self) -> Self {
        Self::new(self.man.abs(), self.exp)
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, i64) {
        match self.exp.cmp(&other.exp) {
            Ordering::Equal => (self.man.clone(), other.man.clone(), self.exp),
            Ordering::Greater => {
                let s = (self.exp - other.exp) as usize;
                (&self.man << s, other.man.clone(), other.exp)
            }
            Ordering::Less => {
                let s = (other.exp - self.exp) as usize;
                (self.man.clone(), &other.man << s, self.exp)
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a, b, e) = self.aligned(other);
        Self::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.man, self.exp)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(&self.man * &other.man, self.exp + other.exp)
    }

    /// Truncates to at most `prec` mantissa bits, returning the truncated
    /// value and an upper bound on the discarded magnitude.
    fn truncate(&self, prec: u64) -> (Self, Option<Self>) {
        let bits = self.man.bits();
        if bits <= prec {
            return (self.clone(), None);
        }
        let s = bits - prec;
        // `>>` floors for negative values; the error is still below one new ulp
        let man = &self.man >> s as usize;
        let exp = self.exp + s as i64;
        let exact = self.man.trailing_zeros().is_some_and(|z| z >= s);
        let err = if exact { None } else { Some(Self::pow2(exp)) };
        (Self::new(man, exp), err)
    }

    /// Upper bound of a nonnegative value using at most `bits` mantissa bits.
    fn round_up(&self, bits: u64) -> Self {
        debug_assert!(!self.is_negative());
        let b = self.man.bits();
        if b <= bits {
            return self.clone();
        }
        let s = b - bits;
        let man = (&self.man >> s as usize) + 1u32;
        Self::new(man, self.exp + s as i64)
    }

    /// Nearest-ish `f64` (truncated mantissa, so within one ulp).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.man.bits();
        let (m, e) = if bits > 64 {
            let s = bits - 64;
            (&self.man >> s as usize, self.exp + s as i64)
        } else {
            (self.man.clone(), self.exp)
        };
        let (sign, mag) = m.into_parts();
        let mag = mag.iter_u64_digits().next().unwrap_or(0) as f64;
        let e = e.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
        let v = libm::ldexp(mag, e);
        if sign == Sign::Minus {
            -v
        } else {
            v
        }
    }

    /// An `f64` that is at least the magnitude of this value.
    pub fn to_f64_upper_abs(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = self.abs().to_f64();
        if v == 0.0 {
            f64::MIN_POSITIVE
        } else {
            v.next_up()
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.man.sign() != other.man.sign() {
            return self.man.sign().cmp(&other.man.sign());
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

/// Outcome of comparing two certified reals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certified {
    Less,
    Greater,
    Uncertified,
}

/// A real number known to lie within `error_bound` of a dyadic midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HighPrecisionReal {
    mid: Dyadic,
    rad: Dyadic,
    precision: u32,
}

impl HighPrecisionReal {
    fn normalized(mid: Dyadic, rad: Dyadic, precision: u32) -> Self {
        let (mid, err) = mid.truncate(precision as u64);
        let rad = match err {
            Some(e) => rad.add(&e),
            None => rad,
        };
        Self {
            mid,
            rad: rad.round_up(RAD_BITS),
            precision,
        }
    }

    pub fn exact(value: Dyadic, precision: u32) -> Self {
        Self::normalized(value, Dyadic::zero(), precision)
    }

    pub fn from_integer(v: impl Into<BigInt>, precision: u32) -> Self {
        Self::exact(Dyadic::from_int(v), precision)
    }

    pub fn zero(precision: u32) -> Self {
        Self::from_integer(0, precision)
    }

    pub fn one(precision: u32) -> Self {
        Self::from_integer(1, precision)
    }

    pub fn from_rational(q: &BigRational, precision: u32) -> Self {
        Self::from_integer(q.numer().clone(), precision).div_biguint(q.denom().magnitude())
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        Self::normalized(self.mid.clone(), self.rad.clone(), precision)
    }

    pub fn midpoint(&self) -> &Dyadic {
        &self.mid
    }

    pub fn radius(&self) -> &Dyadic {
        &self.rad
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    /// Midpoint as `f64`.
    pub fn value(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Upper bound on the distance between the true value and the
    /// (full-precision) midpoint.
    pub fn error_bound(&self) -> f64 {
        self.rad.to_f64_upper_abs()
    }

    /// Widens the ball by a nonnegative amount.
    pub fn add_error(&self, err: &Dyadic) -> Self {
        Self::normalized(self.mid.clone(), self.rad.add(&err.abs()), self.precision)
    }

    fn prec_of(&self, other: &Self) -> u32 {
        self.precision.max(other.precision)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::normalized(
            self.mid.add(&other.mid),
            self.rad.add(&other.rad),
            self.prec_of(other),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::normalized(
            self.mid.sub(&other.mid),
            self.rad.add(&other.rad),
            self.prec_of(other),
        )
    }

    pub fn neg(&self) -> Self {
        Self {
            mid: self.mid.neg(),
            rad: self.rad.clone(),
            precision: self.precision,
        }
    }

    /// `||a| - |b|| <= |a - b|`, so the radius carries over unchanged.
    pub fn abs(&self) -> Self {
        Self {
            mid: self.mid.abs(),
            rad: self.rad.clone(),
            precision: self.precision,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mid = self.mid.mul(&other.mid);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        Self::normalized(mid, rad, self.prec_of(other))
    }

    pub fn mul_biguint(&self, k: &BigUint) -> Self {
        let k = Dyadic::from_int(BigInt::from(k.clone()));
        Self::normalized(self.mid.mul(&k), self.rad.mul(&k), self.precision)
    }

    pub fn mul_u64(&self, k: u64) -> Self {
        self.mul_biguint(&BigUint::from(k))
    }

    /// Division by a positive integer.
    pub fn div_biguint(&self, d: &BigUint) -> Self {
        assert!(!d.is_zero(), "division by zero");
        if d.is_one() {
            return self.clone();
        }
        let d_int = BigInt::from(d.clone());
        // shift so the quotient keeps precision + 2 bits
        let want = self.precision as u64 + 2 + d.bits();
        let have = self.mid.man.bits();
        let s = want.saturating_sub(have) as usize;
        let num = &self.mid.man << s;
        let (q, r) = num.div_mod_floor(&d_int);
        let exp = self.mid.exp - s as i64;
        let mut rad = self.rad.clone();
        // rad / d, rounded up
        if !rad.is_zero() {
            let rs = (RAD_BITS + d.bits()) as usize;
            let (rq, rr) = (&rad.man << rs).div_rem(&d_int);
            let rq = if rr.is_zero() { rq } else { rq + 1 };
            rad = Dyadic::new(rq, rad.exp - rs as i64);
        }
        if !r.is_zero() {
            rad = rad.add(&Dyadic::pow2(exp));
        }
        Self::normalized(Dyadic::new(q, exp), rad, self.precision)
    }

    pub fn div_u64(&self, d: u64) -> Self {
        self.div_biguint(&BigUint::from(d))
    }

    /// `e^{-x}` for a nonnegative rational `x`.
    pub fn exp_neg(x: &BigRational, precision: u32) -> Self {
        assert!(!x.is_negative(), "exp_neg expects x >= 0");
        if x.is_zero() {
            return Self::one(precision);
        }
        // halve until x / 2^k <= 1/2
        let ceil = x.ceil().to_integer();
        let k = ceil.bits() + 1;
        let wp = precision + 64 + k as u32;
        let mut den = x.denom().magnitude().clone();
        den <<= k as usize;
        let y = Self::from_integer(x.numer().clone(), wp).div_biguint(&den);
        let tiny = Dyadic::pow2(-(wp as i64) - 8);
        let mut sum = Self::one(wp);
        let mut term = Self::one(wp);
        let mut j = 1u64;
        loop {
            term = term.mul(&y).div_u64(j).neg();
            sum = sum.add(&term);
            if term.upper().abs() < tiny && term.lower().abs() < tiny {
                break;
            }
            j += 1;
        }
        // alternating series with decreasing terms: the remainder is below |term|
        let bound = term.mid.abs().add(&term.rad);
        sum = sum.add_error(&bound);
        for _ in 0..k {
            sum = sum.mul(&sum);
        }
        sum.with_precision(precision)
    }

    /// Compares with a margin larger than twice the larger error bound.
    pub fn compare_certified(&self, other: &Self) -> Certified {
        let diff = self.mid.sub(&other.mid);
        let r = if self.rad >= other.rad {
            &self.rad
        } else {
            &other.rad
        };
        let twice = r.add(r);
        if diff.abs() <= twice {
            Certified::Uncertified
        } else if diff.is_negative() {
            Certified::Less
        } else {
            Certified::Greater
        }
    }

    /// Certified comparison against an exact dyadic value.
    pub fn compare_exact(&self, value: &Dyadic) -> Certified {
        let diff = self.mid.sub(value);
        let twice = self.rad.add(&self.rad);
        if diff.abs() <= twice {
            Certified::Uncertified
        } else if diff.is_negative() {
            Certified::Less
        } else {
            Certified::Greater
        }
    }

    pub fn contains(&self, value: &Dyadic) -> bool {
        &self.lower() <= value && value <= &self.upper()
    }

    /// Whether `value` is within the error bound plus `slack`, allowing for
    /// the rounding of the midpoint to `f64`.
    pub fn contains_f64(&self, value: f64, slack: f64) -> bool {
        let v = self.value();
        (value - v).abs() <= self.error_bound() + v.abs() * f64::EPSILON + slack
    }
}

/// Exact dyadic representation of a finite `f64`.
pub fn dyadic_from_f64(v: f64) -> Dyadic {
    assert!(v.is_finite());
    if v == 0.0 {
        return Dyadic::zero();
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (man, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    Dyadic::new(BigInt::from(man) * sign, exp)
}
