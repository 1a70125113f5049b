//! C interface to the `edgeworth` crate.
//!
//! Every function returns an [`EwStatus`]; results go through out-pointers.
//! On failure the message is available from [`ew_last_error`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use edgeworth::binomial_chvatal::{verify_chvatal, ChvatalReport};
use edgeworth::cumulants::{bernoulli_distribution, poisson1_analytic};
use edgeworth::edgeworth::{EdgeworthModel, IntegerMeanCoefficients, Variant};
use edgeworth::exactprob::{chvatal_q, chvatal_q_strict, poisson_cdf, rational_to_f64};
use num_bigint::BigInt;
use num_rational::BigRational;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwStatus {
    Ok = 0,
    NullPointer = 1,
    /// argument outside the mathematical domain
    Domain = 2,
    /// output buffer too small; the required size was written
    BufferTooSmall = 3,
    /// internal panic, caught at the boundary
    Panic = 4,
}

/// Lattice correction variant.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwVariant {
    Full = 0,
    Simplified = 1,
}

impl From<EwVariant> for Variant {
    fn from(v: EwVariant) -> Self {
        match v {
            EwVariant::Full => Variant::Full,
            EwVariant::Simplified => Variant::Simplified,
        }
    }
}

/// Opaque expansion model.
pub struct EwModel {
    model: EdgeworthModel,
    le: IntegerMeanCoefficients,
    lt: IntegerMeanCoefficients,
    mean: BigRational,
}

/// Opaque verification report for one `n`.
pub struct EwReport {
    report: ChvatalReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (EwStatus, String)>) -> EwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EwStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            EwStatus::Panic
        }
    }
}

fn domain(e: edgeworth::Error) -> (EwStatus, String) {
    (EwStatus::Domain, e.to_string())
}

fn null(name: &str) -> (EwStatus, String) {
    (EwStatus::NullPointer, format!("{name} is null"))
}

fn rational(num: i64, den: i64) -> Result<BigRational, (EwStatus, String)> {
    if den == 0 {
        return Err((EwStatus::Domain, "zero denominator".into()));
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

unsafe fn write<T>(out: *mut T, v: T, name: &str) -> Result<(), (EwStatus, String)> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(v);
    Ok(())
}

/// Copies `s` and a trailing NUL into `buf`. `needed` receives the buffer
/// size required, NUL included.
unsafe fn write_str(
    s: &str,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> Result<(), (EwStatus, String)> {
    let bytes = s.as_bytes();
    if !needed.is_null() {
        needed.write(bytes.len() + 1);
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < bytes.len() + 1 {
        return Err((
            EwStatus::BufferTooSmall,
            format!("need {} bytes, got {len}", bytes.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
    buf.add(bytes.len()).write(0);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn ew_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `P(Bi(n, m/n) <= m)` (or `< m` when `strict`), rounded to double.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_chvatal_q(n: u64, m: u64, strict: bool, out: *mut f64) -> EwStatus {
    guard(|| {
        let v = if strict {
            chvatal_q_strict(n, m)
        } else {
            chvatal_q(n, m)
        }
        .map_err(domain)?;
        write(out, rational_to_f64(&v), "out")
    })
}

/// Exact `P(Bi(n, m/n) <= m)` (or `< m`) as a NUL-terminated `num/den`.
///
/// # Safety
/// `buf` must be valid for `len` bytes; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn ew_chvatal_q_exact(
    n: u64,
    m: u64,
    strict: bool,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> EwStatus {
    guard(|| {
        let v = if strict {
            chvatal_q_strict(n, m)
        } else {
            chvatal_q(n, m)
        }
        .map_err(domain)?;
        write_str(&format!("{}/{}", v.numer(), v.denom()), buf, len, needed)
    })
}

/// `P(Po(rate_num / rate_den) <= t)` (or `< t`) with a certified bound:
/// the true value lies within `error` of `value`, up to double rounding.
///
/// # Safety
/// `value` and `error` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_poisson_cdf(
    rate_num: i64,
    rate_den: i64,
    t: i64,
    strict: bool,
    precision_bits: u32,
    value: *mut f64,
    error: *mut f64,
) -> EwStatus {
    guard(|| {
        if value.is_null() || error.is_null() {
            return Err(null("value/error"));
        }
        let rate = rational(rate_num, rate_den)?;
        let v = poisson_cdf(&rate, t, strict, precision_bits).map_err(domain)?;
        write(value, v.value(), "value")?;
        write(error, v.error_bound(), "error")
    })
}

fn build_model(
    dist: edgeworth::Result<edgeworth::cumulants::LatticeDistribution>,
    k: u32,
    out: *mut *mut EwModel,
) -> Result<(), (EwStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    let dist = dist.map_err(domain)?;
    let model = EdgeworthModel::new(&dist, k as usize).map_err(domain)?;
    let handle = Box::new(EwModel {
        le: model.integer_mean_coefficients(false),
        lt: model.integer_mean_coefficients(true),
        mean: dist.mean.clone(),
        model,
    });
    unsafe { out.write(Box::into_raw(handle)) };
    Ok(())
}

/// Order-`k` expansion for sums of Bernoulli(`p_num / p_den`) variables.
/// Free the handle with [`ew_model_free`].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_bernoulli(
    p_num: i64,
    p_den: i64,
    k: u32,
    out: *mut *mut EwModel,
) -> EwStatus {
    guard(|| {
        let p = rational(p_num, p_den)?;
        build_model(bernoulli_distribution(&p, k as usize + 2), k, out)
    })
}

/// Order-`k` expansion for sums of Poisson(1) variables.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_poisson1(k: u32, out: *mut *mut EwModel) -> EwStatus {
    guard(|| build_model(poisson1_analytic(k as usize + 2), k, out))
}

/// # Safety
/// `model` must come from a model constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ew_model_free(model: *mut EwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

fn model_ref<'a>(model: *const EwModel) -> Result<&'a EwModel, (EwStatus, String)> {
    unsafe { model.as_ref() }.ok_or_else(|| null("model"))
}

/// Lattice-corrected approximation of `P(S_n <= n mu + x sigma sqrt(n))`
/// (`<` when `strict`).
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_cdf(
    model: *const EwModel,
    n: u64,
    x: f64,
    variant: EwVariant,
    strict: bool,
    out: *mut f64,
) -> EwStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = m
            .model
            .lattice_cdf_approx(n, x, variant.into(), strict)
            .map_err(domain)?;
        write(out, v, "out")
    })
}

/// Approximation of `P(S_n <= t)` (`< t` when `strict`) at an integer `t`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_cdf_at(
    model: *const EwModel,
    n: u64,
    t: i64,
    variant: EwVariant,
    strict: bool,
    out: *mut f64,
) -> EwStatus {
    guard(|| {
        let m = model_ref(model)?;
        let v = m
            .model
            .lattice_cdf_at(n, t, variant.into(), strict)
            .map_err(domain)?;
        write(out, v, "out")
    })
}

/// Expansion of `P(S_n <= n mu)` (or `<`) when `n mu` is an integer.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_integer_mean(
    model: *const EwModel,
    n: u64,
    strict: bool,
    out: *mut f64,
) -> EwStatus {
    guard(|| {
        let m = model_ref(model)?;
        let center = &m.mean * BigRational::from_integer(BigInt::from(n));
        if n == 0 || !center.is_integer() {
            return Err((
                EwStatus::Domain,
                format!("n * mean = {center} is not a positive-n integer"),
            ));
        }
        let coeffs = if strict { &m.lt } else { &m.le };
        write(out, coeffs.eval(n), "out")
    })
}

/// Coefficient of `n^{-j/2}` in the integer-mean expansion.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_integer_mean_coefficient(
    model: *const EwModel,
    j: u32,
    strict: bool,
    out: *mut f64,
) -> EwStatus {
    guard(|| {
        let m = model_ref(model)?;
        let coeffs = if strict { &m.lt } else { &m.le };
        let j = j as usize;
        if j == 0 || j > coeffs.order() {
            return Err((
                EwStatus::Domain,
                format!("coefficient index must be in 1..={}", coeffs.order()),
            ));
        }
        write(out, coeffs.coefficient(j), "out")
    })
}

/// Whether `sigma sqrt(n) >= ln n`.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_model_within_guarantee(
    model: *const EwModel,
    n: u64,
    out: *mut bool,
) -> EwStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, m.model.within_guarantee(n), "out")
    })
}

/// Exact location of the minimum of `P(Bi(n, m/n) <= m)` over `m`.
/// Free the handle with [`ew_report_free`].
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ew_verify(n: u64, out: *mut *mut EwReport) -> EwStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let report = verify_chvatal(n).map_err(domain)?;
        let json = serde_json_line(&report);
        out.write(Box::into_raw(Box::new(EwReport { report, json })));
        Ok(())
    })
}

fn serde_json_line(report: &ChvatalReport) -> CString {
    let s = report.summary();
    let changes: Vec<String> = s.sign_changes.iter().map(u64::to_string).collect();
    let text = format!(
        r#"{{"n":{},"argmin":{},"target":{},"unimodal":{},"matches":{},"sign_changes":[{}]}}"#,
        s.n,
        s.argmin,
        s.target,
        s.unimodal,
        s.matches,
        changes.join(",")
    );
    CString::new(text).expect("no interior NUL")
}

/// # Safety
/// `report` must come from [`ew_verify`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ew_report_free(report: *mut EwReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ew_report_argmin(
    report: *const EwReport,
    argmin: *mut u64,
    target: *mut u64,
) -> EwStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write(argmin, r.report.argmin_m, "argmin")?;
        write(target, r.report.target_m, "target")
    })
}

/// # Safety
/// `report` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ew_report_flags(
    report: *const EwReport,
    unimodal: *mut bool,
    matches: *mut bool,
) -> EwStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write(unimodal, r.report.unimodal, "unimodal")?;
        write(matches, r.report.matches_conjecture, "matches")
    })
}

/// One-line JSON summary, owned by the report.
///
/// # Safety
/// `report` must be a live handle. The string lives as long as the report.
#[no_mangle]
pub unsafe extern "C" fn ew_report_json(report: *const EwReport) -> *const c_char {
    match report.as_ref() {
        Some(r) => r.json.as_ptr(),
        None => {
            set_error("report is null");
            ptr::null()
        }
    }
}

/// Reads the last error as an owned Rust string.
pub fn last_error_string() -> String {
    unsafe { CStr::from_ptr(ew_last_error()) }
        .to_string_lossy()
        .into_owned()
}
