//! Exact verification of the minimum of `q_m = P(Bi(n, m/n) <= m)`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exactprob::{binomial_cdf_rational, rational_to_f64, QTable};

/// The integer nearest to `2n/3`. `2n/3` is never a half-integer, so this
/// is unambiguous.
pub fn target_m(n: u64) -> u64 {
    debug_assert_ne!((4 * n) % 6, 3);
    (4 * n + 3) / 6
}

fn sign(o: Ordering) -> i8 {
    match o {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// Everything computed for one `n`.
#[derive(Debug, Clone)]
pub struct ChvatalReport {
    pub n: u64,
    pub q_values: QTable,
    pub argmin_m: u64,
    /// other indices attaining the minimum (empty unless there is a tie)
    pub argmin_ties: Vec<u64>,
    pub target_m: u64,
    /// `sign(q_{m+1} - q_m)` for `m = 0..n`
    pub sign_pattern: Vec<i8>,
    /// a block of `-1` followed by a block of `+1`, no zeros
    pub unimodal: bool,
    pub matches_conjecture: bool,
    /// `q_{m-1} > q_m` for all `1 <= m <= n/2`
    pub lower_half_decreasing: bool,
    /// `m` where `sign(q_{m+1} - q_m) != sign(m + 1/2 - 2n/3)`
    pub sign_exceptions: Vec<u64>,
}

/// Compact per-`n` record; serializes to
/// `{n, argmin, target, unimodal, matches, sign_changes}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChvatalSummary {
    pub n: u64,
    pub argmin: u64,
    pub target: u64,
    pub unimodal: bool,
    pub matches: bool,
    /// `m` where the sign of the increments changes
    pub sign_changes: Vec<u64>,
    #[serde(skip)]
    pub argmin_ties: Vec<u64>,
    #[serde(skip)]
    pub lower_half_decreasing: bool,
    #[serde(skip)]
    pub sign_exceptions: Vec<u64>,
}

impl ChvatalReport {
    pub fn sign_changes(&self) -> Vec<u64> {
        sign_changes(&self.sign_pattern)
    }

    pub fn summary(&self) -> ChvatalSummary {
        ChvatalSummary {
            n: self.n,
            argmin: self.argmin_m,
            target: self.target_m,
            unimodal: self.unimodal,
            matches: self.matches_conjecture,
            sign_changes: self.sign_changes(),
            argmin_ties: self.argmin_ties.clone(),
            lower_half_decreasing: self.lower_half_decreasing,
            sign_exceptions: self.sign_exceptions.clone(),
        }
    }
}

fn sign_changes(pattern: &[i8]) -> Vec<u64> {
    pattern
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i as u64 + 1)
        .collect()
}

fn is_unimodal(pattern: &[i8]) -> bool {
    if pattern.contains(&0) {
        return false;
    }
    let first_up = pattern.iter().position(|&s| s > 0).unwrap_or(pattern.len());
    pattern[first_up..].iter().all(|&s| s > 0)
}

pub fn verify_chvatal(n: u64) -> Result<ChvatalReport> {
    if n < 2 {
        return domain(format!("n must be at least 2, got {n}"));
    }
    let table = QTable::new(n)?;
    let le = &table.le;

    let min = le.iter().min().expect("n + 1 entries");
    let mut hits = (0..=n).filter(|&m| &le[m as usize] == min);
    let argmin_m = hits.next().expect("minimum is attained");
    let argmin_ties: Vec<u64> = hits.collect();

    let sign_pattern: Vec<i8> = le.windows(2).map(|w| sign(w[1].cmp(&w[0]))).collect();
    let unimodal = is_unimodal(&sign_pattern);
    let target = target_m(n);

    let lower_half_decreasing = (1..=n / 2).all(|m| le[m as usize - 1] > le[m as usize]);
    let sign_exceptions = sign_pattern
        .iter()
        .enumerate()
        .filter(|(m, &s)| {
            let predicted = if 6 * *m as u64 + 3 < 4 * n { -1 } else { 1 };
            s != predicted
        })
        .map(|(m, _)| m as u64)
        .collect();

    Ok(ChvatalReport {
        n,
        argmin_m,
        matches_conjecture: argmin_m == target && argmin_ties.is_empty(),
        argmin_ties,
        target_m: target,
        sign_pattern,
        unimodal,
        lower_half_decreasing,
        sign_exceptions,
        q_values: table,
    })
}

/// Exact check that `q_{m-1} > q_m` for every `1 <= m <= n/2`.
pub fn lower_half_decreasing(n: u64) -> Result<bool> {
    Ok(verify_chvatal(n)?.lower_half_decreasing)
}

/// `p_i = i / (G + 1)`, `i = 1..=G`.
pub fn uniform_p_grid(points: u64) -> Vec<BigRational> {
    (1..=points)
        .map(|i| BigRational::new(BigInt::from(i), BigInt::from(points + 1)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Grid,
    /// limit as `p` increases to `m/n`
    LeftLimit,
    /// value at `p = m/n`
    AtPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub p: BigRational,
    pub kind: RowKind,
    /// `P(Bi(n, p) <= floor(np))`
    pub cdf_le: BigRational,
    /// `P(Bi(n, p) < np)`
    pub cdf_lt: BigRational,
    /// `1/2 + (4 - 2p - 6{np}) / (6 sqrt(2 pi n p (1-p)))`
    pub rp_approx: f64,
    /// `np(1-p) >= ln^2 n`
    pub qualified: bool,
}

impl ScanRow {
    pub fn rp_residual(&self) -> f64 {
        rational_to_f64(&self.cdf_le) - self.rp_approx
    }
}

fn two_term(n: u64, p: f64, frac: f64) -> f64 {
    let v = n as f64 * p * (1.0 - p);
    0.5 + (4.0 - 2.0 * p - 6.0 * frac) / (6.0 * (2.0 * PI * v).sqrt())
}

/// Exact saw-tooth values of `P(Bi(n, p) <= np)` and `P(Bi(n, p) < np)`
/// over `p_grid`, with both one-sided rows at every jump `p = m/n`,
/// `0 < m < n`, and the two-term approximation at each row. Rows are
/// sorted by `p`; at a jump the left limit comes first.
pub fn scan_fixed_n(n: u64, p_grid: &[BigRational]) -> Result<Vec<ScanRow>> {
    if n == 0 {
        return domain("n must be positive");
    }
    let one = BigRational::one();
    if let Some(p) = p_grid.iter().find(|p| !p.is_positive() || *p >= &one) {
        return domain(format!("grid point {p} outside (0, 1)"));
    }
    let nq = BigRational::from_integer(BigInt::from(n));
    let ln2 = (n as f64).ln().powi(2);
    let qualified = |p: f64| n as f64 * p * (1.0 - p) >= ln2;

    let mut rows = Vec::new();
    for p in p_grid {
        let np = p * &nq;
        if np.is_integer() {
            continue;
        }
        let floor = np.floor().to_integer();
        let t: i64 = floor.clone().try_into().expect("t <= n");
        let frac = rational_to_f64(&(np.clone() - BigRational::from_integer(floor)));
        let pf = rational_to_f64(p);
        let le = binomial_cdf_rational(n, p, t, false)?;
        rows.push(ScanRow {
            p: p.clone(),
            kind: RowKind::Grid,
            cdf_lt: le.clone(),
            cdf_le: le,
            rp_approx: two_term(n, pf, frac),
            qualified: qualified(pf),
        });
    }
    let table = QTable::new(n)?;
    for m in 1..n {
        let p = BigRational::new(BigInt::from(m), BigInt::from(n));
        let pf = rational_to_f64(&p);
        let q = table.q(m);
        let q_strict = table.q_strict(m);
        rows.push(ScanRow {
            p: p.clone(),
            kind: RowKind::LeftLimit,
            cdf_le: q_strict.clone(),
            cdf_lt: q_strict.clone(),
            rp_approx: two_term(n, pf, 1.0),
            qualified: qualified(pf),
        });
        rows.push(ScanRow {
            p,
            kind: RowKind::AtPoint,
            cdf_le: q,
            cdf_lt: q_strict,
            rp_approx: two_term(n, pf, 0.0),
            qualified: qualified(pf),
        });
    }
    rows.sort_by(|a, b| {
        a.p.cmp(&b.p)
            .then((a.kind == RowKind::AtPoint).cmp(&(b.kind == RowKind::AtPoint)))
    });
    Ok(rows)
}
