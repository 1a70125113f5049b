//! Sup-norm residuals of the lattice expansion against exact CDFs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use super::model::{EdgeworthModel, Variant};
use crate::error::{domain, Result};
use crate::exactprob::binomial::cdf_table;
use crate::exactprob::{poisson_cdf_table, ratio_to_f64};

/// Exact (or certified) `P(S_n <= t)` for one fixed `n`.
pub trait CdfOracle: Sync {
    fn cdf(&self, t: i64) -> Result<f64>;
}

/// `S_n ~ Bi(n, p)` from an exact rational table.
#[derive(Debug, Clone)]
pub struct BinomialOracle {
    values: Vec<f64>,
}

impl BinomialOracle {
    pub fn new(n: u64, p: &BigRational) -> Result<Self> {
        if !p.is_positive() || p >= &BigRational::from_integer(1.into()) {
            return domain(format!("p must lie in (0, 1), got {p}"));
        }
        if n == 0 || n > u32::MAX as u64 {
            return domain(format!("n = {n} out of range"));
        }
        let (a, d) = match (p.numer().to_u64(), p.denom().to_u64()) {
            (Some(a), Some(d)) => (a, d),
            _ => return domain(format!("p = {p} too large to tabulate")),
        };
        let (cumulative, den) = cdf_table(n, a, d - a);
        Ok(Self {
            values: cumulative.iter().map(|c| ratio_to_f64(c, &den)).collect(),
        })
    }
}

impl CdfOracle for BinomialOracle {
    fn cdf(&self, t: i64) -> Result<f64> {
        if t < 0 {
            return Ok(0.0);
        }
        Ok(*self.values.get(t as usize).unwrap_or(&1.0))
    }
}

/// `S_n ~ Po(rate)` from certified ball sums, tabulated up to `t_max`.
#[derive(Debug, Clone)]
pub struct PoissonOracle {
    values: Vec<f64>,
    /// largest radius in the table
    pub max_error: f64,
}

impl PoissonOracle {
    pub fn new(rate: &BigRational, t_max: u64, precision_bits: u32) -> Result<Self> {
        let table = poisson_cdf_table(rate, t_max, precision_bits)?;
        Ok(Self {
            max_error: table.iter().map(|v| v.error_bound()).fold(0.0, f64::max),
            values: table.iter().map(|v| v.value()).collect(),
        })
    }
}

impl CdfOracle for PoissonOracle {
    fn cdf(&self, t: i64) -> Result<f64> {
        if t < 0 {
            return Ok(0.0);
        }
        match self.values.get(t as usize) {
            Some(v) => Ok(*v),
            None => domain(format!("threshold {t} beyond the tabulated range")),
        }
    }
}

/// How a scan point approaches the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Grid,
    /// limit from the left at a lattice point, i.e. `P(S_n < t)`
    LeftLimit,
    /// value at a lattice point, `P(S_n <= t)`
    AtPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionEvaluation {
    pub x: f64,
    pub side: Side,
    pub approx: f64,
    pub exact: f64,
}

impl ExpansionEvaluation {
    pub fn residual(&self) -> f64 {
        self.approx - self.exact
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualScan {
    pub n: u64,
    pub k: usize,
    pub variant: Variant,
    /// `sigma sqrt(n) >= ln n`
    pub within_guarantee: bool,
    pub sup_residual: f64,
    pub argsup: usize,
    pub per_point: Vec<ExpansionEvaluation>,
}

/// 401 equally spaced points on `[-5, 5]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(-5.0, 5.0, 401)
}

pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

enum Probe {
    Grid(f64),
    Lattice(i64, bool),
}

/// Evaluates the expansion over `x_grid` and over both one-sided limits at
/// every lattice point inside the grid's range, and reports the largest
/// absolute residual.
pub fn residual_scan(
    model: &EdgeworthModel,
    n: u64,
    x_grid: &[f64],
    oracle: &dyn CdfOracle,
    variant: Variant,
) -> Result<ResidualScan> {
    if x_grid.is_empty() {
        return domain("empty grid");
    }
    let lo = x_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s = model.sigma() * (n as f64).sqrt();
    let center = model.mean() * BigRational::from_integer(BigInt::from(n));
    let center_f = crate::exactprob::rational_to_f64(&center);
    let t_lo = (center_f + lo * s).ceil() as i64;
    let t_hi = (center_f + hi * s).floor() as i64;

    let mut probes: Vec<Probe> = x_grid.iter().map(|&x| Probe::Grid(x)).collect();
    for t in t_lo..=t_hi {
        probes.push(Probe::Lattice(t, true));
        probes.push(Probe::Lattice(t, false));
    }

    let per_point = probes
        .par_iter()
        .map(|probe| -> Result<ExpansionEvaluation> {
            match *probe {
                Probe::Grid(x) => {
                    let pos = model.locate(n, x);
                    Ok(ExpansionEvaluation {
                        x,
                        side: Side::Grid,
                        approx: model.lattice_cdf_approx(n, x, variant, false)?,
                        exact: oracle.cdf(pos.floor)?,
                    })
                }
                Probe::Lattice(t, left) => Ok(ExpansionEvaluation {
                    x: model.standardize(n, t),
                    side: if left { Side::LeftLimit } else { Side::AtPoint },
                    approx: model.lattice_cdf_at(n, t, variant, left)?,
                    exact: oracle.cdf(if left { t - 1 } else { t })?,
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let (argsup, sup_residual) = per_point
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.residual().abs()))
        .fold(
            (0, 0.0),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );

    Ok(ResidualScan {
        n,
        k: model.order(),
        variant,
        within_guarantee: model.within_guarantee(n),
        sup_residual,
        argsup,
        per_point,
    })
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than
/// two usable points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}
