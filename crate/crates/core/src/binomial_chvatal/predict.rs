//! Leading-order prediction of `q_{m+1} - q_m`, regime by regime.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use super::closed::CriticalExpansion;
use crate::cumulants::poisson1_analytic;
use crate::edgeworth::{EdgeworthModel, IntegerMeanCoefficients};
use crate::error::{domain, Result};

/// Half-width of the window around `2n/3` handled by the second-order
/// expansion.
pub const CRITICAL_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `m < 2 ln^2 n`: Poisson approximation of `q_m`
    LowerPoisson,
    /// `2 ln^2 n <= m <= n/2`
    LowerBulk,
    /// `n/2 < m < 2n/3 - 10`
    MiddleBulk,
    /// `|m - 2n/3| <= 10`
    CriticalWindow,
    /// `2n/3 + 10 < m <= n - 2 ln^2 n`
    UpperBulk,
    /// `m > n - 2 ln^2 n`: Poisson approximation of `q'_{n-m}`
    UpperPoisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub predicted: f64,
    pub regime: Regime,
}

struct Tables {
    critical: CriticalExpansion,
    poisson_le: IntegerMeanCoefficients,
    poisson_lt: IntegerMeanCoefficients,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let po = poisson1_analytic(6).expect("order 6 is valid");
        let model = EdgeworthModel::new(&po, 3).expect("Po(1) has all cumulants");
        Tables {
            critical: CriticalExpansion::new(),
            poisson_le: model.integer_mean_coefficients(false),
            poisson_lt: model.integer_mean_coefficients(true),
        }
    })
}

/// Which regime `m` falls in for a given `n`.
pub fn regime(n: u64, m: u64) -> Regime {
    let nf = n as f64;
    let mf = m as f64;
    let edge = 2.0 * nf.ln().powi(2);
    if mf < edge {
        Regime::LowerPoisson
    } else if mf > nf - edge {
        Regime::UpperPoisson
    } else if (mf - 2.0 * nf / 3.0).abs() <= CRITICAL_HALF_WIDTH {
        Regime::CriticalWindow
    } else if 2 * m <= n {
        Regime::LowerBulk
    } else if mf < 2.0 * nf / 3.0 {
        Regime::MiddleBulk
    } else {
        Regime::UpperBulk
    }
}

/// Leading-order estimate of `q_{m+1} - q_m` and the regime used.
pub fn predict_q_difference(n: u64, m: u64) -> Result<Prediction> {
    if n < 1 || m >= n {
        return domain(format!("need 0 <= m < n, got n = {n}, m = {m}"));
    }
    let t = tables();
    let nf = n as f64;
    let mf = m as f64;
    let regime = regime(n, m);
    let predicted = match regime {
        Regime::LowerPoisson => {
            // q_j ~ P(Po(j) <= j), with q_0 = 1
            let f = |j: u64| if j == 0 { 1.0 } else { t.poisson_le.eval(j) };
            f(m + 1) - f(m)
        }
        Regime::UpperPoisson => {
            // q_{m+1} - q_m = q'_{n-m} - q'_{n-m-1}, q'_j ~ P(Po(j) < j), q'_0 = 0
            let f = |j: u64| if j == 0 { 0.0 } else { t.poisson_lt.eval(j) };
            f(n - m) - f(n - m - 1)
        }
        Regime::CriticalWindow => {
            let c = &t.critical.constants;
            (c.h1_pp_23 * (mf - 2.0 * nf / 3.0 + 0.5) + c.h3_p_23) * nf.powf(-2.5)
        }
        Regime::LowerBulk | Regime::MiddleBulk | Regime::UpperBulk => {
            let p = (mf + 0.5) / nf;
            (3.0 * p - 2.0) / (6.0 * (2.0 * PI).sqrt()) * (nf * p * (1.0 - p)).powf(-1.5)
        }
    };
    Ok(Prediction { predicted, regime })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactprob::QTable;

    #[test]
    fn regimes_for_300() {
        assert_eq!(regime(300, 10), Regime::LowerPoisson);
        assert_eq!(regime(300, 100), Regime::LowerBulk);
        assert_eq!(regime(300, 170), Regime::MiddleBulk);
        assert_eq!(regime(300, 200), Regime::CriticalWindow);
        assert_eq!(regime(300, 220), Regime::UpperBulk);
        assert_eq!(regime(300, 290), Regime::UpperPoisson);
    }

    #[test]
    fn signs_for_300() {
        for m in 190..=210 {
            let p = predict_q_difference(300, m).unwrap();
            assert_eq!(p.regime, Regime::CriticalWindow);
            let want = if 2 * m + 1 < 400 { -1.0 } else { 1.0 };
            assert_eq!(p.predicted.signum(), want, "m = {m}");
        }
        assert!(predict_q_difference(300, 100).unwrap().predicted < 0.0);
        let hi = predict_q_difference(300, 290).unwrap();
        assert!(hi.predicted > 0.0);
        let table = QTable::new(300).unwrap();
        assert!(table.le[291] > table.le[290]);
        assert!(predict_q_difference(300, 300).is_err());
    }
}
