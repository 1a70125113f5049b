//! The binomial case: closed-form coefficients, the difference predictor,
//! and exact verification of where `P(Bi(n, m/n) <= m)` is smallest.

pub mod closed;
pub mod predict;
pub mod verify;

pub use closed::{
    critical_constants, h1_closed, h1_prime, h1_prime_numeric, h3_closed, CoefficientSet,
    CriticalConstants, CriticalExpansion,
};
pub use predict::{predict_q_difference, regime, Prediction, Regime, CRITICAL_HALF_WIDTH};
pub use verify::{
    lower_half_decreasing, scan_fixed_n, target_m, uniform_p_grid, verify_chvatal, ChvatalReport,
    ChvatalSummary, RowKind, ScanRow,
};
