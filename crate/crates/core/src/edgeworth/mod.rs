//! Lattice-corrected Edgeworth expansions.

pub mod gauss;
pub mod model;
pub mod residual;

pub use gauss::{normal_cdf, normal_pdf, phi0, GaussCombo};
pub use model::{
    edgeworth_polynomials, integer_mean_expansion, EdgeworthModel, IntegerMeanCoefficients,
    LatticePosition, PiTable, Variant, MAX_ORDER,
};
pub use residual::{
    default_grid, log_log_slope, residual_scan, uniform_grid, BinomialOracle, CdfOracle,
    ExpansionEvaluation, PoissonOracle, ResidualScan, Side,
};
