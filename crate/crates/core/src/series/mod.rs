//! Exact polynomial and power-series kernel.

pub mod fps;
pub mod poly;
pub mod special;

pub use fps::TruncatedUSeries;
pub use poly::{Coeff, Polynomial};
pub use special::{
    bernoulli_numbers, bernoulli_polynomial, frac, hermite, hermite_table, psi, psi_exact, PsiTable,
};
