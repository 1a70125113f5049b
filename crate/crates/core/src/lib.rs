pub mod binomial_chvatal;
pub mod cli;
pub mod cumulants;
pub mod edgeworth;
pub mod error;
pub mod exactprob;
pub mod series;

pub use error::{Error, Result};
