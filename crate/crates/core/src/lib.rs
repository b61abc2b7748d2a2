pub mod bezout;
pub mod cli;
pub mod error;
pub mod factorize;
pub mod poly;
pub mod spectral;
pub mod thiran;

pub use error::{Error, Result};
