pub mod cli;
pub mod config;
pub mod error;
pub mod estimates;
pub mod io;
pub mod linalg;
pub mod logq;
pub mod mlde;
pub mod poincare;
pub mod rep;
pub mod sl2z;
pub mod summation;

pub use error::{Error, Result};
