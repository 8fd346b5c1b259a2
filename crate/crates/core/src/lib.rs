pub mod angular;
pub mod cli;
pub mod decay;
pub mod error;
pub mod kernel;
pub mod propagator;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
