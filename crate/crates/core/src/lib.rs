pub mod error;
pub mod cli;
pub mod convexity;
pub mod density;
pub mod energy;
pub mod evolve;
pub mod kernel;
pub mod potential;
pub mod quad;
pub mod specfun;
pub mod steady;
pub mod transport;

pub use error::{Error, Result};
