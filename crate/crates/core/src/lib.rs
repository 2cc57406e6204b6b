pub mod cli;
pub mod constants;
pub mod diagnostics;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod operator;
pub mod radial;
pub mod solver;

pub use error::{Error, Result};
