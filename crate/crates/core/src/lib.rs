pub mod cli;
pub mod dilation;
pub mod error;
pub mod format;
pub mod interferometer;
pub mod linalg;
pub mod povm;
pub mod simulator;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
