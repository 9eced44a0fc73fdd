pub mod cli;
pub mod cohomology;
pub mod error;
pub mod flattening;
pub mod germ;
pub mod obstructions;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod series;

pub use error::{Error, Result};
