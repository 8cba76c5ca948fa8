pub mod cli;
pub mod error;
pub mod exterior;
pub mod hermite;
pub mod linalg;
pub mod nilpotent;
pub mod orbit;
pub mod realframe;
pub mod report;
pub mod rootsys;
pub mod scalar;
pub mod spectral;
pub mod symbol;
pub mod weyl;

pub use error::{Error, Result};
