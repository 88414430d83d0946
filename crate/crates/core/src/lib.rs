pub mod dataset;
pub mod error;
pub mod fiber;
pub mod field;
pub mod fitting;
pub mod incident;
pub mod polarization;
pub mod scattering;
pub mod specfun;

pub use error::{Error, Result};
pub use field::ComplexField3;
