//! Numerical laboratory for norm inflation of the truncated Muskat problem.

pub mod besov;
pub mod error;
pub mod gamma;
pub mod harness;
pub mod iterate;
pub mod oracle;
pub mod quad;
pub mod sequences;
pub mod spline;

pub use error::{Error, Result};
pub use gamma::{GammaKernel, QuadratureSpec};
