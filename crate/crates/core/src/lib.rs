//! Asymptotic expansions for Poisson problems in planar domains with small
//! inclusions of arbitrary smooth shape.

pub mod cli;
pub mod conformal;
pub mod error;
pub mod expansion;
pub mod harmonic_ext;
pub mod harmonic_int;
pub mod profiles;
mod linalg;
pub mod reference;
mod spectral;

#[cfg(test)]
mod oracle;

pub use error::{Error, Result};
