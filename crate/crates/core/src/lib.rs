//! Numerical laboratory for the helix-averaging operator
//! `Tf(x) = ∫ f(x − γ(t)) φ(t) dt`, its cone decomposition into pieces
//! `S_λ^{jm}`, and the scaling experiments run on those pieces.

pub mod curves;
pub mod decomposition;
pub mod error;
pub mod estimator;
pub mod fit;
pub mod grid;
pub mod kernel;
pub mod multiplier;
pub mod nufft;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version string embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
