//! Tapered spectral estimation with variance approximations.
//!
//! The crate is organized around four pieces:
//!
//! * [`taper`]: data tapers, the inflation factor `C_h` and the normalized
//!   transform of the squared taper `H₂`.
//! * [`process`]: stationary Gaussian white-noise and AR(p) models with
//!   spectral densities, autocovariances and exact simulation.
//! * [`estimator`]: the tapered periodogram and discrete frequency smoothing.
//! * [`variance`]: the classical and the refined relative-variance
//!   approximations together with the exact Gaussian relative variance.

pub mod error;
pub mod estimator;
pub mod experiment;
pub mod process;
pub mod taper;
pub mod variance;

pub use error::{Error, Result};
pub use estimator::{EdgePolicy, MeanMode, SmoothingScheme};
pub use num_complex::Complex64;
pub use process::{ProcessModel, Simulator, TimeSeries};
pub use taper::{Taper, TaperKind};
pub use variance::{CovarianceCache, CovarianceMethod, ExactOracle, VarianceRecord, VarianceTable};

/// Complex values returned by the `H₂` routines.
pub type ComplexValue = Complex64;
