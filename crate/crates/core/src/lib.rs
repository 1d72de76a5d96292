//! Kernel adaptive filtering with the adaptive projected subgradient method
//! (APSM) for digital self-interference cancellation.
//!
//! - [`kernels`]: linear, Gaussian and hybrid sum-space kernels.
//! - [`dictionary`]: ALD-sparsified dictionary with an incrementally updated
//!   inverse Gram matrix.
//! - [`apsm`]: the complex APSM filter over a shared dictionary.
//! - [`nlms`]: NLMS baseline on the same regressor.
//! - [`signal`]: regressors, the synthetic SI channel and IQ files.
//! - [`harness`]: experiments, learning curves, CSV output and the CLI.

pub mod apsm;
pub mod dictionary;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod nlms;
pub mod signal;

pub use apsm::{ApsmConfig, ComplexApsmFilter};
pub use dictionary::{Dictionary, DictionaryConfig, FunctionEstimate};
pub use error::{Error, Result};
pub use kernels::{KernelKind, KernelSpec};
pub use nlms::NlmsFilter;
