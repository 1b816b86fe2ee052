//! Finite-truncation numerics for Schwartz-space fiber bundles.
//!
//! Functions on ℝⁿ are stored as truncated expansions in the Hermite
//! (oscillator eigen-) basis. On top of that representation the crate
//! provides the position expectation map and its differential, exact
//! seminorms, translations realized as displacement-operator exponentials,
//! the trivialization `f ↦ (Q̄(f), T_{−Q̄(f)} f)` with its inverse and
//! differentials, trivial quantizations of classical atlases, and a
//! verification layer that records every checked identity.

pub mod atlas;
pub mod bundle;
pub mod config;
pub mod error;
pub mod expectation;
pub mod hermite;
pub mod quadrature;
pub mod random;
pub mod report;
pub mod suites;
pub mod tangent;
pub mod translation;

mod tensor;

pub use config::{ModelSpace, Tolerances};
pub use error::{Error, Result};
pub use hermite::{GridSpec, MultiIndex, SchwartzFn};
pub use num_complex::Complex64;
