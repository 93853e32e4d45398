//! Weighted Bergman and Besov norms on the polydisk and the unit ball, with
//! dilation-based polynomial density experiments.
//!
//! The crate is organised around power series with explicit coefficients
//! ([`series`]), admissible weights ([`weights`]), deterministic quadrature
//! ([`integrate`]), norm evaluation ([`spaces`]) and grid certification of
//! the dilation condition ([`verify`]). The `bergman` binary drives all of
//! it from a JSON config.

pub mod cli;
pub mod error;
pub mod integrate;
pub mod series;
pub mod spaces;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use series::{MultiIndex, PowerSeries};
pub use spaces::{compute_norm, NormKind, NormResult, NormSpec};
pub use weights::{parse_weight, Weight, WeightKind};
