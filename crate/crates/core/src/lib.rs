//! Bounds on the minimum transmission energy needed to meet a distortion-noise
//! profile when a unit-variance Gaussian source is sent over an AWGN channel of
//! unknown noise level.
//!
//! The crate covers three things:
//!
//! * lower bounds from the single- and multi-level converse family
//!   ([`lower_bounds`]),
//! * upper bounds from a layered uncoded-plus-Wyner-Ziv scheme
//!   ([`layered_scheme`]),
//! * brute-force and Monte Carlo checks of the scheme's linear-algebraic core
//!   ([`mmse_validation`]).
//!
//! All logarithms are natural, so energies are in noise-variance · nats per
//! source symbol.

pub mod cli;
pub mod error;
pub mod layered_scheme;
pub mod lower_bounds;
pub mod mmse_validation;
pub mod numerics;
pub mod profiles;

pub use error::{Error, Result};
pub use profiles::{BoundReport, FidelityProfile, SquareLawProfile};
