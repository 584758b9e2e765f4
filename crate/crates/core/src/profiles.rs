//! Distortion-noise and fidelity-quality profiles.
//!
//! A profile can be read either as the largest admissible distortion `D(N)` at
//! noise variance `N`, or as the smallest admissible fidelity `F(Q) = 1/D(1/Q)`
//! at channel quality `Q = 1/N`. The square-law family `F(Q) = 1 + αQ²` is the
//! one every bound in this crate is tuned for.

use serde::Serialize;

use crate::error::{invalid, Result};

/// Anything that maps a channel quality to a required fidelity.
///
/// Implementors must return a fidelity of at least 1 (the source has unit
/// variance) and must be nondecreasing in `quality`.
pub trait FidelityProfile {
    fn fidelity(&self, quality: f64) -> f64;

    /// Allowed distortion at noise variance `noise`.
    fn distortion(&self, noise: f64) -> f64 {
        1.0 / self.fidelity(1.0 / noise)
    }
}

/// `F(Q) = 1 + αQ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareLawProfile {
    alpha: f64,
}

impl SquareLawProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(invalid(format!("alpha must be positive and finite, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The profile with α = 1, in which every square-law bound constant lives.
    pub fn unit() -> Self {
        Self { alpha: 1.0 }
    }

    /// `√α`, the factor relating a normalized constant to an energy.
    pub fn scale(&self) -> f64 {
        self.alpha.sqrt()
    }

    /// Required fidelity `1 + αQ²` at quality `q ≥ 0`.
    pub fn fidelity_of(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) {
            return Err(invalid(format!("quality must be nonnegative, got {q}")));
        }
        Ok(self.fidelity(q))
    }

    /// Allowed distortion `1 / (1 + α/N²)` at noise variance `n > 0`.
    pub fn distortion_of(&self, n: f64) -> Result<f64> {
        if !(n > 0.0) {
            return Err(invalid(format!("noise variance must be positive, got {n}")));
        }
        Ok(self.distortion(n))
    }
}

impl FidelityProfile for SquareLawProfile {
    fn fidelity(&self, quality: f64) -> f64 {
        1.0 + self.alpha * quality * quality
    }
}

/// A bound on the minimum energy together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Energy per source symbol.
    pub value: f64,
    /// `value / √α`.
    pub normalized_constant: f64,
    /// Named parameters at which the bound is attained (e.g. the optimizer's argmax).
    pub params: Vec<(String, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

impl BoundReport {
    /// Builds a report from a normalized constant, scaling by `√α` once.
    pub fn from_constant(
        profile: &SquareLawProfile,
        normalized_constant: f64,
        params: Vec<(String, f64)>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        Self {
            value: normalized_constant * profile.scale(),
            normalized_constant,
            params,
            iterations,
            converged,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}
