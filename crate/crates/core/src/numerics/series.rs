//! Tolerance-controlled summation of infinite series.
//!
//! Two stopping rules are offered. [`sum_series`] estimates the remaining tail
//! from the ratio of consecutive terms, which is sound for series whose terms
//! are eventually positive with nonincreasing ratios (geometric-like decay).
//! [`sum_series_with_tail`] lets the caller supply a tail model: an estimate
//! that is added to the partial sum together with a bound on its error. The
//! summation stops once that bound drops below `relative_tol · |sum|`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesConfig {
    pub relative_tol: f64,
    /// Maximum number of terms evaluated before giving up.
    pub hard_cap: u64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { relative_tol: 1e-9, hard_cap: 1_000_000 }
    }
}

impl SeriesConfig {
    fn validate(&self) -> Result<()> {
        if !(self.relative_tol > 0.0) || self.hard_cap == 0 {
            return Err(invalid("series tolerance must be positive and the cap nonzero"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    /// Partial sum plus any tail estimate.
    pub value: f64,
    pub terms_used: u64,
    /// Bound on `|true sum - value|` at the time of stopping.
    pub tail_bound: f64,
}

/// Tail model at a checkpoint: `estimate` of `Σ_{k ≥ next} term(k)` and a bound
/// on the error of that estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub estimate: f64,
    pub error: f64,
}

impl TailEstimate {
    /// A pure bound: the tail is dropped and contributes `bound` to the error.
    pub fn bound(bound: f64) -> Self {
        Self { estimate: 0.0, error: bound }
    }
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums `term(first) + term(first + 1) + …` with a ratio-test tail estimate.
///
/// `term` is called with consecutive indices, so stateful closures are fine.
/// After each term `t_k` with ratio `r = t_k / t_{k-1} ∈ [0, 1)` the tail is
/// taken as `t_k · r / (1 - r)`.
pub fn sum_series<F>(mut term: F, first: u64, config: &SeriesConfig) -> Result<SeriesSum>
where
    F: FnMut(u64) -> f64,
{
    config.validate()?;
    let mut acc = Neumaier::default();
    let mut prev: Option<f64> = None;
    for n in 0..config.hard_cap {
        let k = first + n;
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::NonFinite(format!("series term {k} is {t}")));
        }
        acc.add(t);
        let sum = acc.value();
        if t == 0.0 && prev == Some(0.0) {
            // two consecutive zero terms: treated as a terminated series
            return Ok(SeriesSum { value: sum, terms_used: n + 1, tail_bound: 0.0 });
        }
        if let Some(p) = prev {
            if p > 0.0 && t >= 0.0 {
                let r = t / p;
                if r < 1.0 {
                    let tail = t * r / (1.0 - r);
                    if tail <= config.relative_tol * sum.abs() {
                        return Ok(SeriesSum { value: sum, terms_used: n + 1, tail_bound: tail });
                    }
                }
            }
        }
        prev = Some(t);
    }
    Err(Error::NonConvergence(format!(
        "series did not reach relative tolerance {:e} within {} terms",
        config.relative_tol, config.hard_cap
    )))
}

/// Sums with a caller-supplied tail model.
///
/// `tail(next, partial)` is consulted at checkpoints: after each of the first
/// 32 terms, then roughly eight times per doubling of the term count. It must
/// describe `Σ_{k ≥ next} term(k)`.
pub fn sum_series_with_tail<F, T>(
    mut term: F,
    first: u64,
    config: &SeriesConfig,
    mut tail: T,
) -> Result<SeriesSum>
where
    F: FnMut(u64) -> f64,
    T: FnMut(u64, f64) -> TailEstimate,
{
    config.validate()?;
    let mut acc = Neumaier::default();
    let mut next_check = 1u64;
    for n in 0..config.hard_cap {
        let k = first + n;
        let t = term(k);
        if !t.is_finite() {
            return Err(Error::NonFinite(format!("series term {k} is {t}")));
        }
        acc.add(t);
        let used = n + 1;
        if used == next_check {
            let partial = acc.value();
            let est = tail(k + 1, partial);
            if est.estimate.is_finite() && est.error.is_finite() {
                let value = partial + est.estimate;
                if est.error <= config.relative_tol * value.abs() {
                    return Ok(SeriesSum { value, terms_used: used, tail_bound: est.error });
                }
            }
            next_check = if used < 32 { used + 1 } else { used + checkpoint_stride(used) };
        }
    }
    Err(Error::NonConvergence(format!(
        "series tail bound did not reach relative tolerance {:e} within {} terms",
        config.relative_tol, config.hard_cap
    )))
}

fn checkpoint_stride(used: u64) -> u64 {
    let pow = 1u64 << (63 - used.leading_zeros());
    (pow / 8).max(1)
}
