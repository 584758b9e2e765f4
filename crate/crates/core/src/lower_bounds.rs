//! Lower bounds on the minimum energy.
//!
//! Every bound here is an instance of the multi-level converse family
//!
//! ```text
//! E_min ≥ N₁ ln[(1+τ₁)/(D(N₁)+τ₁)]
//!       + Σ_{k=2..K} N_k ln[(1+τ_k)(D(N_k)+τ_{k-1}) / ((1+τ_{k-1})(D(N_k)+τ_k))]
//! ```
//!
//! with `τ₁ ≥ … ≥ τ_K = 0` and `N₁ ≥ … ≥ N_K > 0`. For square-law profiles the
//! bound scales exactly as `√α`, so optimization runs on the α = 1 profile in
//! normalized qualities `q = √α·Q` and the constant is rescaled at the end.

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    golden_section_max, maximize_projected, sum_series, AscentConfig, Ordering, SeriesConfig, SeriesSum,
};
use crate::profiles::{BoundReport, FidelityProfile, SquareLawProfile};

/// Search interval and tolerance for the single-level supremum.
pub const POINTWISE_SEARCH: (f64, f64) = (1e-6, 1e3);
pub const POINTWISE_TOL: f64 = 1e-10;

/// Smallest normalized quality the optimizers may visit.
const MIN_QUALITY: f64 = 1e-9;

/// Free parameters of the converse family.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundParams {
    taus: Vec<f64>,
    noise_levels: Vec<f64>,
}

impl LowerBoundParams {
    /// `taus` must be nonincreasing and end in exactly 0; `noise_levels` must be
    /// positive and nonincreasing. Both have length `K ≥ 1`.
    pub fn new(taus: Vec<f64>, noise_levels: Vec<f64>) -> Result<Self> {
        if taus.is_empty() || taus.len() != noise_levels.len() {
            return Err(invalid("need K >= 1 taus and K noise levels"));
        }
        if *taus.last().unwrap() != 0.0 {
            return Err(invalid("the last tau must be exactly 0"));
        }
        if taus.iter().any(|t| !t.is_finite()) || taus.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("taus must be finite and nonincreasing, got {taus:?}")));
        }
        if noise_levels.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
            return Err(invalid("noise levels must be positive and finite"));
        }
        if noise_levels.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid(format!("noise levels must be nonincreasing, got {noise_levels:?}")));
        }
        Ok(Self { taus, noise_levels })
    }

    /// Single level with `τ₁ = 0` at noise `n`.
    pub fn single(n: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![n])
    }

    pub fn levels(&self) -> usize {
        self.taus.len()
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn noise_levels(&self) -> &[f64] {
        &self.noise_levels
    }

    /// Appends a level at noise `n < N_K` with `τ_{K+1} = 0`.
    ///
    /// The added term is `n·ln(D/D) = 0`, so the bound is unchanged; this is how
    /// a `K`-level optimum seeds a `K+1`-level search.
    pub fn with_extra_level(&self, n: f64) -> Result<Self> {
        let mut taus = self.taus.clone();
        taus.push(0.0);
        let mut noise = self.noise_levels.clone();
        noise.push(n);
        Self::new(taus, noise)
    }
}

/// `ln(1 + q²)/q`: the single-level bound for the unit square-law profile.
pub fn single_level_objective(q: f64) -> f64 {
    (q * q).ln_1p() / q
}

/// Supremum over `Q` of `ln F(Q) / Q` for an arbitrary profile, searched by
/// golden section on `[lo, hi]` (the ratio must be unimodal there).
///
/// Returns `(Q*, bound)`.
pub fn sup_pointwise<P: FidelityProfile>(profile: &P, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo > 0.0) {
        return Err(invalid("search interval must lie in Q > 0"));
    }
    let (q, v, _) = golden_section_max(|q| profile.fidelity(q).ln() / q, lo, hi, tol)?;
    Ok((q, v))
}

/// Best single-level bound `sup_Q ln F(Q)/Q` for a square-law profile.
pub fn pointwise_lower_bound(profile: &SquareLawProfile) -> Result<BoundReport> {
    let (lo, hi) = POINTWISE_SEARCH;
    let (q, constant, iterations) = golden_section_max(single_level_objective, lo, hi, POINTWISE_TOL)?;
    let params = vec![("q".to_string(), q), ("Q".to_string(), q / profile.scale())];
    Ok(BoundReport::from_constant(profile, constant, params, iterations, true))
}

fn lemma1_terms<P: FidelityProfile>(profile: &P, taus: &[f64], noise: &[f64]) -> Option<f64> {
    let mut total = 0.0;
    for k in 0..taus.len() {
        let d = profile.distortion(noise[k]);
        let ratio = if k == 0 {
            (1.0 + taus[0]) / (d + taus[0])
        } else {
            (1.0 + taus[k]) * (d + taus[k - 1]) / ((1.0 + taus[k - 1]) * (d + taus[k]))
        };
        if !(ratio > 0.0) || !ratio.is_finite() {
            return None;
        }
        total += noise[k] * ratio.ln();
    }
    Some(total)
}

/// Evaluates the converse family at the given parameters.
pub fn lemma1_bound<P: FidelityProfile>(profile: &P, params: &LowerBoundParams) -> Result<f64> {
    for &n in params.noise_levels() {
        let d = profile.distortion(n);
        if !(d > 0.0 && d <= 1.0) {
            return Err(invalid(format!("profile distortion {d} at N = {n} lies outside (0, 1]")));
        }
    }
    lemma1_terms(profile, params.taus(), params.noise_levels())
        .ok_or_else(|| invalid("a logarithm argument is nonpositive for these taus and noise levels"))
}

fn two_level_unchecked(q1: f64, q2: f64, tau: f64) -> f64 {
    let first = (q1 * q1 / (1.0 + tau * (1.0 + q1 * q1))).ln_1p() / q1;
    let second = (tau * q2 * q2 / (1.0 + tau)).ln_1p() / q2;
    first + second
}

/// Two-level bound constant (α factored out) at normalized qualities
/// `q₂ > q₁ > 0` and `τ ≥ 0`.
pub fn two_level_objective(q1: f64, q2: f64, tau: f64) -> Result<f64> {
    if !(q1 > 0.0 && q2 > q1) {
        return Err(invalid(format!("need q2 > q1 > 0, got q1 = {q1}, q2 = {q2}")));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid(format!("tau must be finite and nonnegative, got {tau}")));
    }
    Ok(two_level_unchecked(q1, q2, tau))
}

/// Maximizes the two-level constant from `initial = (q₁, q₂, τ)` by projected
/// gradient ascent under `q₂ > q₁ > 0`, `τ ≥ 0`.
pub fn optimize_two_level(
    profile: &SquareLawProfile,
    initial: (f64, f64, f64),
    config: &AscentConfig,
) -> Result<BoundReport> {
    let (q1, q2, tau) = initial;
    two_level_objective(q1, q2, tau)?;
    let result = maximize_projected(
        |x: &[f64]| two_level_unchecked(x[0], x[1], x[2]),
        &[q1, q2, tau],
        &[MIN_QUALITY, MIN_QUALITY, 0.0],
        &[Ordering::strict(0, 1)],
        config,
    )?;
    let x = &result.argmax;
    let params = vec![
        ("q1".to_string(), x[0]),
        ("q2".to_string(), x[1]),
        ("tau".to_string(), x[2]),
    ];
    Ok(BoundReport::from_constant(profile, result.value, params, result.iterations, result.converged))
}

/// `k`-th term `1/√(4ᵏ eᵏ − 1)` of the prior-work lower-bound series.
pub fn theorem1_term(k: u64) -> f64 {
    // 4ᵏeᵏ = exp(k(1 + ln 4))
    let growth = (k as f64 * (1.0 + 4f64.ln())).exp_m1();
    1.0 / growth.sqrt()
}

/// `Σ_{k≥1} 1/√(4ᵏ eᵏ − 1)`, summed to relative tolerance `tol`.
pub fn theorem1_series(tol: f64) -> Result<SeriesSum> {
    sum_series(theorem1_term, 1, &SeriesConfig { relative_tol: tol, hard_cap: 10_000 })
}

/// The prior-work lower-bound constant (≈ 0.4507).
pub fn theorem1_constant(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    Ok(theorem1_series(tol)?.value)
}

/// Maximizes the `K`-level converse bound over all noise levels and the free
/// `τ₁ … τ_{K−1}`, starting from `initial` (expressed for `profile`).
pub fn optimize_k_level(
    profile: &SquareLawProfile,
    initial: &LowerBoundParams,
    config: &AscentConfig,
) -> Result<BoundReport> {
    let levels = initial.levels();
    let scale = profile.scale();
    // normalized qualities q_k = √α / N_k, increasing in k
    let mut x: Vec<f64> = initial.noise_levels().iter().map(|n| scale / n).collect();
    x.extend_from_slice(&initial.taus()[..levels - 1]);

    let mut lower = vec![MIN_QUALITY; levels];
    lower.extend(std::iter::repeat_n(0.0, levels - 1));
    let mut orderings: Vec<Ordering> = (0..levels - 1).map(|i| Ordering::strict(i, i + 1)).collect();
    // τ_{i+1} ≤ τ_i among the free taus
    orderings.extend((1..levels.saturating_sub(1)).map(|i| Ordering::weak(levels + i, levels + i - 1)));

    let unit = SquareLawProfile::unit();
    let objective = |v: &[f64]| {
        let noise: Vec<f64> = v[..levels].iter().map(|q| 1.0 / q).collect();
        let mut taus = v[levels..].to_vec();
        taus.push(0.0);
        lemma1_terms(&unit, &taus, &noise).unwrap_or(f64::NAN)
    };
    let result = maximize_projected(objective, &x, &lower, &orderings, config).map_err(|e| match e {
        Error::Infeasible(m) => Error::Infeasible(format!("initial lower-bound parameters: {m}")),
        other => other,
    })?;

    let v = &result.argmax;
    let mut params = Vec::with_capacity(2 * levels);
    for k in 0..levels {
        params.push((format!("q{}", k + 1), v[k]));
    }
    for k in 0..levels - 1 {
        params.push((format!("tau{}", k + 1), v[levels + k]));
    }
    Ok(BoundReport::from_constant(profile, result.value, params, result.iterations, result.converged))
}

/// Start of the two-level search: `(q₁, q₂, τ) = (2.01, 3, 0)`.
pub const TWO_LEVEL_START: (f64, f64, f64) = (2.01, 3.0, 0.0);

/// Best `levels`-level bound, found stagewise: the two-level search starts at
/// [`TWO_LEVEL_START`], and each further level is appended at half the last
/// noise level to the previous optimum before re-optimizing all parameters.
/// A stage that hits the iteration cap is restarted from where it stopped.
pub fn optimize_levels(profile: &SquareLawProfile, levels: usize, config: &AscentConfig) -> Result<BoundReport> {
    if levels == 0 {
        return Err(invalid("need at least one level"));
    }
    let scale = profile.scale();
    let (q1, q2, tau) = TWO_LEVEL_START;
    let mut params = if levels == 1 {
        LowerBoundParams::single(scale / q1)?
    } else {
        LowerBoundParams::new(vec![tau, 0.0], vec![scale / q1, scale / q2])?
    };
    let (mut report, mut iterations) = optimize_with_restarts(profile, &params, config)?;
    while params.levels() < levels {
        params = params_from_report(profile, &report)?;
        let last = *params.noise_levels().last().expect("nonempty");
        params = params.with_extra_level(last / 2.0)?;
        let (next, used) = optimize_with_restarts(profile, &params, config)?;
        report = next;
        iterations += used;
    }
    report.iterations = iterations;
    Ok(report)
}

/// Restarts of the ascent from its own endpoint after hitting the iteration cap.
const MAX_RESTARTS: usize = 3;

fn optimize_with_restarts(
    profile: &SquareLawProfile,
    params: &LowerBoundParams,
    config: &AscentConfig,
) -> Result<(BoundReport, usize)> {
    let mut report = optimize_k_level(profile, params, config)?;
    let mut iterations = report.iterations;
    for _ in 0..MAX_RESTARTS {
        if report.converged {
            break;
        }
        // a fresh start resets the Barzilai-Borwein step, which helps on the flat ridges of K ≥ 3
        report = optimize_k_level(profile, &params_from_report(profile, &report)?, config)?;
        iterations += report.iterations;
    }
    Ok((report, iterations))
}

/// Reads the argmax of a `K`-level report back into parameters for `profile`.
pub fn params_from_report(profile: &SquareLawProfile, report: &BoundReport) -> Result<LowerBoundParams> {
    let mut qs = Vec::new();
    while let Some(q) = report.param(&format!("q{}", qs.len() + 1)) {
        qs.push(q);
    }
    if qs.is_empty() {
        return Err(invalid("report carries no q1, q2, … parameters"));
    }
    let mut taus: Vec<f64> = (1..qs.len())
        .map(|k| report.param(&format!("tau{k}")).or_else(|| (k == 1).then(|| report.param("tau")).flatten()))
        .collect::<Option<_>>()
        .ok_or_else(|| invalid("report is missing tau parameters"))?;
    taus.push(0.0);
    let noise = qs.iter().map(|q| profile.scale() / q).collect();
    LowerBoundParams::new(taus, noise)
}
