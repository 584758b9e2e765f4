//! The layered uncoded-plus-digital scheme and its energy accounting.
//!
//! The source is successively refined into layers `S₀ = X, S₁, S₂, …` with
//! inverse variances `β₀ = 1 < β₁ < …`. Each residual `S_k` is sent uncoded
//! with energy scale `A_k` (actual energy `A_k/β_k`), and the refinement index
//! of layer `k` is sent digitally so that it decodes whenever `Q ≥ Q_k`. Between
//! jump points the receiver's fidelity is the linear piece
//! `β_k + Q·A_{k+1,total}`, and the ladder is tuned so that this piece meets
//! the profile `1 + αQ²` exactly at each `Q_k`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::{
    dilogarithm, golden_section_max, integrate, maximize_nelder_mead, sum_series_with_tail, NelderMeadConfig,
    SeriesConfig, TailEstimate,
};
use crate::profiles::{BoundReport, SquareLawProfile};

/// Relative tolerance for checking `A₀ = αQ₁` in [`check_feasibility`].
const FIRST_LAYER_TOL: f64 = 1e-12;

/// A finite ladder: jump points `Q₁ < … < Q_K`, analog energies
/// `A₀ … A_{K−1}` and the induced `β₀ … β_{K−1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderSchedule {
    alpha: f64,
    q_points: Vec<f64>,
    energies: Vec<f64>,
    /// `totals[k-1] = A_{k,total} = A₀ + … + A_{k−1}`
    totals: Vec<f64>,
    betas: Vec<f64>,
}

impl LadderSchedule {
    /// Builds a ladder whose `β`s follow from the jump condition
    /// `A_{k,total}·Q_k + β_{k−1} = 1 + αQ_k²`.
    ///
    /// Only structure is validated here; whether the `β`s increase is reported
    /// by [`check_feasibility`].
    pub fn from_energies(alpha: f64, q_points: Vec<f64>, energies: Vec<f64>) -> Result<Self> {
        validate_structure(alpha, &q_points, &energies)?;
        let totals = prefix_sums(&energies);
        let betas = q_points
            .iter()
            .zip(&totals)
            .map(|(&q, &total)| 1.0 + alpha * q * q - total * q)
            .collect();
        Ok(Self { alpha, q_points, energies, totals, betas })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of jump points `K`.
    pub fn layers(&self) -> usize {
        self.q_points.len()
    }

    /// All jump points `Q₁ … Q_K`.
    pub fn q_points(&self) -> &[f64] {
        &self.q_points
    }

    /// `Q_k` for `1 ≤ k ≤ K`.
    pub fn q(&self, k: usize) -> f64 {
        self.q_points[k - 1]
    }

    /// `A₀ … A_{K−1}`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `A_{k,total}` for `1 ≤ k ≤ K`.
    pub fn total(&self, k: usize) -> f64 {
        self.totals[k - 1]
    }

    /// `β₀ … β_{K−1}`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// `A_{k,total}·Q_k + β_{k−1} − (1 + αQ_k²)`.
    pub fn jump_residual(&self, k: usize) -> f64 {
        let q = self.q(k);
        self.total(k) * q + self.betas[k - 1] - (1.0 + self.alpha * q * q)
    }

    /// Left limit of the staircase at `Q_k`, i.e. `β_{k−1} + Q_k·A_{k,total}`.
    pub fn left_limit(&self, k: usize) -> f64 {
        self.betas[k - 1] + self.q(k) * self.total(k)
    }
}

fn validate_structure(alpha: f64, q_points: &[f64], energies: &[f64]) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if q_points.is_empty() || q_points.len() != energies.len() {
        return Err(invalid("a ladder needs K >= 1 jump points and K energies A_0..A_{K-1}"));
    }
    if q_points.iter().any(|q| !(q.is_finite() && *q > 0.0)) || q_points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("jump points must be positive and strictly increasing"));
    }
    if energies.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("analog energies must be finite and nonnegative"));
    }
    Ok(())
}

fn prefix_sums(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Parameters of the geometric ladder family `Q_k = kΔ`, `A₀ = αΔ`,
/// `A_k = dᵏαΔ`, with `Δ = c/√α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricParams {
    pub alpha: f64,
    pub c: f64,
    pub d: f64,
    pub delta: f64,
    /// Truncation depth used when a finite schedule is materialized.
    pub layers: usize,
}

impl GeometricParams {
    /// `d = 0` is accepted: it is the single-uncoded-layer special case.
    pub fn new(alpha: f64, c: f64, d: f64, layers: usize) -> Result<Self> {
        SquareLawProfile::new(alpha)?;
        if !(c.is_finite() && c > 0.0) {
            return Err(invalid(format!("c must be positive, got {c}")));
        }
        if !(0.0..1.0).contains(&d) {
            return Err(invalid(format!("d must lie in [0, 1), got {d}")));
        }
        if layers == 0 {
            return Err(invalid("the ladder needs at least one layer"));
        }
        Ok(Self { alpha, c, d, delta: c / alpha.sqrt(), layers })
    }
}

/// `dᵏ` for real `k ≥ 0`, with `0⁰ = 1`.
fn power(d: f64, k: f64) -> f64 {
    if d == 0.0 {
        if k == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        d.powf(k)
    }
}

/// `(1 − dʲ)/(1 − d) = Σ_{i<j} dⁱ`, extended to real `j`.
pub fn geometric_sum(d: f64, j: f64) -> f64 {
    if j == 0.0 {
        return 0.0;
    }
    if d == 0.0 {
        return 1.0;
    }
    -(j * d.ln()).exp_m1() / (1.0 - d)
}

/// `j − (1 − dʲ)/(1 − d) = Σ_{i<j} (1 − dⁱ)`, extended to real `j`.
///
/// Direct subtraction cancels badly for `d` near 1 and moderate `j`; there a
/// power series in `u = −ln d` is used instead.
pub fn geometric_deficit(d: f64, j: f64) -> f64 {
    if j <= 1.0 {
        return 0.0;
    }
    if d == 0.0 {
        return j - 1.0;
    }
    let u = -d.ln();
    if j * u > 0.5 {
        return j - geometric_sum(d, j);
    }
    // j(1−e^{−u}) − (1−e^{−ju}) = Σ_{n≥2} (−1)ⁿ (jⁿ − j) uⁿ / n!
    let mut sum = 0.0;
    let mut ju_pow = j * u; // (ju)^n
    let mut u_pow = u; // u^n
    let mut fact = 1.0;
    for n in 2..40 {
        ju_pow *= j * u;
        u_pow *= u;
        fact *= n as f64;
        let term = (ju_pow - j * u_pow) / fact;
        sum += if n % 2 == 0 { term } else { -term };
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum / (1.0 - d)
}

/// Materializes the first `params.layers` jump points of a geometric ladder,
/// with `β_{k−1} = 1 + αk²Δ² − kαΔ²(1−dᵏ)/(1−d)` in closed form.
pub fn geometric_schedule(params: &GeometricParams) -> Result<LadderSchedule> {
    let GeometricParams { alpha, d, delta, layers, .. } = *params;
    let step = alpha * delta; // αΔ
    let q_points: Vec<f64> = (1..=layers).map(|k| k as f64 * delta).collect();
    let energies: Vec<f64> = (0..layers).map(|k| power(d, k as f64) * step).collect();
    let totals: Vec<f64> = (1..=layers).map(|k| step * geometric_sum(d, k as f64)).collect();
    // β_{k−1} = 1 + αΔ²·k·(k − g_k) = 1 + αΔ²·k·deficit_k
    let betas: Vec<f64> =
        (1..=layers).map(|k| 1.0 + step * delta * k as f64 * geometric_deficit(d, k as f64)).collect();
    validate_structure(alpha, &q_points, &energies)?;
    Ok(LadderSchedule { alpha, q_points, energies, totals, betas })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    /// `A₀ ≠ αQ₁`, so `β₀ ≠ 1`.
    FirstLayerEnergy,
    /// `A_k` too large for `β_k > β_{k−1}`.
    EnergyTooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
    /// Negative or zero; how far the constraint is from holding.
    pub slack: f64,
}

/// Checks `A₀ = αQ₁` and
/// `A_k < [α(Q²_{k+1} − Q²_k) − A_{k,total}(Q_{k+1} − Q_k)] / Q_{k+1}` for every
/// `1 ≤ k ≤ K−1`. An empty list means the ladder is feasible.
pub fn check_feasibility(schedule: &LadderSchedule) -> Vec<Violation> {
    let alpha = schedule.alpha;
    let mut out = Vec::new();
    let want = alpha * schedule.q(1);
    let gap = (schedule.energies[0] - want).abs();
    if gap > FIRST_LAYER_TOL * want.max(1.0) {
        out.push(Violation { index: 0, kind: ViolationKind::FirstLayerEnergy, slack: -gap });
    }
    for k in 1..schedule.layers() {
        let (q, q_next) = (schedule.q(k), schedule.q(k + 1));
        let width = q_next - q;
        let bound = (alpha * width * (q_next + q) - schedule.total(k) * width) / q_next;
        let slack = bound - schedule.energies[k];
        if !(slack > 0.0) {
            out.push(Violation { index: k, kind: ViolationKind::EnergyTooLarge, slack });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Check {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Evaluates `dᵏ < [(2k+1) − (dᵏ−1)/(d−1)] / (k+1)`, the per-layer feasibility
/// condition of the geometric ladder after dividing out `αΔ`.
pub fn lemma2_inequality(d: f64, k: u64) -> Result<Lemma2Check> {
    if !(d > 0.0 && d < 1.0) {
        return Err(invalid(format!("d must lie in (0, 1), got {d}")));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let kf = k as f64;
    let lhs = power(d, kf);
    let rhs = ((2.0 * kf + 1.0) - geometric_sum(d, kf)) / (kf + 1.0);
    Ok(Lemma2Check { holds: lhs < rhs, lhs, rhs })
}

/// The scheme's fidelity `β_k + Q·A_{k+1,total}` on `Q_k ≤ Q < Q_{k+1}`
/// (`Q₀ = 0`). Defined only below the last jump point.
pub fn staircase_fidelity(schedule: &LadderSchedule, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(invalid(format!("quality must be nonnegative, got {q}")));
    }
    let last = *schedule.q_points.last().expect("nonempty ladder");
    if q >= last {
        return Err(Error::OutOfLadder { quality: q, last_jump: last });
    }
    let k = schedule.q_points.partition_point(|&jump| jump <= q);
    Ok(schedule.betas[k] + q * schedule.totals[k])
}

fn check_layer(schedule: &LadderSchedule, k: usize) -> Result<()> {
    if k == 0 || k >= schedule.layers() {
        return Err(invalid(format!(
            "layer {k} has no refinement data; valid layers are 1..={}",
            schedule.layers() - 1
        )));
    }
    Ok(())
}

/// Binning rate `½ ln[(β_k + Q_k A_{k,total}) / (β_{k−1} + Q_k A_{k,total})]` in nats.
///
/// Layer `k` needs `β_k`, so `1 ≤ k ≤ K−1`.
pub fn digital_rate(schedule: &LadderSchedule, k: usize) -> Result<f64> {
    check_layer(schedule, k)?;
    let base = schedule.betas[k - 1] + schedule.q(k) * schedule.total(k);
    Ok(0.5 * ((schedule.betas[k] - schedule.betas[k - 1]) / base).ln_1p())
}

/// Digital energy `B_k = (1/Q_k) ln(1 + (β_k − β_{k−1})/(1 + αQ_k²))`, the least
/// energy whose infinite-bandwidth capacity `B_k Q_k / 2` carries the layer's rate.
pub fn digital_energy(schedule: &LadderSchedule, k: usize) -> Result<f64> {
    check_layer(schedule, k)?;
    let q = schedule.q(k);
    let profile = 1.0 + schedule.alpha * q * q;
    Ok(((schedule.betas[k] - schedule.betas[k - 1]) / profile).ln_1p() / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown {
    pub e_unc: f64,
    pub e_dig: f64,
    pub e_total: f64,
    pub unc_terms: u64,
    pub dig_terms: u64,
    /// Bound on the combined truncation error of both series.
    pub tail_bound: f64,
}

/// Normalized (α = 1, Δ = c) ladder quantities. The energy of a geometric
/// ladder is `√α` times the energy computed here.
#[derive(Debug, Clone, Copy)]
struct UnitLadder {
    c: f64,
    d: f64,
}

impl UnitLadder {
    /// `β_k = 1 + c²(k+1)·deficit_{k+1}`, for real `k ≥ 0`.
    fn beta(&self, k: f64) -> f64 {
        1.0 + self.c * self.c * (k + 1.0) * geometric_deficit(self.d, k + 1.0)
    }

    /// `A_k / β_k` with `A_k = c dᵏ`.
    fn uncoded(&self, k: f64) -> f64 {
        self.c * power(self.d, k) / self.beta(k)
    }

    /// `B_k` for real `k ≥ 1`.
    fn digital(&self, k: f64) -> f64 {
        // β_k − β_{k−1} = c²(2k + 1 − k dᵏ − g_{k+1}) = c²(deficit_{k+1} + k(1 − dᵏ))
        let one_minus = if self.d == 0.0 { 1.0 } else { -(k * self.d.ln()).exp_m1() };
        let step = geometric_deficit(self.d, k + 1.0) + k * one_minus;
        let c2 = self.c * self.c;
        (c2 * step / (1.0 + k * k * c2)).ln_1p() / (k * self.c)
    }

    /// Euler-Maclaurin estimate of `Σ_{k ≥ m} B_k` with an error bound.
    ///
    /// Uses `∫_m^∞ B + B(m)/2 − B'(m)/12`; the remainder is bounded by
    /// `|B'(m)|/12` provided `B''` keeps one sign on `[m, ∞)`, which is checked
    /// on a geometric grid. Returns `None` when the check fails.
    fn digital_tail(&self, m: f64, abs_tol: f64) -> Option<TailEstimate> {
        let f = |x: f64| self.digital(x);
        let deriv = |x: f64| {
            let h = 1e-4 * x;
            (f(x + h) - f(x - h)) / (2.0 * h)
        };
        let second = |x: f64| {
            let h = 1e-2 * x;
            f(x + h) - 2.0 * f(x) + f(x - h)
        };
        let s0 = second(m);
        for i in 1..=96 {
            let x = m * 2f64.powf(i as f64 / 4.0);
            let s = second(x);
            if s != 0.0 && s0 != 0.0 && s.signum() != s0.signum() {
                return None;
            }
        }
        // x = m/u maps [m, ∞) onto (0, 1]
        let integral = integrate(
            |u| if u == 0.0 { 0.0 } else { f(m / u) * m / (u * u) },
            0.0,
            1.0,
            abs_tol,
        )
        .ok()?;
        let slope = deriv(m);
        Some(TailEstimate { estimate: integral + 0.5 * f(m) - slope / 12.0, error: slope.abs() / 12.0 + abs_tol })
    }

    fn energies(&self, config: &SeriesConfig) -> Result<(crate::numerics::SeriesSum, crate::numerics::SeriesSum)> {
        let d = self.d;
        let unc = sum_series_with_tail(
            |k| self.uncoded(k as f64),
            0,
            config,
            |next, _| {
                // Σ_{k≥m} c dᵏ/β_k ≤ c dᵐ / ((1−d) β_m) since β increases
                let m = next as f64;
                TailEstimate::bound(self.c * power(d, m) / ((1.0 - d) * self.beta(m)))
            },
        )?;
        let dig = sum_series_with_tail(
            |k| self.digital(k as f64),
            1,
            config,
            |next, partial| {
                let tol = (1e-3 * config.relative_tol * partial.abs()).max(1e-300);
                self.digital_tail(next as f64, tol).unwrap_or(TailEstimate::bound(f64::INFINITY))
            },
        )?;
        Ok((unc, dig))
    }
}

/// Total energy `E_unc + E_dig` of the infinite geometric ladder, each series
/// summed until its truncation error is below `relative_tol` of its value.
pub fn total_energy(params: &GeometricParams, relative_tol: f64) -> Result<EnergyBreakdown> {
    total_energy_with(params, &SeriesConfig { relative_tol, ..SeriesConfig::default() })
}

pub fn total_energy_with(params: &GeometricParams, config: &SeriesConfig) -> Result<EnergyBreakdown> {
    let (unc, dig) = UnitLadder { c: params.c, d: params.d }.energies(config)?;
    let scale = params.alpha.sqrt();
    let (e_unc, e_dig) = (scale * unc.value, scale * dig.value);
    Ok(EnergyBreakdown {
        e_unc,
        e_dig,
        e_total: e_unc + e_dig,
        unc_terms: unc.terms_used,
        dig_terms: dig.terms_used,
        tail_bound: scale * (unc.tail_bound + dig.tail_bound),
    })
}

/// `E_total / √α` for the geometric ladder with parameters `(c, d)`.
pub fn normalized_total_energy(c: f64, d: f64, config: &SeriesConfig) -> Result<f64> {
    let params = GeometricParams::new(1.0, c, d, 1)?;
    Ok(total_energy_with(&params, config)?.e_total)
}

/// Search settings for [`optimize_upper_bound`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpperSearchConfig {
    /// Log-spaced grid over `c`.
    pub c_range: (f64, f64),
    pub c_points: usize,
    /// Grid over `d`, log-spaced in `1 − d`.
    pub d_range: (f64, f64),
    pub d_points: usize,
    /// Series tolerance during the coarse grid.
    pub grid_tol: f64,
    /// Series tolerance during refinement and for the reported value.
    pub refine_tol: f64,
    /// Stop refining once the simplex's objective spread is below this.
    pub constant_tol: f64,
    pub max_refine_iter: usize,
    pub hard_cap: u64,
}

impl Default for UpperSearchConfig {
    fn default() -> Self {
        Self {
            c_range: (1e-5, 1.0),
            c_points: 51,
            d_range: (0.5, 0.99999),
            d_points: 51,
            grid_tol: 1e-7,
            refine_tol: 1e-9,
            constant_tol: 1e-6,
            max_refine_iter: 400,
            hard_cap: 1_000_000,
        }
    }
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Minimizes `E_total/√α` over `c > 0`, `d ∈ (0, 1)`: coarse grid, then
/// Nelder-Mead in `(ln c, −ln(1−d))`. Grid cells whose series do not converge
/// within the cap are skipped. Ties on the grid go to the smallest `c`, then
/// the smallest `d`.
pub fn optimize_upper_bound(
    alpha: f64,
    config: &UpperSearchConfig,
    mut progress: impl FnMut(&str),
) -> Result<BoundReport> {
    let profile = SquareLawProfile::new(alpha)?;
    let (c_lo, c_hi) = config.c_range;
    let (d_lo, d_hi) = config.d_range;
    if !(c_lo > 0.0 && c_lo < c_hi && d_lo > 0.0 && d_lo < d_hi && d_hi < 1.0) {
        return Err(invalid("upper-bound search ranges must satisfy 0 < lo < hi (and d < 1)"));
    }
    let cs = log_spaced(c_lo, c_hi, config.c_points);
    let ds: Vec<f64> = log_spaced(1.0 - d_lo, 1.0 - d_hi, config.d_points).into_iter().map(|g| 1.0 - g).collect();

    let grid_cfg = SeriesConfig { relative_tol: config.grid_tol, hard_cap: config.hard_cap };
    let mut best: Option<(f64, f64, f64)> = None;
    let mut evaluations = 0;
    for (i, &c) in cs.iter().enumerate() {
        for &d in &ds {
            evaluations += 1;
            if let Ok(e) = normalized_total_energy(c, d, &grid_cfg) {
                if best.is_none_or(|(_, _, b)| e < b) {
                    best = Some((c, d, e));
                }
            }
        }
        progress(&format!("grid row {}/{} (c = {c:.3e}), best so far {:?}", i + 1, cs.len(), best));
    }
    let (c0, d0, _) =
        best.ok_or_else(|| Error::NonConvergence("no grid cell produced a converged energy".into()))?;

    let refine_cfg = SeriesConfig { relative_tol: config.refine_tol, hard_cap: config.hard_cap };
    let objective = |x: &[f64]| {
        let c = x[0].exp();
        let d = -(-x[1]).exp_m1();
        if !(d > 0.0 && d < 1.0) {
            return f64::NAN;
        }
        normalized_total_energy(c, d, &refine_cfg).map(|e| -e).unwrap_or(f64::NAN)
    };
    let start = [c0.ln(), -(1.0 - d0).ln()];
    let nm = NelderMeadConfig {
        initial_step: vec![0.05, 0.05],
        x_tol: 1e-4,
        f_tol: config.constant_tol,
        max_iter: config.max_refine_iter,
    };
    let refined = maximize_nelder_mead(objective, &start, &nm)?;
    progress(&format!("refinement: {} iterations, converged = {}", refined.iterations, refined.converged));
    let c = refined.argmax[0].exp();
    let d = -(-refined.argmax[1]).exp_m1();
    let params = vec![("c".to_string(), c), ("d".to_string(), d), ("grid_cells".to_string(), evaluations as f64)];
    Ok(BoundReport::from_constant(&profile, -refined.value, params, refined.iterations, refined.converged))
}

/// Minimizes `E_total/√α` over `c` alone with `d` held fixed, by golden section
/// in `ln c` over `c_range`.
pub fn optimize_upper_bound_fixed_d(alpha: f64, d: f64, c_range: (f64, f64), tol: f64) -> Result<BoundReport> {
    let profile = SquareLawProfile::new(alpha)?;
    GeometricParams::new(1.0, 1.0, d, 1)?;
    let cfg = SeriesConfig { relative_tol: tol, ..SeriesConfig::default() };
    let objective = |lc: f64| normalized_total_energy(lc.exp(), d, &cfg).map(|e| -e).unwrap_or(f64::NEG_INFINITY);
    let (lc, v, iterations) = golden_section_max(objective, c_range.0.ln(), c_range.1.ln(), 1e-7)?;
    let params = vec![("c".to_string(), lc.exp()), ("d".to_string(), d)];
    Ok(BoundReport::from_constant(&profile, -v, params, iterations, true))
}

/// `2√(ln 3 − Li₂(−2))`, the prior-work upper-bound constant (≈ 3.1846).
pub fn theorem2_constant() -> Result<f64> {
    Ok(theorem2_constant_from(dilogarithm(-2.0)?))
}

/// The same expression with a caller-supplied value of `Li₂(−2)`.
pub fn theorem2_constant_from(li2_minus_two: f64) -> f64 {
    2.0 * (3f64.ln() - li2_minus_two).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(c: f64, d: f64, layers: usize) -> LadderSchedule {
        geometric_schedule(&GeometricParams::new(1.0, c, d, layers).unwrap()).unwrap()
    }

    #[test]
    fn geometric_helpers_match_brute_force() {
        for &d in &[0.0, 0.3, 0.9, 0.999, 0.999_999] {
            for j in [1u32, 2, 5, 40, 1000] {
                let brute: f64 = (0..j).map(|i| power(d, i as f64)).sum();
                let deficit: f64 = (0..j).map(|i| 1.0 - power(d, i as f64)).sum();
                assert!((geometric_sum(d, j as f64) - brute).abs() <= 1e-12 * brute, "d={d} j={j}");
                let err = (geometric_deficit(d, j as f64) - deficit).abs();
                assert!(err <= 1e-10 * deficit.max(1e-300) + 1e-300, "d={d} j={j}: {err}");
            }
        }
    }

    #[test]
    fn schedule_examples() {
        let s = unit(1.0, 0.5, 4);
        assert_eq!(s.betas()[0], 1.0);
        assert!((s.betas()[1] - 2.0).abs() < 1e-15);
        for k in 1..=4 {
            assert!(s.jump_residual(k).abs() <= 1e-12 * (1.0 + s.q(k).powi(2)));
        }
    }

    #[test]
    fn zero_d_is_single_uncoded_layer() {
        let p = GeometricParams::new(2.0, 0.7, 0.0, 6).unwrap();
        let s = geometric_schedule(&p).unwrap();
        let (alpha, delta) = (p.alpha, p.delta);
        for k in 1..=6 {
            let kf = k as f64;
            let want = 1.0 + alpha * kf * kf * delta * delta - kf * alpha * delta * delta;
            assert!((s.betas()[k - 1] - want).abs() < 1e-12 * want);
            // slope fixed at A₀
            assert_eq!(s.total(k), alpha * delta);
        }
        assert!(check_feasibility(&s).is_empty());
    }

    #[test]
    fn feasibility_flags_large_energy() {
        let s = unit(1.0, 0.5, 5);
        assert!(check_feasibility(&s).is_empty());
        let mut energies = s.energies().to_vec();
        energies[1] *= 10.0;
        let bad = LadderSchedule::from_energies(1.0, s.q_points().to_vec(), energies).unwrap();
        let v = check_feasibility(&bad);
        assert_eq!(v[0].index, 1);
        assert_eq!(v[0].kind, ViolationKind::EnergyTooLarge);
        assert!(v[0].slack < 0.0);

        let off = LadderSchedule::from_energies(1.0, vec![1.0, 2.0], vec![0.5, 0.1]).unwrap();
        assert_eq!(check_feasibility(&off)[0].kind, ViolationKind::FirstLayerEnergy);
    }

    #[test]
    fn schedule_structure_errors() {
        assert!(LadderSchedule::from_energies(1.0, vec![], vec![]).is_err());
        assert!(LadderSchedule::from_energies(1.0, vec![2.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(LadderSchedule::from_energies(1.0, vec![1.0], vec![-1.0]).is_err());
        assert!(LadderSchedule::from_energies(0.0, vec![1.0], vec![1.0]).is_err());
        assert!(GeometricParams::new(1.0, 1.0, 1.0, 3).is_err());
        assert!(GeometricParams::new(1.0, 0.0, 0.5, 3).is_err());
        assert!(GeometricParams::new(1.0, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let r = lemma2_inequality(0.5, 3).unwrap();
        assert_eq!(r.lhs, 0.125);
        assert!((r.rhs - 1.3125).abs() < 1e-15);
        assert!(r.holds);
        for &d in &[0.01, 0.5, 0.9999] {
            let one = lemma2_inequality(d, 1).unwrap();
            assert!(one.holds);
            assert!((one.rhs - 1.0).abs() < 1e-12);
        }
        assert!(lemma2_inequality(0.999, 10_000).unwrap().holds);
        assert!(lemma2_inequality(0.0, 1).is_err());
        assert!(lemma2_inequality(1.0, 1).is_err());
        assert!(lemma2_inequality(0.5, 0).is_err());
    }

    #[test]
    fn staircase_examples() {
        let s = unit(1.0, 0.5, 3);
        assert_eq!(staircase_fidelity(&s, 0.0).unwrap(), 1.0);
        assert!((staircase_fidelity(&s, 0.5).unwrap() - 1.5).abs() < 1e-15);
        for k in 1..3 {
            let below = staircase_fidelity(&s, s.q(k) * (1.0 - 1e-12)).unwrap();
            assert!((below - (1.0 + s.q(k).powi(2))).abs() < 1e-9);
        }
        assert!(matches!(staircase_fidelity(&s, 3.0), Err(Error::OutOfLadder { .. })));
        assert!(staircase_fidelity(&s, -0.1).is_err());
    }

    #[test]
    fn rate_and_energy_examples() {
        let s = unit(1.0, 0.5, 3);
        let r = digital_rate(&s, 1).unwrap();
        assert!((r - 0.5 * 1.5f64.ln()).abs() < 1e-15);
        let b = digital_energy(&s, 1).unwrap();
        assert!((b - 1.5f64.ln()).abs() < 1e-15);
        assert!((b * s.q(1) / 2.0 - r).abs() < 1e-14);
        assert!(digital_rate(&s, 0).is_err());
        assert!(digital_rate(&s, 3).is_err());

        // a layer with no refinement carries nothing
        let flat = LadderSchedule::from_energies(1.0, vec![1.0, 2.0, 3.0], vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(flat.betas()[1], flat.betas()[0]);
        assert_eq!(digital_rate(&flat, 1).unwrap(), 0.0);
        assert_eq!(digital_energy(&flat, 1).unwrap(), 0.0);
    }

    #[test]
    fn first_uncoded_term() {
        let ladder = UnitLadder { c: 0.37, d: 0.8 };
        assert_eq!(ladder.uncoded(0.0), 0.37);
        let p = GeometricParams::new(25.0, 0.37, 0.8, 1).unwrap();
        let s = geometric_schedule(&p).unwrap();
        assert!((s.energies()[0] / s.betas()[0] - 0.37 * 5.0).abs() < 1e-14);
    }

    #[test]
    fn series_terms_match_schedule() {
        let p = GeometricParams::new(1.0, 0.3, 0.9, 12).unwrap();
        let s = geometric_schedule(&p).unwrap();
        let ladder = UnitLadder { c: 0.3, d: 0.9 };
        for k in 1..11 {
            let b = digital_energy(&s, k).unwrap();
            assert!((ladder.digital(k as f64) - b).abs() < 1e-13 * b.max(1e-12), "k={k}");
            let u = s.energies()[k] / s.betas()[k];
            assert!((ladder.uncoded(k as f64) - u).abs() < 1e-13 * u);
        }
    }

    #[test]
    fn theorem2_pieces() {
        assert!((theorem2_constant().unwrap() - 3.1846).abs() < 5e-4);
        assert!((theorem2_constant_from(0.0) - 2.0962).abs() < 1e-4);
        assert!((3f64.ln() - 1.0986).abs() < 1e-4);
    }
}
