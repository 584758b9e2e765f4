//! Dense linear-algebra and Monte Carlo cross-checks of the layered scheme.
//!
//! At epoch `k` the receiver holds the decoded indices of layers `1..k` and the
//! analog observations `Ỹ_i = √A_i · S_k + W_i`, `i = 0..k`, of the current
//! residual `S_k` (variance `1/β_k`). Everything here recomputes the scheme's
//! closed forms (rank-one covariances, determinant-lemma rates, the linear
//! MMSE distortion `1/(β_k + Q·A_{k+1,total})`) by independent routes.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::layered_scheme::{digital_rate, geometric_schedule, GeometricParams, LadderSchedule};

/// Elementwise agreement required between the two covariance constructions.
pub const COVARIANCE_TOL: f64 = 1e-12;
/// Agreement required between independently computed rates, coefficients and distortions.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Largest dimension used by the dense oracles.
pub const MAX_DIM: usize = 8;

/// `k × (k+1)` observation matrix: first column `√A₀ … √A_{k−1}`, then `I_k`.
///
/// Multiplying it by `(S, W₀, …, W_{k−1})ᵀ` yields the `k` analog observations.
pub fn build_observation_matrix(k: usize, energies: &[f64]) -> Result<DMatrix<f64>> {
    if k == 0 || energies.len() < k {
        return Err(invalid(format!("need k >= 1 and at least k energies, got k = {k}, {} energies", energies.len())));
    }
    if energies[..k].iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(invalid("analog energies must be finite and nonnegative"));
    }
    Ok(DMatrix::from_fn(k, k + 1, |i, j| match j {
        0 => energies[i].sqrt(),
        _ if j == i + 1 => 1.0,
        _ => 0.0,
    }))
}

/// Observation covariance before (`sigma_y`) and after (`sigma_y_given_s`)
/// conditioning on the newly decoded layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub sigma_y: DMatrix<f64>,
    pub sigma_y_given_s: DMatrix<f64>,
}

fn rank_one_covariance(gains: &DVector<f64>, variance: f64, noise: f64) -> DMatrix<f64> {
    let n = gains.len();
    DMatrix::identity(n, n) * noise + gains * gains.transpose() * variance
}

fn sandwich_covariance(obs: &DMatrix<f64>, variance: f64, noise: f64) -> DMatrix<f64> {
    // Σ_Z = N·I + (σ² − N)·G with G = e₀e₀ᵀ
    let n = obs.ncols();
    let mut sigma_z = DMatrix::identity(n, n) * noise;
    sigma_z[(0, 0)] += variance - noise;
    obs * sigma_z * obs.transpose()
}

/// Builds `N·I + σ²aaᵀ` for both layer variances, once in rank-one form and
/// once as `A Σ_Z Aᵀ`, and fails if the two disagree.
pub fn covariance_pair(energies: &[f64], sigma_prev: f64, sigma_cur: f64, noise: f64) -> Result<CovariancePair> {
    if !(sigma_prev >= sigma_cur && sigma_cur > 0.0) {
        return Err(invalid(format!("need sigma_prev >= sigma_cur > 0, got {sigma_prev}, {sigma_cur}")));
    }
    if !(noise > 0.0 && noise.is_finite()) {
        return Err(invalid(format!("noise variance must be positive, got {noise}")));
    }
    let k = energies.len();
    let obs = build_observation_matrix(k, energies)?;
    let gains = obs.column(0).into_owned();
    let pair = CovariancePair {
        sigma_y: rank_one_covariance(&gains, sigma_prev, noise),
        sigma_y_given_s: rank_one_covariance(&gains, sigma_cur, noise),
    };
    for (closed, variance) in [(&pair.sigma_y, sigma_prev), (&pair.sigma_y_given_s, sigma_cur)] {
        let dense = sandwich_covariance(&obs, variance, noise);
        let scale = closed.amax().max(1.0);
        let gap = (closed - &dense).amax();
        if gap > COVARIANCE_TOL * scale {
            return Err(Error::Inconsistent(format!("covariance routes differ by {gap:e}")));
        }
    }
    Ok(pair)
}

fn log_det_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(format!("{}x{} covariance", m.nrows(), m.ncols())))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

/// `½ ln(σ²_prev/σ²_cur) − ½ ln(det Σ_Y / det Σ_{Y|Ŝ})` from explicit determinants.
pub fn rate_via_determinants(pair: &CovariancePair, sigma_prev: f64, sigma_cur: f64) -> Result<f64> {
    if !(sigma_prev > 0.0 && sigma_cur > 0.0) {
        return Err(invalid("layer variances must be positive"));
    }
    let log_ratio = log_det_spd(&pair.sigma_y)? - log_det_spd(&pair.sigma_y_given_s)?;
    Ok(0.5 * (sigma_prev / sigma_cur).ln() - 0.5 * log_ratio)
}

/// The same rate after the matrix determinant lemma:
/// `½ ln(σ²_prev/σ²_cur) − ½ ln[(1 + σ²_prev·aᵀa/N) / (1 + σ²_cur·aᵀa/N)]`.
pub fn rate_via_determinant_lemma(gain_energy: f64, sigma_prev: f64, sigma_cur: f64, noise: f64) -> f64 {
    0.5 * (sigma_prev / sigma_cur).ln()
        - 0.5 * ((1.0 + sigma_prev * gain_energy / noise) / (1.0 + sigma_cur * gain_energy / noise)).ln()
}

/// Rate of layer `k` of `schedule` computed three ways:
/// `(determinants, determinant lemma, closed form in β)`.
pub fn layer_rates(schedule: &LadderSchedule, k: usize) -> Result<(f64, f64, f64)> {
    let closed = digital_rate(schedule, k)?;
    let betas = schedule.betas();
    let (sigma_prev, sigma_cur) = (1.0 / betas[k - 1], 1.0 / betas[k]);
    let noise = 1.0 / schedule.q(k);
    let energies = &schedule.energies()[..k];
    let pair = covariance_pair(energies, sigma_prev, sigma_cur, noise)?;
    let dets = rate_via_determinants(&pair, sigma_prev, sigma_cur)?;
    let lemma = rate_via_determinant_lemma(schedule.total(k), sigma_prev, sigma_cur, noise);
    Ok((dets, lemma, closed))
}

/// Receiver state inside one noise interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideInfoModel {
    /// `√A₀ … √A_k`
    pub gains: Vec<f64>,
    pub noise_var: f64,
    /// `σ²_{S_k} = 1/β_k`
    pub layer_var: f64,
}

impl SideInfoModel {
    pub fn new(gains: Vec<f64>, noise_var: f64, layer_var: f64) -> Result<Self> {
        if gains.is_empty() || gains.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(invalid("gains must be a nonempty list of nonnegative numbers"));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(invalid(format!("noise variance must be positive, got {noise_var}")));
        }
        if !(layer_var > 0.0 && layer_var <= 1.0) {
            return Err(invalid(format!("layer variance must lie in (0, 1], got {layer_var}")));
        }
        Ok(Self { gains, noise_var, layer_var })
    }

    /// The model a receiver at quality `q` faces on `schedule`.
    pub fn from_schedule(schedule: &LadderSchedule, q: f64) -> Result<Self> {
        if !(q > 0.0) {
            return Err(invalid(format!("quality must be positive, got {q}")));
        }
        crate::layered_scheme::staircase_fidelity(schedule, q)?;
        let k = schedule.q_points().partition_point(|&jump| jump <= q);
        let gains = schedule.energies()[..=k].iter().map(|a| a.sqrt()).collect();
        Self::new(gains, 1.0 / q, 1.0 / schedule.betas()[k])
    }

    /// Index `k` of the residual being estimated.
    pub fn epoch(&self) -> usize {
        self.gains.len() - 1
    }

    /// `aᵀa = A_{k+1,total}`.
    pub fn gain_energy(&self) -> f64 {
        self.gains.iter().map(|g| g * g).sum()
    }

    fn gain_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.gains)
    }

    /// `N·I + σ²aaᵀ`, the covariance of the observations.
    pub fn observation_covariance(&self) -> DMatrix<f64> {
        rank_one_covariance(&self.gain_vector(), self.layer_var, self.noise_var)
    }
}

/// Linear-MMSE weights `λ = σ²(N·I + σ²aaᵀ)⁻¹a = σ²a / (N + σ²aᵀa)`.
pub fn wiener_coefficients(model: &SideInfoModel) -> DVector<f64> {
    let denom = model.noise_var + model.layer_var * model.gain_energy();
    model.gain_vector() * (model.layer_var / denom)
}

/// Mean squared error of the estimator `λᵀỸ` under `model`.
pub fn estimator_error(model: &SideInfoModel, lambda: &DVector<f64>) -> f64 {
    let a = model.gain_vector();
    let cov = model.observation_covariance();
    model.layer_var - 2.0 * model.layer_var * lambda.dot(&a) + lambda.dot(&(&cov * lambda))
}

/// `1/(β_k + Q·A_{k+1,total})`.
pub fn analytic_distortion(beta: f64, total_next: f64, q: f64) -> Result<f64> {
    if !(beta >= 1.0) || !(total_next >= 0.0) || !(q >= 0.0) {
        return Err(invalid(format!("need beta >= 1, A_total >= 0, Q >= 0; got {beta}, {total_next}, {q}")));
    }
    Ok(1.0 / (beta + q * total_next))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub distortion: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Sample correlation of the estimation error with each observation.
    pub residual_correlations: Vec<f64>,
}

/// Simulates `S ~ N(0, σ²)`, `Ỹ_i = √A_i·S + W_i` with `W_i ~ N(0, N)`, applies
/// the Wiener weights and reports the empirical mean squared error.
///
/// A single ChaCha8 stream seeded from `seed` drives all draws in a fixed
/// order (source first, then each noise), so results are bit-reproducible.
pub fn monte_carlo_distortion(model: &SideInfoModel, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    if samples < 1000 {
        return Err(invalid(format!("need at least 1000 samples, got {samples}")));
    }
    let lambda = wiener_coefficients(model);
    let n_obs = model.gains.len();
    let (source_sd, noise_sd) = (model.layer_var.sqrt(), model.noise_var.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut sum_sq = 0.0;
    let mut sum_quad = 0.0;
    let mut sum_err = 0.0;
    let mut sum_y = vec![0.0; n_obs];
    let mut sum_yy = vec![0.0; n_obs];
    let mut sum_ey = vec![0.0; n_obs];
    let mut obs = vec![0.0; n_obs];
    for _ in 0..samples {
        let s: f64 = source_sd * rng.sample::<f64, _>(StandardNormal);
        let mut estimate = 0.0;
        for i in 0..n_obs {
            let w: f64 = noise_sd * rng.sample::<f64, _>(StandardNormal);
            obs[i] = model.gains[i] * s + w;
            estimate += lambda[i] * obs[i];
        }
        let err = s - estimate;
        let sq = err * err;
        sum_sq += sq;
        sum_quad += sq * sq;
        sum_err += err;
        for i in 0..n_obs {
            sum_y[i] += obs[i];
            sum_yy[i] += obs[i] * obs[i];
            sum_ey[i] += err * obs[i];
        }
    }
    let n = samples as f64;
    let mean_sq = sum_sq / n;
    let var_sq = (sum_quad / n - mean_sq * mean_sq).max(0.0) * n / (n - 1.0);
    let mean_err = sum_err / n;
    let var_err = (mean_sq - mean_err * mean_err).max(0.0);
    let residual_correlations = (0..n_obs)
        .map(|i| {
            let mean_y = sum_y[i] / n;
            let var_y = (sum_yy[i] / n - mean_y * mean_y).max(0.0);
            let cov = sum_ey[i] / n - mean_err * mean_y;
            if var_y == 0.0 || var_err == 0.0 {
                0.0
            } else {
                cov / (var_y * var_err).sqrt()
            }
        })
        .collect();
    Ok(MonteCarloEstimate { distortion: mean_sq, std_error: (var_sq / n).sqrt(), samples, residual_correlations })
}

/// `(det(M + uvᵀ), det(M)·(1 + vᵀM⁻¹u))`.
pub fn determinant_lemma(m: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<(f64, f64)> {
    let inv = m.clone().try_inverse().ok_or_else(|| invalid("matrix is singular"))?;
    let direct = (m + u * v.transpose()).determinant();
    let lemma = m.determinant() * (1.0 + v.dot(&(&inv * u)));
    Ok((direct, lemma))
}

/// `(M + uvᵀ)⁻¹` from `M⁻¹` by the Sherman-Morrison formula.
pub fn sherman_morrison_inverse(m_inv: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let mu = m_inv * u;
    let vm = m_inv.transpose() * v;
    let denom = 1.0 + v.dot(&mu);
    if denom.abs() < f64::EPSILON {
        return Err(invalid("rank-one update makes the matrix singular"));
    }
    Ok(m_inv - mu * vm.transpose() / denom)
}

/// One named comparison in a validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Error measure that is compared against `tolerance`.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, observed: f64, expected: f64, error: f64, tolerance: f64) -> Self {
        Self { name: name.into(), observed, expected, error, tolerance, passed: error <= tolerance }
    }

    /// Passes when `|observed − expected| ≤ tolerance`.
    pub fn absolute(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(name, observed, expected, (observed - expected).abs(), tolerance)
    }
}

/// A random well-conditioned `dim × dim` matrix: entries in `[−1, 1]` plus
/// `dim` on the diagonal, so every Gershgorin disc excludes the origin.
pub fn random_well_conditioned<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| rng.random_range(-1.0..1.0) + if i == j { dim as f64 } else { 0.0 })
}

/// A random ladder that satisfies every feasibility constraint: `A₀ = αQ₁`
/// and each later `A_k` a random fraction (below 0.99) of its upper limit.
pub fn random_feasible_ladder<R: Rng>(rng: &mut R, layers: usize) -> Result<LadderSchedule> {
    if layers == 0 {
        return Err(invalid("need at least one layer"));
    }
    let alpha = 10f64.powf(rng.random_range(-1.0..1.0));
    let mut q = Vec::with_capacity(layers);
    let mut acc = 0.0;
    for _ in 0..layers {
        acc += rng.random_range(0.1..1.0);
        q.push(acc);
    }
    let mut energies = vec![alpha * q[0]];
    let mut total = energies[0];
    for k in 1..layers {
        let (lo, hi) = (q[k - 1], q[k]);
        let limit = (alpha * (hi * hi - lo * lo) - total * (hi - lo)) / hi;
        let a = rng.random_range(0.0..0.99) * limit;
        energies.push(a);
        total += a;
    }
    LadderSchedule::from_energies(alpha, q, energies)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Determinant-lemma and Sherman-Morrison checks on `instances` random
/// matrices of dimension 1 to [`MAX_DIM`].
///
/// The determinant error is measured relative to `|det M|·(1 + |vᵀM⁻¹u|)`, the
/// natural scale of both sides; the inverse error is the largest entrywise
/// gap relative to the largest entry of the dense inverse.
pub fn identities_suite(seed: u64, instances: usize) -> Result<Vec<Check>> {
    let mut rng = rng(seed);
    let (mut worst_det, mut worst_inv) = (0.0f64, 0.0f64);
    for i in 0..instances {
        let dim = 1 + i % MAX_DIM;
        let m = random_well_conditioned(&mut rng, dim);
        let u = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let inv = m.clone().try_inverse().ok_or_else(|| invalid("random matrix is singular"))?;
        let (direct, lemma) = determinant_lemma(&m, &u, &v)?;
        let scale = m.determinant().abs() * (1.0 + v.dot(&(&inv * &u)).abs());
        worst_det = worst_det.max((direct - lemma).abs() / scale);

        let updated = &m + &u * v.transpose();
        if let Some(dense) = updated.try_inverse() {
            let sm = sherman_morrison_inverse(&inv, &u, &v)?;
            worst_inv = worst_inv.max((&sm - &dense).amax() / dense.amax());
        }
    }
    Ok(vec![
        Check::new("determinant_lemma_max_rel_error", worst_det, 0.0, worst_det, IDENTITY_TOL),
        Check::new("sherman_morrison_max_rel_error", worst_inv, 0.0, worst_inv, IDENTITY_TOL),
    ])
}

/// Rate consistency on random feasible ladders: every layer `k ≤ 8` of every
/// instance is evaluated through determinants, the determinant lemma and the
/// closed form.
pub fn rates_suite(seed: u64, instances: usize) -> Result<Vec<Check>> {
    let mut rng = rng(seed);
    let (mut worst_det, mut worst_lemma, mut min_rate) = (0.0f64, 0.0f64, f64::INFINITY);
    let mut layers_checked = 0usize;
    for i in 0..instances {
        let layers = 2 + i % MAX_DIM;
        let ladder = random_feasible_ladder(&mut rng, layers)?;
        for k in 1..layers {
            let (dets, lemma, closed) = layer_rates(&ladder, k)?;
            worst_det = worst_det.max((dets - closed).abs());
            worst_lemma = worst_lemma.max((lemma - closed).abs());
            min_rate = min_rate.min(closed);
            layers_checked += 1;
        }
    }
    Ok(vec![
        Check::new("rate_determinants_vs_closed_form", worst_det, 0.0, worst_det, IDENTITY_TOL),
        Check::new("rate_lemma_vs_closed_form", worst_lemma, 0.0, worst_lemma, IDENTITY_TOL),
        Check::new("rate_positive", min_rate, 0.0, if min_rate > 0.0 { 0.0 } else { 1.0 }, 0.0),
        Check::new("layers_checked", layers_checked as f64, 100.0, if layers_checked >= 100 { 0.0 } else { 1.0 }, 0.0),
    ])
}

/// Qualities at the middle of each segment of the reference `K = 3` ladder
/// (`α = 1`, `c = 1`, `d = 0.5`).
pub fn reference_ladder() -> Result<(LadderSchedule, [f64; 3])> {
    let ladder = geometric_schedule(&GeometricParams::new(1.0, 1.0, 0.5, 3)?)?;
    Ok((ladder, [0.5, 1.5, 2.5]))
}

/// Monte Carlo distortion against the analytic value on the reference ladder:
/// within three standard errors and 2 % relative, with residuals uncorrelated
/// with every observation to within `3/√samples`.
pub fn mmse_suite(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let (ladder, qualities) = reference_ladder()?;
    let mut checks = Vec::new();
    for (segment, &q) in qualities.iter().enumerate() {
        let model = SideInfoModel::from_schedule(&ladder, q)?;
        let k = model.epoch();
        let analytic = analytic_distortion(ladder.betas()[k], ladder.total(k + 1), q)?;
        let mc = monte_carlo_distortion(&model, samples, seed.wrapping_add(segment as u64))?;
        let gap = (mc.distortion - analytic).abs();
        checks.push(Check::new(format!("mmse_q{q}_within_3se"), mc.distortion, analytic, gap, 3.0 * mc.std_error));
        checks.push(Check::new(format!("mmse_q{q}_relative"), mc.distortion, analytic, gap / analytic, 0.02));
        let worst_corr = mc.residual_correlations.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        checks.push(Check::new(
            format!("mmse_q{q}_orthogonality"),
            worst_corr,
            0.0,
            worst_corr,
            3.0 / (samples as f64).sqrt(),
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observation_matrix_examples() {
        let a = build_observation_matrix(1, &[4.0]).unwrap();
        assert_eq!(a, DMatrix::from_row_slice(1, 2, &[2.0, 1.0]));
        let b = build_observation_matrix(2, &[1.0, 1.0]).unwrap();
        assert_eq!(b, DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0]));
        assert_eq!(&b * b.transpose(), DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]));
        assert!(build_observation_matrix(2, &[1.0, -1.0]).is_err());
        assert!(build_observation_matrix(0, &[]).is_err());
        assert!(build_observation_matrix(3, &[1.0]).is_err());
    }

    #[test]
    fn covariance_examples() {
        let p = covariance_pair(&[1.0], 1.0, 0.5, 1.0).unwrap();
        assert_eq!(p.sigma_y, DMatrix::from_element(1, 1, 2.0));
        let q = covariance_pair(&[1.0, 1.0], 1.0, 0.5, 0.5).unwrap();
        assert_eq!(q.sigma_y, DMatrix::from_row_slice(2, 2, &[1.5, 1.0, 1.0, 1.5]));
        assert!(covariance_pair(&[1.0], 0.5, 1.0, 1.0).is_err());
        assert!(covariance_pair(&[1.0], 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn rate_examples() {
        let p = covariance_pair(&[1.0], 1.0, 1.0, 1.0).unwrap();
        assert!(rate_via_determinants(&p, 1.0, 1.0).unwrap().abs() < 1e-15);
        let q = covariance_pair(&[1.0], 1.0, 0.5, 1.0).unwrap();
        let r = rate_via_determinants(&q, 1.0, 0.5).unwrap();
        let want = 0.5 * 2f64.ln() - 0.5 * (2.0f64 / 1.5).ln();
        assert!((r - want).abs() < 1e-14);
        assert!((r - 0.2027).abs() < 1e-4);
        assert!((rate_via_determinant_lemma(1.0, 1.0, 0.5, 1.0) - want).abs() < 1e-14);
    }

    #[test]
    fn wiener_examples() {
        let scalar = SideInfoModel::new(vec![1.0], 1.0, 1.0).unwrap();
        assert_eq!(wiener_coefficients(&scalar).as_slice(), &[0.5]);
        let pair = SideInfoModel::new(vec![1.0, 1.0], 1.0, 1.0).unwrap();
        let l = wiener_coefficients(&pair);
        assert!((l[0] - 1.0 / 3.0).abs() < 1e-15 && (l[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((estimator_error(&pair, &l) - 1.0 / 3.0).abs() < 1e-15);
        assert!(SideInfoModel::new(vec![1.0], 0.0, 1.0).is_err());
        assert!(SideInfoModel::new(vec![], 1.0, 1.0).is_err());
        assert!(SideInfoModel::new(vec![1.0], 1.0, 1.5).is_err());
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(analytic_distortion(2.0, 3.0, 0.0).unwrap(), 0.5);
        assert_eq!(analytic_distortion(1.0, 1.0, 1.0).unwrap(), 0.5);
        assert!(analytic_distortion(0.5, 1.0, 1.0).is_err());
        assert!(analytic_distortion(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn model_from_schedule() {
        let (ladder, qs) = reference_ladder().unwrap();
        let m = SideInfoModel::from_schedule(&ladder, qs[2]).unwrap();
        assert_eq!(m.epoch(), 2);
        assert!((m.gain_energy() - 1.75).abs() < 1e-15);
        assert!((m.layer_var - 1.0 / 4.75).abs() < 1e-15);
        assert!(SideInfoModel::from_schedule(&ladder, 3.5).is_err());
        assert!(SideInfoModel::from_schedule(&ladder, 0.0).is_err());
    }

    #[test]
    fn monte_carlo_scalar_case() {
        let m = SideInfoModel::new(vec![1.0], 1.0, 1.0).unwrap();
        let mc = monte_carlo_distortion(&m, 100_000, 7).unwrap();
        assert!((mc.distortion - 0.5).abs() <= 3.0 * mc.std_error, "{mc:?}");
        assert!(monte_carlo_distortion(&m, 999, 7).is_err());
    }

    #[test]
    fn monte_carlo_without_channel() {
        let m = SideInfoModel::new(vec![0.0, 0.0], 1.0, 0.25).unwrap();
        assert!(wiener_coefficients(&m).iter().all(|&l| l == 0.0));
        let mc = monte_carlo_distortion(&m, 20_000, 1).unwrap();
        assert!((mc.distortion - 0.25).abs() <= 3.0 * mc.std_error);
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let m = SideInfoModel::new(vec![1.0, 0.5], 0.7, 0.5).unwrap();
        let a = monte_carlo_distortion(&m, 5000, 42).unwrap();
        let b = monte_carlo_distortion(&m, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_distortion(&m, 5000, 43).unwrap();
        assert_ne!(a.distortion, c.distortion);
    }

    #[test]
    fn suites_pass() {
        assert!(identities_suite(42, 200).unwrap().iter().all(|c| c.passed));
        assert!(rates_suite(42, 60).unwrap().iter().take(3).all(|c| c.passed));
        let mmse = mmse_suite(42, 20_000).unwrap();
        assert_eq!(mmse.len(), 9);
    }
}
