//! Independent recomputations of the headline constants.

use energy_bounds::layered_scheme::{
    optimize_upper_bound_fixed_d, theorem2_constant, theorem2_constant_from, total_energy, GeometricParams,
};
use energy_bounds::lower_bounds::{
    lemma1_bound, optimize_k_level, optimize_levels, optimize_two_level, pointwise_lower_bound, theorem1_constant,
    two_level_objective, LowerBoundParams, TWO_LEVEL_START,
};
use energy_bounds::numerics::{dilogarithm, AscentConfig};
use energy_bounds::SquareLawProfile;

/// `Li₂(z)` for `z < −1` by inversion onto `(−1, 0)` plus the power series there.
fn dilog_by_inversion(z: f64) -> f64 {
    let w = 1.0 / z;
    let mut series = 0.0;
    let mut power = 1.0;
    for k in 1..200 {
        power *= w;
        series += power / (k * k) as f64;
    }
    -std::f64::consts::PI.powi(2) / 6.0 - 0.5 * (-z).ln().powi(2) - series
}

#[test]
fn dilog_at_minus_two() {
    let oracle = dilog_by_inversion(-2.0);
    assert!((oracle - -1.43674637).abs() < 1e-8);
    assert!((dilogarithm(-2.0).unwrap() - oracle).abs() < 1e-10);
    assert!((theorem2_constant().unwrap() - theorem2_constant_from(oracle)).abs() < 1e-9);
    assert!((theorem2_constant().unwrap() - 3.1846).abs() < 5e-4);
}

#[test]
fn prior_lower_series() {
    let direct: f64 = (1..60).map(|k| 1.0 / ((4.0 * std::f64::consts::E).powi(k) - 1.0).sqrt()).sum();
    assert!((theorem1_constant(1e-12).unwrap() - direct).abs() < 1e-11);
    assert!((direct - 0.4507).abs() < 5e-4);
}

#[test]
fn two_level_grid_scan() {
    // q1, q2 log-spaced over [0.1, 50], τ over [0, 2]
    let qs: Vec<f64> = (0..200).map(|i| (0.1f64.ln() + (500f64).ln() * i as f64 / 199.0).exp()).collect();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for (i, &q1) in qs.iter().enumerate() {
        for &q2 in &qs[i + 1..] {
            for t in 0..100 {
                let tau = 2.0 * t as f64 / 99.0;
                let v = two_level_objective(q1, q2, tau).unwrap();
                if v > best.0 {
                    best = (v, q1, q2, tau);
                }
            }
        }
    }
    let found = optimize_two_level(&SquareLawProfile::unit(), TWO_LEVEL_START, &AscentConfig::default()).unwrap();
    assert!(found.value >= best.0 - 1e-12, "optimizer {} below grid {:?}", found.value, best);
    assert!(found.value - best.0 < 1e-3);
    assert!((found.param("q1").unwrap() - best.1).abs() < 0.1);
    assert!((found.param("tau").unwrap() - best.3).abs() < 0.03);
}

#[test]
fn k_level_matches_dedicated_optimizers() {
    let unit = SquareLawProfile::unit();
    let cfg = AscentConfig::default();
    let pointwise = pointwise_lower_bound(&unit).unwrap();
    let one = optimize_k_level(&unit, &LowerBoundParams::single(0.5).unwrap(), &cfg).unwrap();
    assert!((one.value - pointwise.value).abs() < 1e-6);

    let two = optimize_two_level(&unit, TWO_LEVEL_START, &cfg).unwrap();
    let (q1, q2, tau) = TWO_LEVEL_START;
    let start = LowerBoundParams::new(vec![tau, 0.0], vec![1.0 / q1, 1.0 / q2]).unwrap();
    let generic = optimize_k_level(&unit, &start, &cfg).unwrap();
    assert!((generic.value - two.value).abs() < 1e-6);

    let three = optimize_levels(&unit, 3, &cfg).unwrap();
    assert!(three.value >= two.value);
    // evaluated directly at its argmax
    let params = energy_bounds::lower_bounds::params_from_report(&unit, &three).unwrap();
    assert!((lemma1_bound(&unit, &params).unwrap() - three.value).abs() < 1e-12);
}

#[test]
fn optimizer_is_a_fixed_point() {
    let unit = SquareLawProfile::unit();
    let cfg = AscentConfig::default();
    let first = optimize_two_level(&unit, TWO_LEVEL_START, &cfg).unwrap();
    let start = (first.param("q1").unwrap(), first.param("q2").unwrap(), first.param("tau").unwrap());
    let again = optimize_two_level(&unit, start, &cfg).unwrap();
    assert!(again.iterations <= 5, "{again:?}");
    assert!(again.value >= first.value);

    let rounded = optimize_two_level(&unit, (1.5496, 5.6679, 0.1285), &cfg).unwrap();
    assert!(rounded.value >= two_level_objective(1.5496, 5.6679, 0.1285).unwrap());
    assert!((rounded.value - first.value).abs() < 1e-6);
}

/// `E_total/√α` summed term by term, with `β` taken from running sums of the
/// energies rather than the closed form, and the digital tail approximated by
/// `Σ_{k>M} 2/(k²c) ≈ 2/(Mc)`.
fn brute_force_energy(c: f64, d: f64, terms: usize) -> f64 {
    let mut total = 0.0; // A_{k,total}
    let mut a = c; // A_k = c dᵏ
    let mut beta_prev = 1.0;
    let mut e_unc = 0.0;
    let mut e_dig = 0.0;
    for k in 0..terms {
        total += a;
        let q_next = (k + 1) as f64 * c;
        let beta = 1.0 + q_next * q_next - total * q_next;
        e_unc += a / beta;
        if k >= 1 {
            let q = k as f64 * c;
            e_dig += ((beta - beta_prev) / (1.0 + q * q)).ln_1p() / q;
        }
        beta_prev = beta;
        a *= d;
    }
    e_unc + e_dig + 2.0 / (terms as f64 * c)
}

#[test]
fn upper_energy_against_brute_force() {
    let (c, d) = (0.00137, 0.999);
    let oracle = brute_force_energy(c, d, 10_000_000);
    let e = total_energy(&GeometricParams::new(1.0, c, d, 1).unwrap(), 1e-9).unwrap();
    assert!((e.e_total - oracle).abs() < 1e-5, "{} vs {oracle}", e.e_total);
    assert!((e.e_total - 2.3203).abs() < 0.01);

    let (c, d) = (0.3, 0.8);
    let oracle = brute_force_energy(c, d, 2_000_000);
    let e = total_energy(&GeometricParams::new(1.0, c, d, 1).unwrap(), 1e-10).unwrap();
    assert!((e.e_total - oracle).abs() < 1e-6, "{} vs {oracle}", e.e_total);
}

#[test]
fn fixed_decay_is_worse() {
    let fixed = optimize_upper_bound_fixed_d(1.0, 0.9, (1e-3, 10.0), 1e-9).unwrap();
    let best_point = total_energy(&GeometricParams::new(1.0, 0.00137, 0.999, 1).unwrap(), 1e-9).unwrap();
    assert!(fixed.normalized_constant > best_point.e_total, "{fixed:?}");
}
