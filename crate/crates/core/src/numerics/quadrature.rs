use crate::error::{invalid, Error, Result};

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

/// Absolute tolerance used by [`dilogarithm`].
pub const DILOG_TOL: f64 = 1e-10;

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // Odd Kronrod nodes coincide with the 7-point Gauss nodes.
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature of `f` over `[a, b]` to
/// absolute tolerance `abs_tol`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate meets the tolerance. Nodes are interior, so integrable endpoint
/// singularities are fine as long as `f` is finite inside the interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || !(abs_tol > 0.0) {
        return Err(invalid("integration needs finite limits and a positive tolerance"));
    }
    if a == b {
        return Ok(0.0);
    }
    // (lo, hi, estimate, error)
    let (whole, err) = gauss_kronrod(&f, a, b);
    let mut pieces = vec![(a, b, whole, err)];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let total_err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::NonFinite("integrand produced a non-finite value".into()));
        }
        if total_err <= abs_tol.max(50.0 * f64::EPSILON * total.abs()) {
            return Ok(total);
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one interval");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if pieces.len() + 2 > MAX_INTERVALS || mid <= lo || mid >= hi {
            return Err(Error::NonConvergence(format!(
                "quadrature on [{a}, {b}] stuck at error estimate {total_err:e}"
            )));
        }
        let (left, left_err) = gauss_kronrod(&f, lo, mid);
        let (right, right_err) = gauss_kronrod(&f, mid, hi);
        pieces.push((lo, mid, left, left_err));
        pieces.push((mid, hi, right, right_err));
    }
}

/// The dilogarithm `Li₂(z) = -∫₀¹ ln(1 - zu)/u du`, evaluated directly from
/// the integral to absolute tolerance [`DILOG_TOL`].
///
/// Only real `z ≤ 1` is supported.
pub fn dilogarithm(z: f64) -> Result<f64> {
    if z.is_nan() || z > 1.0 {
        return Err(invalid(format!("dilogarithm is only supported for z <= 1, got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    // -ln(1 - zu)/u -> z as u -> 0; ln_1p keeps small u accurate.
    let integrand = |u: f64| {
        if u == 0.0 {
            z
        } else {
            -(-z * u).ln_1p() / u
        }
    };
    integrate(integrand, 0.0, 1.0, DILOG_TOL)
}
