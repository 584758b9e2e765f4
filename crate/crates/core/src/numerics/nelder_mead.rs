use crate::error::{invalid, Error, Result};

use super::OptimResult;

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadConfig {
    /// Offset of the initial simplex vertices along each coordinate axis.
    pub initial_step: Vec<f64>,
    /// Stop once every vertex is within this distance (max-norm) of the best one...
    pub x_tol: f64,
    /// ...and the spread of objective values is below this.
    pub f_tol: f64,
    pub max_iter: usize,
}

/// Maximizes `objective` with the Nelder-Mead simplex method.
///
/// Non-finite objective values are treated as `-∞`, so callers can encode
/// hard constraints by returning `NaN` or `-∞` outside the feasible region.
/// The starting simplex is `initial` plus `initial_step[i]` along each axis,
/// so runs are reproducible.
pub fn maximize_nelder_mead<F>(objective: F, initial: &[f64], config: &NelderMeadConfig) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    let n = initial.len();
    if n == 0 || config.initial_step.len() != n {
        return Err(invalid("initial point and simplex steps must be nonempty and of equal length"));
    }
    let eval = |x: &[f64]| {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    };
    let start = eval(initial);
    if start == f64::NEG_INFINITY {
        return Err(Error::NonFinite("objective is not finite at the initial point".into()));
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((initial.to_vec(), start));
    for i in 0..n {
        let mut v = initial.to_vec();
        v[i] += config.initial_step[i];
        let fv = eval(&v);
        simplex.push((v, fv));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        // best first; stable sort keeps ties in insertion order
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = &simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&best.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = best.1 - simplex[n].1;
        if diameter < config.x_tol && spread.abs() < config.f_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect()
        };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr > simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            simplex[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        if fr > worst.1 {
            let outside = along(0.5);
            let fo = eval(&outside);
            if fo >= fr {
                simplex[n] = (outside, fo);
                continue;
            }
        } else {
            let inside = along(-0.5);
            let fi = eval(&inside);
            if fi > worst.1 {
                simplex[n] = (inside, fi);
                continue;
            }
        }
        // shrink towards the best vertex
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
            let fv = eval(&v);
            *vertex = (v, fv);
        }
    }
    simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (argmax, value) = simplex.swap_remove(0);
    Ok(OptimResult { argmax, value, iterations, converged, trace: None })
}
