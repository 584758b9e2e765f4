//! Projected gradient ascent with finite-difference gradients, plus a
//! golden-section search for one-dimensional unimodal problems.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Margin used by [`Ordering::strict`].
pub const STRICT_MARGIN: f64 = 1e-9;

/// Constraint `x[below] + margin ≤ x[above]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ordering {
    pub below: usize,
    pub above: usize,
    pub margin: f64,
}

impl Ordering {
    /// `x[below] < x[above]`, enforced with a margin of [`STRICT_MARGIN`].
    pub fn strict(below: usize, above: usize) -> Self {
        Self { below, above, margin: STRICT_MARGIN }
    }

    /// `x[below] ≤ x[above]`.
    pub fn weak(below: usize, above: usize) -> Self {
        Self { below, above, margin: 0.0 }
    }

    fn holds(&self, x: &[f64]) -> bool {
        x[self.below] + self.margin <= x[self.above]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentConfig {
    /// Finite-difference step relative to `max(|x_i|, 1)`.
    pub rel_step: f64,
    /// Sufficient-increase constant of the backtracking line search.
    pub armijo: f64,
    /// Stop once the projected-gradient norm falls below this.
    pub grad_tol: f64,
    /// When the line search can no longer find an increase, the run still
    /// counts as converged if the projected-gradient norm is below this.
    pub stall_tol: f64,
    pub max_iter: usize,
    pub record_trace: bool,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self { rel_step: 1e-6, armijo: 1e-4, grad_tol: 1e-8, stall_tol: 1e-6, max_iter: 10_000, record_trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Set only when the stopping criterion (projected-gradient norm, or
    /// simplex diameter for Nelder-Mead) was met, or the ascent stalled with a
    /// projected gradient below `stall_tol`.
    pub converged: bool,
    pub trace: Option<Vec<(Vec<f64>, f64)>>,
}

/// Finite-difference gradient of `f` at `x`.
///
/// Central differences with step `rel_step · max(|x_i|, 1)`, switching to a
/// forward difference for coordinates within one step of their lower bound.
pub fn numerical_gradient<F>(f: &F, x: &[f64], rel_step: f64, lower: Option<&[f64]>) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    let fx = if lower.is_some() { Some(f(x)) } else { None };
    for i in 0..x.len() {
        let h = rel_step * x[i].abs().max(1.0);
        let near_bound = lower.is_some_and(|lb| x[i] - h < lb[i]);
        probe[i] = x[i] + h;
        let up = f(&probe);
        if near_bound {
            grad[i] = (up - fx.unwrap_or_else(|| f(x))) / h;
        } else {
            probe[i] = x[i] - h;
            let down = f(&probe);
            grad[i] = (up - down) / (2.0 * h);
        }
        probe[i] = x[i];
    }
    grad
}

fn is_feasible(x: &[f64], lower: &[f64], orderings: &[Ordering]) -> bool {
    x.iter().zip(lower).all(|(v, lb)| v >= lb) && orderings.iter().all(|o| o.holds(x))
}

/// Maps `x` onto the feasible set by cyclic lower-bound clipping and pairwise
/// ordering corrections. Returns `None` if the corrections do not settle.
fn project(mut x: Vec<f64>, lower: &[f64], orderings: &[Ordering]) -> Option<Vec<f64>> {
    for _ in 0..200 {
        for (v, lb) in x.iter_mut().zip(lower) {
            if *v < *lb {
                *v = *lb;
            }
        }
        if orderings.iter().all(|o| o.holds(&x)) {
            return Some(x);
        }
        for o in orderings {
            if !o.holds(&x) {
                let mid = 0.5 * (x[o.below] + x[o.above]);
                x[o.below] = mid - 0.5 * o.margin;
                x[o.above] = mid + 0.5 * o.margin;
                // rounding can leave the pair a hair short of the margin
                if !o.holds(&x) {
                    x[o.above] = x[o.below] + o.margin;
                    if !o.holds(&x) {
                        x[o.above] = x[o.above].next_up();
                    }
                }
            }
        }
    }
    is_feasible(&x, lower, orderings).then_some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `objective` over `{x : x ≥ lower, x[i] + margin ≤ x[j] for each ordering}`.
///
/// Gradient ascent with finite-difference gradients, Barzilai-Borwein trial
/// steps and Armijo backtracking by halving. Every accepted step increases
/// the objective, so the returned value is never below the initial one. The
/// procedure is fully deterministic.
pub fn maximize_projected<F>(
    objective: F,
    initial: &[f64],
    lower: &[f64],
    orderings: &[Ordering],
    config: &AscentConfig,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    let n = initial.len();
    if n == 0 || lower.len() != n {
        return Err(invalid("initial point and lower bounds must be nonempty and of equal length"));
    }
    if orderings.iter().any(|o| o.below >= n || o.above >= n || o.below == o.above) {
        return Err(invalid("ordering constraint refers to an invalid index"));
    }
    if !is_feasible(initial, lower, orderings) {
        return Err(Error::Infeasible(format!("initial point {initial:?} violates the constraints")));
    }
    let mut x = initial.to_vec();
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(Error::NonFinite(format!("objective is {fx} at the initial point")));
    }

    let mut trace = config.record_trace.then(|| vec![(x.clone(), fx)]);
    let mut grad = numerical_gradient(&objective, &x, config.rel_step, Some(lower));
    let mut trial = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut pg_norm;

    while iterations < config.max_iter {
        let unit = project(x.iter().zip(&grad).map(|(a, g)| a + g).collect(), lower, orderings);
        pg_norm = match &unit {
            Some(p) => norm(&p.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()),
            None => norm(&grad),
        };
        if pg_norm < config.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut step = trial;
        let mut accepted = None;
        while step > 1e-20 {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            if let Some(cand) = project(cand, lower, orderings) {
                let fc = objective(&cand);
                let moved: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
                if fc.is_finite() && norm(&moved) > 0.0 && fc >= fx + config.armijo * dot(&grad, &moved)
                {
                    accepted = Some((cand, fc, moved));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((cand, fc, moved)) = accepted else {
            // no ascent direction left at finite-difference resolution
            converged = pg_norm < config.stall_tol;
            break;
        };

        let new_grad = numerical_gradient(&objective, &cand, config.rel_step, Some(lower));
        // Barzilai-Borwein step for the minimization of -f
        let dy: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| b - a).collect();
        let sy = dot(&moved, &dy);
        trial = if sy > 0.0 { (dot(&moved, &moved) / sy).clamp(1e-10, 1e10) } else { (2.0 * step).min(1e10) };

        x = cand;
        fx = fc;
        grad = new_grad;
        if let Some(t) = trace.as_mut() {
            t.push((x.clone(), fx));
        }
    }

    Ok(OptimResult { argmax: x, value: fx, iterations, converged, trace })
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(argmax, value, iterations)` once the bracket is narrower than `x_tol`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, x_tol: f64) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) || !(x_tol > 0.0) {
        return Err(invalid("golden-section search needs lo < hi and a positive tolerance"));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > x_tol && iterations < 10_000 {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let (x, v) = if fc >= fd { (c, fc) } else { (d, fd) };
    if !v.is_finite() {
        return Err(Error::NonFinite(format!("objective is {v} at {x}")));
    }
    Ok((x, v, iterations))
}
