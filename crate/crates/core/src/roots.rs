//! Complex roots of real polynomials by simultaneous (Aberth) iteration.
//!
//! Coefficients are stored with the leading term first:
//! `[a_n, a_{n-1}, ..., a_0]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Above this backward error the roots are rejected.
pub const MAX_RESIDUAL: f64 = 1e-6;

const MAX_ITERATIONS: usize = 800;
const POLISH_STEPS: usize = 3;

/// Roots of a polynomial together with the worst relative backward error.
#[derive(Debug, Clone)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    pub residual: f64,
}

/// `p(z)` and `p'(z)` by Horner's rule.
pub fn eval_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// `|p(z)| / sum |a_k| |z|^k`: relative backward error of `z` as a root.
pub fn backward_error(coeffs: &[f64], z: Complex64) -> f64 {
    let (p, _) = eval_with_derivative(coeffs, z);
    let r = z.norm();
    let scale = coeffs.iter().fold(0.0, |acc, c| acc * r + c.abs());
    if scale == 0.0 {
        0.0
    } else {
        p.norm() / scale
    }
}

/// All roots with multiplicity.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Roots> {
    let start = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .ok_or_else(|| Error::InvalidArgument("zero polynomial has no roots".into()))?;
    let leading = coeffs[start];
    let full: Vec<f64> = coeffs[start..].iter().map(|c| c / leading).collect();
    let mut monic = full.clone();

    let mut roots = Vec::with_capacity(monic.len() - 1);
    while monic.len() > 1 && *monic.last().unwrap() == 0.0 {
        monic.pop();
        roots.push(Complex64::new(0.0, 0.0));
    }
    let degree = monic.len() - 1;
    match degree {
        0 => {}
        1 => roots.push(Complex64::new(-monic[1], 0.0)),
        _ => roots.extend(aberth(&monic)),
    }

    let residual = roots
        .iter()
        .map(|&z| backward_error(&full, z))
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > MAX_RESIDUAL {
        return Err(Error::ConvergenceFailure { residual });
    }
    Ok(Roots { roots, residual })
}

fn aberth(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    let mut z = initial_guesses(coeffs);
    let mut done = vec![false; degree];
    for _ in 0..MAX_ITERATIONS {
        let mut all_done = true;
        for i in 0..degree {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(coeffs, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    for root in &mut z {
        polish(coeffs, root);
    }
    z
}

/// A few Newton steps, each kept only if it lowers `|p|`.
fn polish(coeffs: &[f64], root: &mut Complex64) {
    let (mut value, mut slope) = eval_with_derivative(coeffs, *root);
    for _ in 0..POLISH_STEPS {
        if value.norm() == 0.0 || slope.norm() == 0.0 {
            return;
        }
        let candidate = *root - value / slope;
        let (next_value, next_slope) = eval_with_derivative(coeffs, candidate);
        if !(next_value.norm() < value.norm()) {
            return;
        }
        *root = candidate;
        value = next_value;
        slope = next_slope;
    }
}

/// Starting points on circles whose radii come from the upper convex hull of
/// `(k, ln|a_k|)`, one circle per hull edge.
fn initial_guesses(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    // index k = power of z
    let points: Vec<(usize, f64)> = (0..=degree)
        .filter_map(|k| {
            let a = coeffs[degree - k].abs();
            (a > 0.0).then(|| (k, a.ln()))
        })
        .collect();
    let hull = upper_hull(&points);

    let mut guesses = Vec::with_capacity(degree);
    let sigma = 0.7;
    for pair in hull.windows(2) {
        let ((k0, l0), (k1, l1)) = (pair[0], pair[1]);
        let count = k1 - k0;
        let radius = ((l0 - l1) / count as f64).exp();
        for j in 0..count {
            let angle = 2.0 * PI * j as f64 / count as f64 + 2.0 * PI * k0 as f64 / degree as f64 + sigma;
            guesses.push(Complex64::from_polar(radius, angle));
        }
    }
    // leading run of zero low-order coefficients is removed by the caller,
    // so the hull always spans 0..=degree
    debug_assert_eq!(guesses.len(), degree);
    guesses
}

fn upper_hull(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut hull: Vec<(usize, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 as f64 - a.0 as f64) * (p.1 - a.1) - (b.1 - a.1) * (p.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
