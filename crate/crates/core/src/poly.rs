//! Small real polynomials. Coefficients are stored lowest degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Horner evaluation of `sum c[i] x^i`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn eval_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
}

/// All complex roots, as eigenvalues of the companion matrix.
///
/// Leading zero coefficients are dropped; an empty or constant polynomial has
/// no roots.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = match coeffs.iter().rposition(|&c| c != 0.0) {
        Some(d) if d > 0 => d,
        _ => return Vec::new(),
    };
    let lead = coeffs[degree];
    let mut companion = DMatrix::<f64>::zeros(degree, degree);
    for i in 1..degree {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -coeffs[i] / lead;
    }
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Real roots in ascending order. A complex root counts as real when its
/// imaginary part is below `imag_tol` (scaled by `max(1, |z|)`); each real
/// root gets a few guarded Newton steps.
pub fn real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = roots(coeffs)
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| polish(coeffs, z.re))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn polish(coeffs: &[f64], mut x: f64) -> f64 {
    let mut fx = eval(coeffs, x).abs();
    for _ in 0..8 {
        let d = eval_derivative(coeffs, x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - eval(coeffs, x) / d;
        let fnext = eval(coeffs, next).abs();
        if !(fnext < fx) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// Roots of the monic cubic `x^3 + b x^2 + c x + d` by Cardano's formula in
/// complex arithmetic; valid whether or not the roots are real.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = Complex64::from(q * q / 4.0 + p * p * p / 27.0).sqrt();
    let mut u = (Complex64::from(-q / 2.0) + disc).cbrt();
    if u.norm() < 1e-300 {
        u = (Complex64::from(-q / 2.0) - disc).cbrt();
    }
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let mut uk = u;
    for root in &mut out {
        let v = if uk.norm() < 1e-300 {
            Complex64::new(0.0, 0.0)
        } else {
            -p / (3.0 * uk)
        };
        *root = uk + v - shift;
        uk *= omega;
    }
    out
}
